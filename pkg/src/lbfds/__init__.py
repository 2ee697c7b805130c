"""Lattice Boltzmann schemes as matrices over shift operators, their derived
multi-step finite difference schemes, and checks that distinct schemes share
one finite difference scheme."""

from .shiftring import ShiftPoly, sp_add, sp_apply, sp_mul, sp_parse, sp_shift, sp_symbol
from .opmatrix import (CharPoly, OpMatrix, mat_charpoly, mat_det, mat_eval_charpoly, mat_mul,
                       mat_restrict, mat_symbol)
from .scheme import LbsSpec, OperatorScheme, lbs_closure, lbs_collision_matrices, lbs_step, lbs_transport
from .derive import ClosedFds, Fds, fds_apply, fds_close, fds_equal, fds_from_lbs, fds_from_matrices
from .equiv import (check_nontrivial, check_trivial, d1q2_family, embedded_d1q3_pair, similarity_witness,
                    symbol_cross_check)
from .lattice import Trajectory, check_recurrence, compare_conserved, constant_field, delta_field, run_lbs

__version__ = "0.1.0"
