"""Equivalence checks and constructions of distinct schemes with equal FDS.

Conditions are always recomputed from the matrices themselves (rows of
``B``, ``AB``, ``A^2 B`` and the characteristic polynomial of ``A``) and
never from hand-expanded polynomial identities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .derive import ClosedFds, Fds, FdsDiff, closed_from_lbs, fds_close, fds_equal, fds_from_lbs
from .opmatrix import (OpMatrix, mat_charpoly, mat_mul, mat_symbol, rational_det, rational_inverse,
                       rational_matmul, rational_matrix)
from .scheme import LbsSpec, OperatorScheme
from .shiftring import RationalLike, ShiftPoly, to_fraction

D1Q2_M = ((1, 1), (1, -1))
D1Q2_VELOCITIES = (1, -1)


class DegenerateParameters(ValueError):
    """Parameters for which a construction is undefined."""


@dataclass(frozen=True)
class Condition:
    name: str
    description: str
    holds: bool
    lhs: str
    rhs: str


@dataclass
class EquivReport:
    kind: str
    conditions: list[Condition]
    fds_equal: Optional[bool] = None
    diff: list[FdsDiff] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def conditions_hold(self) -> bool:
        return all(c.holds for c in self.conditions)

    @property
    def equivalent(self) -> bool:
        return self.fds_equal if self.fds_equal is not None else self.conditions_hold

    def failed(self) -> list[str]:
        return [c.name for c in self.conditions if not c.holds]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "conditions": [vars(c) for c in self.conditions],
            "conditions_hold": self.conditions_hold,
            "fds_equal": self.fds_equal,
            "diff": [vars(d) for d in self.diff],
            "equivalent": self.equivalent,
            "notes": list(self.notes),
        }

    def to_text(self) -> str:
        lines = [f"{self.kind} equivalence check"]
        for c in self.conditions:
            mark = "ok  " if c.holds else "FAIL"
            lines.append(f"  [{mark}] {c.name}: {c.description}")
            if not c.holds:
                lines.append(f"         lhs = {c.lhs}")
                lines.append(f"         rhs = {c.rhs}")
        if self.fds_equal is not None:
            lines.append(f"  derived FDS equal: {self.fds_equal}")
            for d in self.diff[:5]:
                lines.append(f"    differs at {d.component}: {d.lhs}  vs  {d.rhs}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        lines.append(f"  verdict: {'EQUIVALENT' if self.equivalent else 'NOT EQUIVALENT'}")
        return "\n".join(lines)


def _row_text(row) -> str:
    return "(" + ", ".join(e.to_text() for e in row) + ")"


def _cond(name, description, lhs, rhs) -> Condition:
    if isinstance(lhs, ShiftPoly):
        return Condition(name, description, lhs == rhs, lhs.to_text(), rhs.to_text())
    return Condition(name, description, tuple(lhs) == tuple(rhs), _row_text(lhs), _row_text(rhs))


def _require_d1q3(T: OpMatrix, Tt: OpMatrix):
    if T.q != 3 or Tt.q != 3:
        raise ValueError("both transport matrices must be 3x3")
    if T.dim != 1 or Tt.dim != 1:
        raise ValueError("both transport matrices must act in one dimension")


def check_trivial(T: OpMatrix, Tt: OpMatrix) -> EquivReport:
    """First-row conditions for S = diag(0, 1, 1), plus the derived-FDS verdict."""
    _require_d1q3(T, Tt)
    conds = [_cond(f"c{k}", f"t1{k} = t~1{k}", T[0, k - 1], Tt[0, k - 1]) for k in (1, 2, 3)]
    S = (0, 1, 1)
    f1 = fds_from_lbs(OperatorScheme(T, S, 1))
    f2 = fds_from_lbs(OperatorScheme(Tt, S, 1))
    eq, diff = fds_equal(f1, f2)
    return EquivReport("trivial", conds, eq, diff)


def nontrivial_quantities(T: OpMatrix) -> dict[str, object]:
    """Rows and coefficients compared by the nontrivial check (S = diag(0, 2, 2))."""
    sch = OperatorScheme(T, (0, 2, 2), 1)
    A, B = sch.collision_matrices()
    AB = mat_mul(A, B)
    A2B = mat_mul(A, AB)
    chi = mat_charpoly(A)
    return {"A": A, "B": B, "B1": B.row(0), "AB1": AB.row(0), "A2B1": A2B.row(0),
            "trace": A.trace(), "gamma": chi.coeffs}


def check_nontrivial(T: OpMatrix, Tt: OpMatrix) -> EquivReport:
    """Eight conditions for S = diag(0, 2, 2) and the independent FDS comparison.

    c1: first row of B; c2, c3: entries 2, 3 of the first row of AB;
    c4, c5: entries 2, 3 of the first row of A^2 B; c6: trace of A;
    c7: gamma_1; c8: gamma_0 (coefficients of det(X I - A)).
    """
    _require_d1q3(T, Tt)
    a, b = nontrivial_quantities(T), nontrivial_quantities(Tt)
    conds = [
        _cond("c1", "(B)_1 = (B~)_1", a["B1"], b["B1"]),
        _cond("c2", "(AB)_12 = (A~B~)_12", a["AB1"][1], b["AB1"][1]),
        _cond("c3", "(AB)_13 = (A~B~)_13", a["AB1"][2], b["AB1"][2]),
        _cond("c4", "(A^2B)_12 = (A~^2B~)_12", a["A2B1"][1], b["A2B1"][1]),
        _cond("c5", "(A^2B)_13 = (A~^2B~)_13", a["A2B1"][2], b["A2B1"][2]),
        _cond("c6", "tr(A) = tr(A~)", a["trace"], b["trace"]),
        _cond("c7", "gamma_1 = gamma~_1", a["gamma"][1], b["gamma"][1]),
        _cond("c8", "gamma_0 = gamma~_0", a["gamma"][0], b["gamma"][0]),
    ]
    S = (0, 2, 2)
    f1 = fds_from_lbs(OperatorScheme(T, S, 1))
    f2 = fds_from_lbs(OperatorScheme(Tt, S, 1))
    eq, diff = fds_equal(f1, f2)
    report = EquivReport("nontrivial", conds, eq, diff)
    if report.conditions_hold != eq:
        report.notes.append("condition verdict and FDS comparison disagree")
    return report


def check_direct(spec1, spec2) -> EquivReport:
    """Compare the derived schemes as they are (own S and equilibria).

    When both carry equilibria the verdict is the closed recurrence; the
    symbolic-equilibrium comparison is reported as a condition.
    """
    f1, f2 = fds_from_lbs(spec1), fds_from_lbs(spec2)
    eq_open, diff_open = fds_equal(f1, f2)
    conds = [Condition("fds", "derived FDS with symbolic equilibria", eq_open, f1.fingerprint(), f2.fingerprint())]
    if spec1.equilibria is not None and spec2.equilibria is not None:
        c1, c2 = closed_from_lbs(spec1), closed_from_lbs(spec2)
        eq_closed, diff_closed = fds_equal(c1, c2)
        conds.append(Condition("closed", "recurrence after substituting equilibria",
                               eq_closed, c1.fingerprint(), c2.fingerprint()))
        return EquivReport("direct", conds, eq_closed, diff_closed)
    return EquivReport("direct", conds, eq_open, diff_open)


# D1Q2 family -----------------------------------------------------------------

def family_m11(m12, m21, m22, eps) -> Fraction:
    m12, m21, m22, eps = (to_fraction(v) for v in (m12, m21, m22, eps))
    den = eps * m22 + 2 * m12 * eps - m22
    if den == 0:
        raise DegenerateParameters(
            f"eps*m22 + 2*m12*eps - m22 = 0 for m12={m12}, m22={m22}, eps={eps}")
    return m12 * m21 * (eps + 1) / den


def d1q2_spec(M, eps, s) -> LbsSpec:
    eps = to_fraction(eps)
    return LbsSpec(M, D1Q2_VELOCITIES, (0, s), 1, ((1,), (eps,)))


@dataclass
class FamilyResult:
    M_tilde: tuple[tuple[Fraction, ...], ...]
    m11: Fraction
    s: Fraction
    eps: Fraction
    eps_tilde: Fraction
    charpoly_equal: bool
    closed_equal: bool
    diff: list[FdsDiff] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return self.charpoly_equal and self.closed_equal

    def to_json(self) -> dict:
        return {
            "M_tilde": [[str(v) for v in r] for r in self.M_tilde],
            "m11": str(self.m11),
            "s": str(self.s),
            "eps": str(self.eps),
            "eps_tilde": str(self.eps_tilde),
            "charpoly_equal": self.charpoly_equal,
            "closed_fds_equal": self.closed_equal,
            "verdict": self.verdict,
        }


def d1q2_family(m12: RationalLike, m21: RationalLike, m22: RationalLike, eps: RationalLike,
                s: RationalLike = 2, eps_tilde: RationalLike | None = None) -> FamilyResult:
    """Build M~ from the family formula and compare both closed schemes exactly."""
    m12, m21, m22, eps, s = (to_fraction(v) for v in (m12, m21, m22, eps, s))
    eps_t = eps if eps_tilde is None else to_fraction(eps_tilde)
    if not 0 < s <= 2:
        raise DegenerateParameters(f"relaxation rate s={s} outside (0, 2]")
    m11 = family_m11(m12, m21, m22, eps)
    Mt = ((m11, m12), (m21, m22))
    if rational_det(Mt) == 0:
        raise DegenerateParameters(f"M~ = {[[str(v) for v in r] for r in Mt]} is singular")
    ref = d1q2_spec(D1Q2_M, eps, s)
    alt = d1q2_spec(Mt, eps_t, s)
    chi_eq = mat_charpoly(ref.closure()) == mat_charpoly(alt.closure())
    same, diff = fds_equal(closed_from_lbs(ref), closed_from_lbs(alt))
    return FamilyResult(Mt, m11, s, eps, eps_t, chi_eq, same, diff)


def d1q2_sweep(m12, m21, m22, eps, s_values: Sequence[RationalLike],
               eps_tilde: RationalLike | None = None) -> list[FamilyResult]:
    return [d1q2_family(m12, m21, m22, eps, s, eps_tilde) for s in s_values]


def default_s_grid() -> list[Fraction]:
    return [Fraction(k, 4) for k in range(1, 9)]


# Similarity ------------------------------------------------------------------

@dataclass
class SimilarityWitness:
    P: tuple[tuple[Fraction, ...], ...]
    holds: bool


def similarity_witness(M, Mt, velocities) -> SimilarityWitness:
    """P = M~ M^-1 and an exact check of P T P^-1 = T~."""
    M, Mt = rational_matrix(M), rational_matrix(Mt)
    if len(M) != len(Mt):
        raise ValueError("moment matrices differ in size")
    for X in (M, Mt):
        if rational_det(X) == 0:
            raise ValueError("moment matrix is singular")
    q = len(M)
    S = (0,) + (1,) * (q - 1)  # relaxation is irrelevant for T
    T = LbsSpec(M, velocities, S, 1).transport()
    Tt = LbsSpec(Mt, velocities, S, 1).transport()
    P = rational_matmul(Mt, rational_inverse(M))
    Pop = OpMatrix.from_rational(P, T.dim)
    Pinv = OpMatrix.from_rational(rational_inverse(P), T.dim)
    return SimilarityWitness(P, mat_mul(mat_mul(Pop, T), Pinv) == Tt)


# Symbol cross-check ------------------------------------------------------------

@dataclass
class SymbolReport:
    max_deviation: float
    worst_theta: object
    agree: bool
    tolerance: float


def symbol_cross_check(E: OpMatrix, Et: OpMatrix, thetas, tol: float = 1e-10) -> SymbolReport:
    """Compare complex characteristic polynomials of the Fourier symbols."""
    if E.q != Et.q:
        raise ValueError("matrices differ in size")
    worst, worst_theta = 0.0, None
    for th in thetas:
        c1 = np.poly(mat_symbol(E, th))
        c2 = np.poly(mat_symbol(Et, th))
        dev = float(np.max(np.abs(c1 - c2)))
        if worst_theta is None or dev > worst:
            worst, worst_theta = dev, th
    return SymbolReport(worst, worst_theta, worst <= tol, tol)


def theta_grid(n: int = 64) -> list[float]:
    return [2 * np.pi * k / n for k in range(n)]


# Constructions -----------------------------------------------------------------

D1Q3_VELOCITIES = (1, -1, 0)
D1Q3_EMBED_M = ((1, 1, 0), (1, -1, 0), (0, 0, 1))


def embedded_d1q3_pair(beta: RationalLike, gamma: RationalLike = 1, M=D1Q3_EMBED_M,
                       equilibria=None) -> tuple[LbsSpec, LbsSpec]:
    """Two D1Q3 schemes (S = diag(0, 2, 2)) with identical derived FDS.

    ``M`` must have a column proportional to ``e_3`` so that the third moment
    never feeds the first two.  The second scheme uses ``P M`` with
    ``P = [[1,0,0],[0,1,0],[0,beta,gamma]]``; ``P`` fixes every first-row
    quantity that enters the FDS, while ``T~ = P T P^-1`` differs from ``T``
    as soon as ``beta != 0``.
    """
    beta, gamma = to_fraction(beta), to_fraction(gamma)
    if gamma == 0:
        raise DegenerateParameters("gamma must be nonzero")
    P = ((1, 0, 0), (0, 1, 0), (0, beta, gamma))
    Mt = rational_matmul(rational_matrix(P), rational_matrix(M))
    S = (0, 2, 2)
    return (LbsSpec(M, D1Q3_VELOCITIES, S, 1, equilibria),
            LbsSpec(Mt, D1Q3_VELOCITIES, S, 1, equilibria))
