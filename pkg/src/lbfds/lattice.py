"""Exact periodic simulation used to cross-validate derived recurrences."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .derive import ClosedFds, fds_apply
from .scheme import MissingEquilibria, apply_matrix, equilibrium_state, lbs_step
from .shiftring import grid


@dataclass(frozen=True)
class Trajectory:
    levels: tuple[np.ndarray, ...]  # each q x grid, object dtype
    N: int
    fingerprint: str = ""

    @property
    def steps(self) -> int:
        return len(self.levels) - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.levels[0].shape[1:]

    @property
    def L(self) -> int:
        return self.shape[0]

    def conserved(self, level: int) -> np.ndarray:
        return self.levels[level][: self.N]

    def moment(self, k: int) -> list[np.ndarray]:
        """Time series of moment ``k`` (0-based)."""
        return [lvl[k] for lvl in self.levels]

    def to_csv(self, fh=None) -> str:
        """``level,node,moment,value`` rows; node is the flat index, moment 1-based."""
        buf = fh or io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "node", "moment", "value"])
        for n, lvl in enumerate(self.levels):
            q = lvl.shape[0]
            flat = lvl.reshape(q, -1)
            for x in range(flat.shape[1]):
                for k in range(q):
                    w.writerow([n, x, k + 1, str(flat[k, x])])
        return buf.getvalue() if fh is None else ""


def _init_conserved(spec, init, L: int | None) -> np.ndarray:
    arr = grid(init)
    if spec.N == 1 and arr.ndim == spec.d:
        arr = arr[np.newaxis]
    if arr.ndim != spec.d + 1 or arr.shape[0] != spec.N:
        raise ValueError(f"initial conserved fields must have shape (N={spec.N}, grid), got {arr.shape}")
    if L is not None and any(n != L for n in arr.shape[1:]):
        raise ValueError(f"initial field size {arr.shape[1:]} does not match L={L}")
    return arr


def _initial_state(spec, cons: np.ndarray, nonconserved) -> np.ndarray:
    state = equilibrium_state(spec, cons)
    state[: spec.N] = cons
    if nonconserved is not None:
        extra = grid(nonconserved)
        if extra.shape != (spec.q - spec.N,) + cons.shape[1:]:
            raise ValueError(f"non-conserved fields must have shape {(spec.q - spec.N,) + cons.shape[1:]}, "
                             f"got {extra.shape}")
        state[spec.N:] = extra
    return state


def run_lbs(spec, init, steps: int, L: int | None = None, nonconserved=None) -> Trajectory:
    """Simulate ``steps`` updates from conserved fields ``init``.

    Non-conserved moments start at their equilibrium values unless
    ``nonconserved`` (``q - N`` grid functions) is given.
    """
    if spec.equilibria is None:
        raise MissingEquilibria("simulation requires linear equilibria")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    cons = _init_conserved(spec, init, L)
    state = _initial_state(spec, cons, nonconserved)
    A, B = spec.collision_matrices()
    levels = [state]
    for _ in range(steps):
        state = lbs_step(spec, A, B, state)
        levels.append(state)
    return Trajectory(tuple(levels), spec.N, spec.fingerprint())


def run_closure(E, spec, init, steps: int, nonconserved=None) -> Trajectory:
    """Same trajectory obtained by repeatedly applying the closure matrix."""
    cons = _init_conserved(spec, init, None)
    state = _initial_state(spec, cons, nonconserved)
    levels = [state]
    for _ in range(steps):
        state = apply_matrix(E, state)
        levels.append(state)
    return Trajectory(tuple(levels), spec.N, spec.fingerprint())


@dataclass(frozen=True)
class RecurrenceCheck:
    max_residual: Fraction
    first_violation: Optional[tuple[int, tuple[int, ...]]]  # (level n+1, node)
    levels_checked: int

    @property
    def exact(self) -> bool:
        return self.max_residual == 0


def check_recurrence(traj: Trajectory, f: ClosedFds) -> RecurrenceCheck:
    """Residual of ``m_i^{n+1} - recurrence(history)`` for every checkable level."""
    depth = f.depth
    if traj.steps < depth:
        raise ValueError(f"trajectory has {traj.steps} steps, need at least {depth}")
    worst = Fraction(0)
    first = None
    checked = 0
    for n in range(depth - 1, traj.steps):
        history = [traj.conserved(k) for k in range(n - depth + 1, n + 1)]
        predicted = fds_apply(f, history)
        actual = traj.levels[n + 1][f.i - 1]
        res = actual - predicted
        for idx in np.ndindex(res.shape):
            r = abs(res[idx])
            if r and first is None:
                first = (n + 1, idx)
            if r > worst:
                worst = r
        checked += 1
    return RecurrenceCheck(worst, first, checked)


@dataclass(frozen=True)
class DivergenceReport:
    per_level: tuple[Fraction, ...]  # max |difference| of conserved moments
    first_divergence: Optional[int]

    @property
    def identical(self) -> bool:
        return self.first_divergence is None


def compare_conserved(trajA: Trajectory, trajB: Trajectory) -> DivergenceReport:
    if trajA.N != trajB.N or trajA.shape != trajB.shape or trajA.steps != trajB.steps:
        raise ValueError("trajectories have different shapes")
    if not np.array_equal(trajA.conserved(0), trajB.conserved(0)):
        raise ValueError("trajectories start from different conserved fields")
    diffs = []
    for a, b in zip(trajA.levels, trajB.levels):
        d = a[: trajA.N] - b[: trajB.N]
        diffs.append(max((abs(v) for v in d.flat), default=Fraction(0)))
    first = next((n for n, v in enumerate(diffs) if v), None)
    return DivergenceReport(tuple(diffs), first)


def conserved_totals(traj: Trajectory) -> list[list[Fraction]]:
    """Spatial sum of each conserved moment at every level."""
    return [[sum(lvl[c].flat, Fraction(0)) for c in range(traj.N)] for lvl in traj.levels]


def delta_field(L: int, node: int = 0, value=1) -> list[Fraction]:
    f = [Fraction(0)] * L
    f[node % L] = Fraction(value)
    return f


def constant_field(L: int, value=1) -> list[Fraction]:
    return [Fraction(value)] * L
