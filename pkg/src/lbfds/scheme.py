"""Lattice Boltzmann schemes in moment space.

A scheme is given by an invertible rational moment matrix ``M``, integer
lattice velocities, a relaxation diagonal ``S`` whose first ``N`` rates are
zero (the conserved moments) and optionally a linear equilibrium map
``E_eq`` (q x N) with ``m_eq = E_eq @ (m_1, ..., m_N)``.

From these we build

* the transport matrix ``T = M diag(T[c_1], ..., T[c_q]) M^-1``,
* the collision matrices ``A = T (I - S)`` and ``B = T S``,
* the closure ``E = A + B E_eq P`` where ``P`` selects the conserved moments.

``OperatorScheme`` accepts ``T`` directly, which is how the generic
``t_ij`` examples are expressed when no moment matrix is at hand.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .opmatrix import OpMatrix, mat_mul, rational_det, rational_inverse, rational_matrix
from .shiftring import ShiftPoly, format_fraction, to_fraction


class SchemeError(ValueError):
    """Invalid scheme definition."""


class MissingEquilibria(SchemeError):
    pass


def _check_relaxation(S: Sequence[Fraction], N: int, q: int):
    if len(S) != q:
        raise SchemeError(f"S has {len(S)} entries, expected q={q}")
    if not 1 <= N < q:
        raise SchemeError(f"need 1 <= N < q, got N={N}, q={q}")
    for i, s in enumerate(S):
        if i < N and s != 0:
            raise SchemeError(f"relaxation rate of conserved moment {i + 1} must be 0, got {s}")
        if i >= N and not 0 < s <= 2:
            raise SchemeError(f"relaxation rate s_{i + 1}={s} outside (0, 2]")


def _check_equilibria(E_eq, q: int, N: int):
    if E_eq is None:
        return None
    E = tuple(tuple(to_fraction(v) for v in r) for r in E_eq)
    if len(E) != q or any(len(r) != N for r in E):
        raise SchemeError(f"equilibria must be a {q}x{N} matrix")
    for i in range(N):
        if E[i] != tuple(Fraction(int(i == j)) for j in range(N)):
            raise SchemeError(f"equilibrium row {i + 1} must reproduce conserved moment {i + 1}")
    return E


class _SchemeBase:
    q: int
    d: int
    N: int
    S: tuple[Fraction, ...]
    equilibria: Optional[tuple[tuple[Fraction, ...], ...]]

    def transport(self) -> OpMatrix:
        raise NotImplementedError

    def relaxation_matrix(self) -> OpMatrix:
        return OpMatrix.diag([ShiftPoly.const(s, self.d) for s in self.S], self.d)

    def collision_matrices(self) -> tuple[OpMatrix, OpMatrix]:
        T = self.transport()
        S = self.relaxation_matrix()
        I = OpMatrix.identity(self.q, self.d)
        return mat_mul(T, I - S), mat_mul(T, S)

    def equilibrium_embedding(self) -> OpMatrix:
        """q x q matrix ``E_eq P``: equilibria placed in the conserved columns."""
        if self.equilibria is None:
            raise MissingEquilibria("scheme has no equilibria")
        rows = [[self.equilibria[r][c] if c < self.N else 0 for c in range(self.q)] for r in range(self.q)]
        return OpMatrix.from_rational(rows, self.d)

    def closure(self) -> OpMatrix:
        A, B = self.collision_matrices()
        return A + mat_mul(B, self.equilibrium_embedding())

    def step(self, state: np.ndarray) -> np.ndarray:
        A, B = self.collision_matrices()
        return lbs_step(self, A, B, state)

    def fingerprint(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def canonical(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LbsSpec(_SchemeBase):
    M: tuple[tuple[Fraction, ...], ...]
    velocities: tuple[tuple[int, ...], ...]
    S: tuple[Fraction, ...]
    N: int
    equilibria: Optional[tuple[tuple[Fraction, ...], ...]] = None
    label: Optional[str] = None
    _Minv: tuple = field(init=False, repr=False, compare=False)

    def __init__(self, M, velocities, S, N: int, equilibria=None, label: str | None = None):
        try:
            Mr = rational_matrix(M)
        except (TypeError, ValueError) as exc:
            raise SchemeError(f"bad moment matrix: {exc}") from exc
        q = len(Mr)
        vel = tuple((int(v),) if isinstance(v, (int, np.integer)) else tuple(int(x) for x in v) for v in velocities)
        if len(vel) != q:
            raise SchemeError(f"{len(vel)} velocities given for q={q}")
        dims = {len(v) for v in vel}
        if len(dims) != 1 or 0 in dims:
            raise SchemeError("all velocities must have the same positive dimension")
        Sf = tuple(to_fraction(s) for s in S)
        _check_relaxation(Sf, N, q)
        if rational_det(Mr) == 0:
            raise SchemeError("moment matrix is singular")
        object.__setattr__(self, "M", Mr)
        object.__setattr__(self, "velocities", vel)
        object.__setattr__(self, "S", Sf)
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "equilibria", _check_equilibria(equilibria, q, N))
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "_Minv", rational_inverse(Mr))

    @property
    def q(self) -> int:
        return len(self.M)

    @property
    def d(self) -> int:
        return len(self.velocities[0])

    @property
    def M_inv(self):
        return self._Minv

    def transport(self) -> OpMatrix:
        return lbs_transport(self)

    def with_equilibria(self, equilibria) -> LbsSpec:
        return LbsSpec(self.M, self.velocities, self.S, self.N, equilibria, self.label)

    def with_relaxation(self, S) -> LbsSpec:
        return LbsSpec(self.M, self.velocities, S, self.N, self.equilibria, self.label)

    def canonical(self) -> dict:
        out = {
            "q": self.q,
            "d": self.d,
            "N": self.N,
            "M": [[format_fraction(v) for v in r] for r in self.M],
            "velocities": [list(v) for v in self.velocities],
            "S": [format_fraction(s) for s in self.S],
            "equilibria": None if self.equilibria is None else [[format_fraction(v) for v in r] for r in self.equilibria],
        }
        return out

    def to_json(self) -> dict:
        out = self.canonical()
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, data: dict) -> LbsSpec:
        return scheme_from_json(data)


@dataclass(frozen=True)
class OperatorScheme(_SchemeBase):
    """Scheme given by its transport matrix instead of a moment matrix."""

    T: OpMatrix
    S: tuple[Fraction, ...]
    N: int
    equilibria: Optional[tuple[tuple[Fraction, ...], ...]] = None

    def __init__(self, T: OpMatrix, S, N: int, equilibria=None):
        Sf = tuple(to_fraction(s) for s in S)
        _check_relaxation(Sf, N, T.q)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "S", Sf)
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "equilibria", _check_equilibria(equilibria, T.q, N))

    @property
    def q(self) -> int:
        return self.T.q

    @property
    def d(self) -> int:
        return self.T.dim

    def transport(self) -> OpMatrix:
        return self.T

    def canonical(self) -> dict:
        return {
            "T": self.T.to_text(),
            "S": [format_fraction(s) for s in self.S],
            "N": self.N,
            "equilibria": None if self.equilibria is None else [[format_fraction(v) for v in r] for r in self.equilibria],
        }


def lbs_transport(spec: LbsSpec) -> OpMatrix:
    q, d = spec.q, spec.d
    Minv = spec.M_inv
    shifts = [ShiftPoly.shift(c) for c in spec.velocities]
    rows = []
    for r in range(q):
        row = []
        for c in range(q):
            acc = ShiftPoly.zero(d)
            for j in range(q):
                w = spec.M[r][j] * Minv[j][c]
                if w:
                    acc = acc + shifts[j].scale(w)
            row.append(acc)
        rows.append(row)
    return OpMatrix(rows, d)


def lbs_collision_matrices(spec) -> tuple[OpMatrix, OpMatrix]:
    return spec.collision_matrices()


def lbs_closure(spec) -> OpMatrix:
    return spec.closure()


def apply_matrix(A: OpMatrix, state: np.ndarray) -> np.ndarray:
    """Nodewise action of an operator matrix on a q x (grid) state."""
    state = np.asarray(state, dtype=object)
    if state.shape[0] != A.q:
        raise ValueError(f"state has {state.shape[0]} moments, matrix has size {A.q}")
    out = []
    for r in range(A.q):
        acc = np.full(state.shape[1:], Fraction(0), dtype=object)
        for c in range(A.q):
            if A[r, c]:
                acc = acc + A[r, c].apply(state[c])
        out.append(acc)
    return np.array(out, dtype=object).reshape(state.shape)


def equilibrium_state(spec, conserved: np.ndarray) -> np.ndarray:
    """m_eq = E_eq (m_1..m_N), computed nodewise."""
    if spec.equilibria is None:
        raise MissingEquilibria("scheme has no equilibria")
    conserved = np.asarray(conserved, dtype=object)
    rows = []
    for r in range(spec.q):
        acc = np.full(conserved.shape[1:], Fraction(0), dtype=object)
        for c in range(spec.N):
            w = spec.equilibria[r][c]
            if w:
                acc = acc + w * conserved[c]
        rows.append(acc)
    return np.array(rows, dtype=object).reshape((spec.q,) + conserved.shape[1:])


def lbs_step(spec, A: OpMatrix, B: OpMatrix, state: np.ndarray) -> np.ndarray:
    """One update m <- A m + B m_eq(m)."""
    state = np.asarray(state, dtype=object)
    if state.shape[0] != spec.q or state.ndim != spec.d + 1:
        raise ValueError(f"state shape {state.shape} does not match q={spec.q}, d={spec.d}")
    eq = equilibrium_state(spec, state[: spec.N])
    return apply_matrix(A, state) + apply_matrix(B, eq)


# JSON ------------------------------------------------------------------------

_FIELDS = {"q", "d", "N", "M", "velocities", "S", "equilibria", "label"}


def _rational_text(v, where: str) -> Fraction:
    if not isinstance(v, (str, int)) or isinstance(v, bool):
        raise SchemeError(f"{where}: rationals must be written as \"p/q\" strings, got {v!r}")
    try:
        return to_fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemeError(f"{where}: bad rational {v!r}") from exc


def scheme_from_json(data: dict) -> LbsSpec:
    if not isinstance(data, dict):
        raise SchemeError("scheme file must hold a JSON object")
    unknown = set(data) - _FIELDS
    if unknown:
        raise SchemeError(f"unknown fields: {sorted(unknown)}")
    for key in ("q", "N", "M", "velocities", "S"):
        if key not in data:
            raise SchemeError(f"missing field {key!r}")
    q, N = data["q"], data["N"]
    d = data.get("d", 1)
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in (q, N, d)):
        raise SchemeError("q, d and N must be integers")
    M = data["M"]
    if not isinstance(M, list) or len(M) != q or any(not isinstance(r, list) or len(r) != q for r in M):
        raise SchemeError(f"M must be a {q}x{q} array")
    Mr = [[_rational_text(v, f"M[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(M)]
    vel = data["velocities"]
    if not isinstance(vel, list) or len(vel) != q:
        raise SchemeError(f"velocities must list {q} entries")
    vv = []
    for j, v in enumerate(vel):
        v = [v] if isinstance(v, int) and not isinstance(v, bool) else v
        if not isinstance(v, list) or len(v) != d or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
            raise SchemeError(f"velocities[{j}] must be {d} integer(s)")
        vv.append(tuple(v))
    S = data["S"]
    if not isinstance(S, list) or len(S) != q:
        raise SchemeError(f"S must list {q} rates")
    Sr = [_rational_text(s, f"S[{i}]") for i, s in enumerate(S)]
    eq = data.get("equilibria")
    eqr = None
    if eq is not None:
        if not isinstance(eq, list) or len(eq) != q or any(not isinstance(r, list) or len(r) != N for r in eq):
            raise SchemeError(f"equilibria must be a {q}x{N} array")
        eqr = [[_rational_text(v, f"equilibria[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(eq)]
    return LbsSpec(Mr, vv, Sr, N, eqr, data.get("label"))


def load_scheme(path) -> LbsSpec:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemeError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return scheme_from_json(data)
