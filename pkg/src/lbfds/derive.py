"""Multi-step finite difference schemes on the conserved moments.

For conserved index ``i`` the collision matrix is split as
``A = A_i + A_i^dia`` where ``A_i`` keeps the rows and columns
``{i} U {N+1, ..., q}``.  With ``chi_{A_i} = X^(N-1) sum_k gamma_k X^k`` and
``p = q + 1 - N`` the conserved moment obeys, for lags ``j = 0..q-N``,

    m_i^{n+1} = sum_j [ -gamma_{p-1-j} m_i^{n-j}
                        + (P_j A_i^dia m^{n-j})_i
                        + (P_j B m_eq^{n-j})_i ],
    P_j = sum_{l=0}^{j} gamma_{p+l-j} A_i^l.

Everything is stored lag-ascending (lag 0 is time level ``n``).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .opmatrix import CharPoly, OpMatrix, mat_charpoly, mat_mul, mat_restrict
from .shiftring import ShiftPoly, sp_parse, to_fraction

Row = tuple[ShiftPoly, ...]


class FdsError(ValueError):
    pass


@dataclass(frozen=True)
class Fds:
    """Derived scheme for conserved moment ``i`` (1-based), equilibria kept symbolic."""

    q: int
    N: int
    i: int
    gamma: tuple[ShiftPoly, ...]
    homogeneous: tuple[ShiftPoly, ...]
    cross: tuple[Row, ...]
    source: tuple[Row, ...]

    @property
    def dim(self) -> int:
        return self.gamma[0].dim

    @property
    def depth(self) -> int:
        return len(self.homogeneous)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "N": self.N,
            "i": self.i,
            "dim": self.dim,
            "gamma": [g.to_text() for g in self.gamma],
            "homogeneous": [h.to_text() for h in self.homogeneous],
            "cross": [[e.to_text() for e in r] for r in self.cross],
            "source": [[e.to_text() for e in r] for r in self.source],
        }

    def fingerprint(self) -> str:
        return fingerprint(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> Fds:
        dim = data.get("dim", 1)
        p = lambda s: sp_parse(s, dim)
        return cls(
            q=data["q"],
            N=data["N"],
            i=data["i"],
            gamma=tuple(p(s) for s in data["gamma"]),
            homogeneous=tuple(p(s) for s in data["homogeneous"]),
            cross=tuple(tuple(p(s) for s in r) for r in data["cross"]),
            source=tuple(tuple(p(s) for s in r) for r in data["source"]),
        )


@dataclass(frozen=True)
class ClosedFds:
    """Recurrence with equilibria substituted.

    ``coeffs[j][c]`` acts on conserved moment ``c + 1`` at lag ``j``.
    """

    q: int
    N: int
    i: int
    coeffs: tuple[Row, ...]

    @property
    def depth(self) -> int:
        return len(self.coeffs)

    @property
    def dim(self) -> int:
        return self.coeffs[0][0].dim

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "N": self.N,
            "i": self.i,
            "dim": self.dim,
            "coeffs": [[e.to_text() for e in r] for r in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> ClosedFds:
        dim = data.get("dim", 1)
        return cls(data["q"], data["N"], data["i"],
                   tuple(tuple(sp_parse(s, dim) for s in r) for r in data["coeffs"]))

    def fingerprint(self) -> str:
        return fingerprint(self.to_json())


def fingerprint(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def splitting_indices(q: int, N: int, i: int) -> tuple[int, ...]:
    """0-based index set {i} U {N+1..q} for 1-based conserved index i."""
    return (i - 1,) + tuple(range(N, q))


def fds_from_matrices(A: OpMatrix, B: OpMatrix, N: int, i: int = 1,
                      keep: Optional[Iterable[int]] = None) -> Fds:
    """Derive the multi-step scheme from collision matrices.

    ``keep`` (0-based) overrides the canonical splitting; it must contain
    ``i - 1`` and every non-conserved index.
    """
    q, dim = A.q, A.dim
    if not 1 <= i <= N:
        raise FdsError(f"conserved index i={i} outside 1..{N}")
    if not 1 <= N < q:
        raise FdsError(f"need 1 <= N < q, got N={N}, q={q}")
    keep = tuple(sorted(set(keep))) if keep is not None else splitting_indices(q, N, i)
    if i - 1 not in keep or not set(range(N, q)) <= set(keep):
        raise FdsError(f"splitting {keep} must contain i and all non-conserved indices")

    Ai = mat_restrict(A, keep)
    Adia = A - Ai
    chi = mat_charpoly(Ai)
    extra = q - len(keep)
    # chi_{A_i} = X^extra * gamma(X): the low coefficients must vanish
    if any(not chi[k].is_zero() for k in range(extra)):
        raise FdsError("characteristic polynomial of the restricted matrix lacks the expected X power")
    gamma = tuple(chi.coeffs[extra:])
    p = len(gamma) - 1
    depth = p  # lags 0..p-1 == 0..q-N for the canonical splitting

    powers = [OpMatrix.identity(q, dim)]
    for _ in range(1, depth):
        powers.append(mat_mul(powers[-1], Ai))

    r = i - 1
    homogeneous, cross, source = [], [], []
    for j in range(depth):
        homogeneous.append(-gamma[p - 1 - j])
        # row r of P_j = sum_l gamma_{p+l-j} A_i^l
        Pj_row = [ShiftPoly.zero(dim)] * q
        for l in range(j + 1):
            g = gamma[p + l - j]
            if g:
                Pj_row = [a + g * b for a, b in zip(Pj_row, powers[l].row(r))]
        source.append(_row_times(Pj_row, B))
        if N > 1:
            cross.append(_row_times(Pj_row, Adia))
    return Fds(q, N, i, gamma, tuple(homogeneous), tuple(cross), tuple(source))


def _row_times(row: Sequence[ShiftPoly], M: OpMatrix) -> Row:
    dim = M.dim
    out = []
    for c in range(M.q):
        acc = ShiftPoly.zero(dim)
        for k, a in enumerate(row):
            if a and M[k, c]:
                acc = acc + a * M[k, c]
        out.append(acc)
    return tuple(out)


def fds_from_lbs(spec, i: int = 1, keep: Optional[Iterable[int]] = None) -> Fds:
    A, B = spec.collision_matrices()
    return fds_from_matrices(A, B, spec.N, i, keep)


def fds_close(f: Fds, E_eq) -> ClosedFds:
    """Substitute linear equilibria ``m_eq = E_eq m_cons`` into ``f``."""
    E = tuple(tuple(to_fraction(v) for v in r) for r in E_eq)
    if len(E) != f.q or any(len(r) != f.N for r in E):
        raise FdsError(f"equilibria must be {f.q}x{f.N}")
    for k in range(f.N):
        if E[k] != tuple(Fraction(int(k == c)) for c in range(f.N)):
            raise FdsError(f"equilibrium row {k + 1} must reproduce conserved moment {k + 1}")
    dim = f.dim
    if any(r[c] for r in f.cross for c in range(f.N, f.q)):
        raise FdsError("cross term reaches non-conserved moments; splitting is not admissible")
    coeffs = []
    for j in range(f.depth):
        row = []
        for c in range(f.N):
            acc = f.homogeneous[j] if c == f.i - 1 else ShiftPoly.zero(dim)
            if f.cross:
                acc = acc + f.cross[j][c]
            for r in range(f.q):
                if E[r][c] and f.source[j][r]:
                    acc = acc + f.source[j][r].scale(E[r][c])
            row.append(acc)
        coeffs.append(tuple(row))
    return ClosedFds(f.q, f.N, f.i, tuple(coeffs))


def closed_from_lbs(spec, i: int = 1) -> ClosedFds:
    if spec.equilibria is None:
        raise FdsError("scheme has no equilibria to close the recurrence")
    return fds_close(fds_from_lbs(spec, i), spec.equilibria)


@dataclass(frozen=True)
class FdsDiff:
    component: str
    lhs: str
    rhs: str


def _components(f) -> list[tuple[str, ShiftPoly]]:
    if isinstance(f, ClosedFds):
        return [(f"coeffs[lag={j}][m{c + 1}]", e) for j, r in enumerate(f.coeffs) for c, e in enumerate(r)]
    p = len(f.gamma) - 1
    out = []
    # lag order: gamma_{p-1} pairs with lag 0, so list gammas top-down
    for k in range(p, -1, -1):
        out.append((f"gamma[{k}]", f.gamma[k]))
    for j, h in enumerate(f.homogeneous):
        out.append((f"homogeneous[lag={j}]", h))
    for j, r in enumerate(f.cross):
        out.extend((f"cross[lag={j}][{c + 1}]", e) for c, e in enumerate(r))
    for j, r in enumerate(f.source):
        out.extend((f"source[lag={j}][{c + 1}]", e) for c, e in enumerate(r))
    return out


def fds_equal(f1, f2) -> tuple[bool, list[FdsDiff]]:
    """Structural comparison; the diff lists every differing component in order."""
    if type(f1) is not type(f2):
        raise FdsError("cannot compare an Fds with a ClosedFds")
    if (f1.q, f1.N, f1.i) != (f2.q, f2.N, f2.i) or f1.depth != f2.depth:
        raise FdsError(f"incomparable shapes: (q,N,i,depth)=({f1.q},{f1.N},{f1.i},{f1.depth}) "
                       f"vs ({f2.q},{f2.N},{f2.i},{f2.depth})")
    diffs = [FdsDiff(name, a.to_text(), b.to_text())
             for (name, a), (_, b) in zip(_components(f1), _components(f2)) if a != b]
    return not diffs, diffs


def _as_history_level(level, N: int, dim: int) -> np.ndarray:
    arr = np.asarray(level, dtype=object)
    if N == 1 and arr.ndim == dim:
        arr = arr[np.newaxis]
    if arr.ndim != dim + 1 or arr.shape[0] != N:
        raise FdsError(f"history level has shape {arr.shape}, expected ({N}, grid...)")
    return arr


def fds_apply(f: ClosedFds, history: Sequence) -> np.ndarray:
    """Next field of moment ``i``.

    ``history[-1]`` is level ``n``, ``history[-1-j]`` level ``n-j``.  Each
    entry is an ``N x grid`` array; for ``N = 1`` a bare grid function works.
    """
    if len(history) < f.depth:
        raise FdsError(f"need {f.depth} history levels, got {len(history)}")
    levels = [_as_history_level(h, f.N, f.dim) for h in history[-f.depth:]]
    shape = levels[-1].shape[1:]
    out = np.full(shape, Fraction(0), dtype=object)
    for j, row in enumerate(f.coeffs):
        lvl = levels[-1 - j]
        for c, op in enumerate(row):
            if op:
                out = out + op.apply(lvl[c])
    return out
