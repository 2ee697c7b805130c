"""Square matrices over the shift-operator ring.

Characteristic polynomials use the Berkowitz algorithm, which needs no
division and therefore works over any commutative ring.  Determinants are
also available by plain cofactor expansion, an independent route used to
cross-check the constant coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .shiftring import ShiftPoly, RationalLike, sp_parse, to_fraction


class OpMatrix:
    """Immutable q x q matrix with ShiftPoly entries of a common dimension."""

    __slots__ = ("_rows", "_q", "_dim")

    def __init__(self, rows: Sequence[Sequence], dim: int | None = None):
        rows = [list(r) for r in rows]
        q = len(rows)
        if q == 0 or any(len(r) != q for r in rows):
            raise ValueError("OpMatrix must be square and non-empty")
        if dim is None:
            dims = {e.dim for r in rows for e in r if isinstance(e, ShiftPoly)}
            if len(dims) > 1:
                raise ValueError(f"entries have mixed dimensions {sorted(dims)}")
            dim = dims.pop() if dims else 1
        conv = []
        for r in rows:
            out = []
            for e in r:
                if isinstance(e, ShiftPoly):
                    if e.dim != dim:
                        raise ValueError(f"entry dimension {e.dim} != {dim}")
                    out.append(e)
                else:
                    out.append(ShiftPoly.const(to_fraction(e), dim))
            conv.append(tuple(out))
        self._rows = tuple(conv)
        self._q = q
        self._dim = dim

    @classmethod
    def zeros(cls, q: int, dim: int = 1) -> OpMatrix:
        z = ShiftPoly.zero(dim)
        return cls([[z] * q for _ in range(q)], dim)

    @classmethod
    def identity(cls, q: int, dim: int = 1) -> OpMatrix:
        return cls.diag([ShiftPoly.one(dim)] * q, dim)

    @classmethod
    def diag(cls, entries: Sequence, dim: int | None = None) -> OpMatrix:
        entries = list(entries)
        if dim is None:
            dim = next((e.dim for e in entries if isinstance(e, ShiftPoly)), 1)
        q = len(entries)
        z = ShiftPoly.zero(dim)
        rows = [[entries[i] if i == j else z for j in range(q)] for i in range(q)]
        return cls(rows, dim)

    @classmethod
    def from_rational(cls, rows: Sequence[Sequence[RationalLike]], dim: int = 1) -> OpMatrix:
        return cls([[ShiftPoly.const(to_fraction(v), dim) for v in r] for r in rows], dim)

    @property
    def q(self) -> int:
        return self._q

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def rows(self) -> tuple[tuple[ShiftPoly, ...], ...]:
        return self._rows

    def __getitem__(self, idx) -> ShiftPoly:
        r, c = idx
        return self._rows[r][c]

    def row(self, r: int) -> tuple[ShiftPoly, ...]:
        return self._rows[r]

    def _check(self, other: OpMatrix):
        if not isinstance(other, OpMatrix):
            raise TypeError("expected an OpMatrix")
        if other._q != self._q:
            raise ValueError(f"size mismatch: {self._q} vs {other._q}")
        if other._dim != self._dim:
            raise ValueError(f"dimension mismatch: {self._dim} vs {other._dim}")

    def __add__(self, other: OpMatrix) -> OpMatrix:
        self._check(other)
        return OpMatrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)], self._dim)

    def __sub__(self, other: OpMatrix) -> OpMatrix:
        self._check(other)
        return OpMatrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)], self._dim)

    def __neg__(self) -> OpMatrix:
        return OpMatrix([[-a for a in r] for r in self._rows], self._dim)

    def __matmul__(self, other: OpMatrix) -> OpMatrix:
        return mat_mul(self, other)

    def scale(self, c) -> OpMatrix:
        if not isinstance(c, ShiftPoly):
            c = ShiftPoly.const(to_fraction(c), self._dim)
        return OpMatrix([[c * a for a in r] for r in self._rows], self._dim)

    def trace(self) -> ShiftPoly:
        total = ShiftPoly.zero(self._dim)
        for i in range(self._q):
            total = total + self._rows[i][i]
        return total

    def power(self, k: int) -> OpMatrix:
        out = OpMatrix.identity(self._q, self._dim)
        for _ in range(k):
            out = out @ self
        return out

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self._rows for e in r)

    def reach(self) -> int:
        return max(e.reach() for r in self._rows for e in r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return self._dim == other._dim and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._dim, self._rows))

    def to_text(self) -> list[list[str]]:
        return [[e.to_text() for e in r] for r in self._rows]

    @classmethod
    def from_text(cls, rows: Sequence[Sequence[str]], dim: int | None = None) -> OpMatrix:
        parsed = [[sp_parse(s, dim) for s in r] for r in rows]
        if dim is None:
            nonzero = [e.dim for r in parsed for e in r if not e.is_zero()]
            dim = nonzero[0] if nonzero else 1
            parsed = [[e if not e.is_zero() else ShiftPoly.zero(dim) for e in r] for r in parsed]
        return cls(parsed, dim)

    def __repr__(self) -> str:
        body = ",\n ".join("[" + ", ".join(e.to_text() for e in r) + "]" for r in self._rows)
        return f"OpMatrix(\n[{body}])"


@dataclass(frozen=True)
class CharPoly:
    """Monic characteristic polynomial det(X I - A); coeffs[k] multiplies X**k."""

    coeffs: tuple[ShiftPoly, ...]

    def __post_init__(self):
        if not self.coeffs or self.coeffs[-1] != ShiftPoly.one(self.coeffs[-1].dim):
            raise ValueError("characteristic polynomial must be monic")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def dim(self) -> int:
        return self.coeffs[0].dim

    def __getitem__(self, k: int) -> ShiftPoly:
        return self.coeffs[k]

    def __len__(self) -> int:
        return len(self.coeffs)

    def to_text(self) -> list[str]:
        return [c.to_text() for c in self.coeffs]


def mat_mul(A: OpMatrix, B: OpMatrix) -> OpMatrix:
    A._check(B)
    q, dim = A.q, A.dim
    cols = list(zip(*B.rows))
    out = []
    for r in A.rows:
        row = []
        for c in cols:
            acc = ShiftPoly.zero(dim)
            for a, b in zip(r, c):
                if a and b:
                    acc = acc + a * b
            row.append(acc)
        out.append(row)
    return OpMatrix(out, dim)


def mat_restrict(A: OpMatrix, keep: Iterable[int]) -> OpMatrix:
    """Zero every entry whose row or column index (0-based) is outside ``keep``."""
    keep = set(keep)
    if not keep:
        raise ValueError("keep set must be non-empty")
    if not keep <= set(range(A.q)):
        raise ValueError(f"keep indices {sorted(keep)} out of range for q={A.q}")
    z = ShiftPoly.zero(A.dim)
    rows = [[A[r, c] if (r in keep and c in keep) else z for c in range(A.q)] for r in range(A.q)]
    return OpMatrix(rows, A.dim)


def mat_det(A: OpMatrix) -> ShiftPoly:
    """Determinant by Laplace expansion along the first row."""
    return _cofactor_det([list(r) for r in A.rows], A.dim)


def _cofactor_det(rows: list[list[ShiftPoly]], dim: int) -> ShiftPoly:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = ShiftPoly.zero(dim)
    for j, a in enumerate(rows[0]):
        if not a:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = a * _cofactor_det(minor, dim)
        total = total + term if j % 2 == 0 else total - term
    return total


def mat_charpoly(A: OpMatrix) -> CharPoly:
    """Berkowitz algorithm; returns coefficients of det(X I - A), monic."""
    q, dim = A.q, A.dim
    zero, one = ShiftPoly.zero(dim), ShiftPoly.one(dim)
    a = A.rows
    # poly holds coefficients highest-degree first for the leading r x r block
    poly = [one, -a[0][0]]
    for r in range(1, q):
        R = [a[r][j] for j in range(r)]          # row r, columns < r
        C = [a[i][r] for i in range(r)]          # column r, rows < r
        Asub = [list(a[i][:r]) for i in range(r)]
        # Toeplitz column: 1, -a_rr, -R C, -R A C, -R A^2 C, ...
        col = [one, -a[r][r]]
        vec = C
        for _ in range(r):
            dot = zero
            for x, y in zip(R, vec):
                if x and y:
                    dot = dot + x * y
            col.append(-dot)
            vec = [sum((Asub[i][k] * vec[k] for k in range(r) if Asub[i][k] and vec[k]), zero) for i in range(r)]
        # multiply lower-triangular Toeplitz (r+2) x (r+1) by poly
        new = []
        for i in range(r + 2):
            acc = zero
            for k in range(min(i, r) + 1):
                if col[i - k] and poly[k]:
                    acc = acc + col[i - k] * poly[k]
            new.append(acc)
        poly = new
    return CharPoly(tuple(reversed(poly)))


def mat_eval_charpoly(p: CharPoly, A: OpMatrix) -> OpMatrix:
    """Horner evaluation of sum_k p[k] A^k."""
    if p.degree != A.q:
        raise ValueError(f"polynomial degree {p.degree} does not match matrix size {A.q}")
    I = OpMatrix.identity(A.q, A.dim)
    acc = I.scale(p.coeffs[-1])
    for c in reversed(p.coeffs[:-1]):
        acc = mat_mul(acc, A) + I.scale(c)
    return acc


def mat_symbol(A: OpMatrix, theta) -> np.ndarray:
    return np.array([[e.symbol(theta) for e in r] for r in A.rows], dtype=complex)


def poly_from_roots(roots: Sequence[ShiftPoly]) -> CharPoly:
    """Expand prod_j (X - r_j) by repeated multiplication."""
    dim = roots[0].dim
    coeffs = [ShiftPoly.one(dim)]  # lowest degree first
    for r in roots:
        shifted = [ShiftPoly.zero(dim)] + coeffs
        scaled = [-r * c for c in coeffs] + [ShiftPoly.zero(dim)]
        coeffs = [a + b for a, b in zip(shifted, scaled)]
    return CharPoly(tuple(coeffs))


# Rational matrices (moment matrices) ------------------------------------------

def rational_matrix(rows: Sequence[Sequence[RationalLike]]) -> tuple[tuple[Fraction, ...], ...]:
    out = tuple(tuple(to_fraction(v) for v in r) for r in rows)
    if not out or any(len(r) != len(out) for r in out):
        raise ValueError("matrix must be square and non-empty")
    return out


def rational_inverse(M: Sequence[Sequence[RationalLike]]) -> tuple[tuple[Fraction, ...], ...]:
    """Exact Gauss-Jordan inverse.  Raises ValueError if singular."""
    M = rational_matrix(M)
    n = len(M)
    aug = [list(M[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ValueError("moment matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(r[n:]) for r in aug)


def rational_det(M: Sequence[Sequence[RationalLike]]) -> Fraction:
    M = [list(r) for r in rational_matrix(M)]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return det


def rational_matmul(A, B) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in zip(*B)) for r in A)
