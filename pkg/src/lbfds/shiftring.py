"""Exact arithmetic in the ring of finite difference operators.

An operator is a Laurent polynomial in ``d`` shift variables with rational
coefficients.  The monomial ``T[z]`` acts on lattice functions by
``(T[z] f)(x) = f(x - z)``, so ``T[1]`` reads the left neighbour and
``T[-1]`` the right one.
"""

from __future__ import annotations

import cmath
import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

Offset = tuple[int, ...]
RationalLike = Union[int, Fraction, str]


_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def to_fraction(value: RationalLike) -> Fraction:
    """Exact conversion of ints, Fractions and ``"p/q"`` strings.

    Floats are refused: every number entering the toolkit must be exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RATIONAL.match(value.strip()):
            raise ValueError(f"rational literals are written p or p/q, got {value!r}")
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_fraction(value: Fraction) -> str:
    return str(value)


def _as_offset(z, dim: int | None = None) -> Offset:
    if isinstance(z, (int, np.integer)):
        off = (int(z),)
    else:
        off = tuple(int(v) for v in z)
    if dim is not None and len(off) != dim:
        raise ValueError(f"offset {off} does not have length {dim}")
    return off


class ShiftPoly:
    """Immutable finite difference operator with exact rational coefficients."""

    __slots__ = ("_dim", "_terms", "_hash")

    def __init__(self, terms: Mapping[Offset, RationalLike] | None = None, dim: int = 1):
        if dim < 1:
            raise ValueError("dimension must be positive")
        clean: dict[Offset, Fraction] = {}
        for z, c in (terms or {}).items():
            off = _as_offset(z, dim)
            c = to_fraction(c)
            if c:
                clean[off] = clean.get(off, Fraction(0)) + c
                if not clean[off]:
                    del clean[off]
        self._dim = dim
        self._terms = clean
        self._hash = None

    # constructors

    @classmethod
    def zero(cls, dim: int = 1) -> ShiftPoly:
        return cls({}, dim)

    @classmethod
    def one(cls, dim: int = 1) -> ShiftPoly:
        return cls({(0,) * dim: 1}, dim)

    @classmethod
    def const(cls, c: RationalLike, dim: int = 1) -> ShiftPoly:
        return cls({(0,) * dim: c}, dim)

    @classmethod
    def shift(cls, z, coeff: RationalLike = 1) -> ShiftPoly:
        off = _as_offset(z)
        return cls({off: coeff}, len(off))

    # accessors

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def terms(self) -> dict[Offset, Fraction]:
        return dict(self._terms)

    def coeff(self, z) -> Fraction:
        return self._terms.get(_as_offset(z, self._dim), Fraction(0))

    def support(self) -> list[Offset]:
        return sorted(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(z) for z in self._terms)

    def reach(self) -> int:
        """Largest absolute offset component (stencil half-width)."""
        return max((abs(v) for z in self._terms for v in z), default=0)

    # ring operations

    def _coerce(self, other) -> ShiftPoly:
        if isinstance(other, ShiftPoly):
            if other._dim != self._dim:
                raise ValueError(f"dimension mismatch: {self._dim} vs {other._dim}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return ShiftPoly.const(other, self._dim)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for z, c in other._terms.items():
            v = out.get(z, 0) + c
            if v:
                out[z] = v
            else:
                out.pop(z, None)
        return ShiftPoly._raw(out, self._dim)

    __radd__ = __add__

    def __neg__(self) -> ShiftPoly:
        return ShiftPoly._raw({z: -c for z, c in self._terms.items()}, self._dim)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Offset, Fraction] = {}
        for za, ca in self._terms.items():
            for zb, cb in other._terms.items():
                z = tuple(a + b for a, b in zip(za, zb))
                out[z] = out.get(z, 0) + ca * cb
        return ShiftPoly._raw({z: c for z, c in out.items() if c}, self._dim)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> ShiftPoly:
        if n < 0:
            raise ValueError("negative powers are only defined for monomials; use reflect()")
        result = ShiftPoly.one(self._dim)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: RationalLike) -> ShiftPoly:
        c = to_fraction(c)
        if not c:
            return ShiftPoly.zero(self._dim)
        return ShiftPoly._raw({z: v * c for z, v in self._terms.items()}, self._dim)

    def reflect(self) -> ShiftPoly:
        """Map every offset z to -z (the bar involution)."""
        return ShiftPoly._raw({tuple(-v for v in z): c for z, c in self._terms.items()}, self._dim)

    @classmethod
    def _raw(cls, terms: dict[Offset, Fraction], dim: int) -> ShiftPoly:
        obj = cls.__new__(cls)
        obj._dim = dim
        obj._terms = terms
        obj._hash = None
        return obj

    # comparison

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = ShiftPoly.const(other, self._dim)
        if not isinstance(other, ShiftPoly):
            return NotImplemented
        return self._dim == other._dim and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._dim, frozenset(self._terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    # evaluation

    def symbol(self, theta) -> complex:
        """Fourier symbol: each shift T[z] becomes exp(-i theta.z)."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if th.shape != (self._dim,):
            raise ValueError(f"theta must have length {self._dim}")
        total = 0j
        for z, c in self._terms.items():
            total += float(c) * cmath.exp(-1j * float(np.dot(th, z)))
        return total

    def apply(self, f) -> np.ndarray:
        """Apply to a periodic grid function (object array of Fractions)."""
        arr = np.asarray(f, dtype=object)
        if arr.ndim != self._dim:
            raise ValueError(f"grid function has {arr.ndim} axes, operator dimension is {self._dim}")
        if any(n < 1 for n in arr.shape):
            raise ValueError("grid must have at least one node per axis")
        out = np.full(arr.shape, Fraction(0), dtype=object)
        axes = tuple(range(self._dim))
        for z, c in self._terms.items():
            out = out + c * np.roll(arr, z, axis=axes)
        return out

    # text form

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for z in sorted(self._terms):
            parts.append(f"{self._terms[z]}*T[{','.join(str(v) for v in z)}]")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"ShiftPoly({self.to_text()!r}, dim={self._dim})"


_TERM = re.compile(r"([+-]*)(\d+(?:/\d+)?)\*T\[(-?\d+(?:,-?\d+)*)\]")


def sp_parse(text: str, dim: int | None = None) -> ShiftPoly:
    """Parse the ``coeff*T[z1,...,zd]`` text form.  ``"0"`` needs ``dim``."""
    s = re.sub(r"\s+", "", text)
    if s in ("0", "-0", "+0"):
        return ShiftPoly.zero(dim or 1)
    if not s:
        raise ValueError("empty operator text")
    terms: dict[Offset, Fraction] = {}
    pos = 0
    found_dim = None
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or (pos > 0 and not m.group(1)):
            raise ValueError(f"cannot parse operator text at {s[pos:]!r}")
        sign = -1 if m.group(1).count("-") % 2 else 1
        off = tuple(int(v) for v in m.group(3).split(","))
        if found_dim is None:
            found_dim = len(off)
        elif len(off) != found_dim:
            raise ValueError("inconsistent offset lengths in operator text")
        terms[off] = terms.get(off, Fraction(0)) + sign * Fraction(m.group(2))
        pos = m.end()
    if dim is not None and found_dim != dim:
        raise ValueError(f"operator has dimension {found_dim}, expected {dim}")
    return ShiftPoly(terms, found_dim)


# Functional names used throughout the docs and tests.

def sp_shift(z) -> ShiftPoly:
    return ShiftPoly.shift(z)


def sp_add(a: ShiftPoly, b: ShiftPoly) -> ShiftPoly:
    return a + b


def sp_mul(a: ShiftPoly, b: ShiftPoly) -> ShiftPoly:
    return a * b


def sp_symbol(a: ShiftPoly, theta) -> complex:
    return a.symbol(theta)


def sp_apply(a: ShiftPoly, f) -> np.ndarray:
    return a.apply(f)


def sp_sum(items: Iterable[ShiftPoly], dim: int = 1) -> ShiftPoly:
    total = ShiftPoly.zero(dim)
    for it in items:
        total = total + it
    return total


def grid(values: Sequence) -> np.ndarray:
    """Object array of Fractions from nested sequences of exact rationals."""
    arr = np.asarray(values, dtype=object)
    return np.vectorize(to_fraction, otypes=[object])(arr) if arr.size else arr
