import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lbfds.shiftring import ShiftPoly, grid, sp_add, sp_apply, sp_mul, sp_parse, sp_shift, sp_symbol

from conftest import shiftpolys

x = sp_shift((1,))
xb = sp_shift((-1,))
one = ShiftPoly.one(1)
half = Fraction(1, 2)


def test_shift_monomials():
    assert sp_shift((0,)) == one
    assert x.terms == {(1,): 1}
    assert xb.terms == {(-1,): 1}


def test_shift_acts_by_reading_left_neighbour():
    f = grid([0, 1, 2, 3])
    # (x f)(j) = f(j - 1)
    assert list(sp_apply(x, f)) == [3, 0, 1, 2]
    assert list(sp_apply(xb, f)) == [1, 2, 3, 0]


def test_add_examples():
    assert sp_add(x, x.scale(-1)).is_zero()
    avg = sp_add(x.scale(half), xb.scale(half))
    assert avg.terms == {(1,): half, (-1,): half}
    assert (x + 1) + (xb - 1) == x + xb


def test_mul_examples():
    assert sp_mul(x, xb) == one
    assert sp_mul(x, x) == sp_shift((2,))
    avg = (x + xb).scale(half)
    expected = ShiftPoly({(2,): Fraction(1, 4), (0,): half, (-2,): Fraction(1, 4)})
    assert avg * avg == expected


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        x + sp_shift((0, 1))
    with pytest.raises(ValueError):
        x * sp_shift((0, 1))


def test_no_zero_coefficients_stored():
    p = ShiftPoly({(1,): 1, (2,): 0})
    assert p.terms == {(1,): 1}
    assert (x - x).terms == {}


def test_symbol_examples():
    assert sp_symbol(one, 0.7) == 1
    th = 0.3
    assert abs(sp_symbol(x, th) - cmath.exp(-1j * th)) < 1e-15
    assert abs(sp_symbol(xb, th) - cmath.exp(1j * th)) < 1e-15
    assert abs(sp_symbol((x + xb).scale(half), math.pi / 2)) < 1e-15


def test_apply_identity_and_delta():
    f = grid([Fraction(1, 3), 2, -1, 5])
    assert list(sp_apply(one, f)) == list(f)
    delta = grid([1, 0, 0, 0])
    assert list(sp_apply(x, delta)) == [0, 1, 0, 0]


def test_apply_plane_wave_matches_symbol():
    L, k = 8, 3
    th = 2 * math.pi * k / L
    wave = np.array([cmath.exp(1j * th * j) for j in range(L)])
    op = (x + xb).scale(half)
    # float path: the operator acting on a plane wave multiplies it by its symbol
    out = sum(float(c) * np.roll(wave, z[0]) for z, c in op.terms.items())
    np.testing.assert_allclose(out, sp_symbol(op, th) * wave, atol=1e-14)


def test_apply_2d():
    f = grid([[1, 0], [0, 0]])
    out = sp_apply(sp_shift((1, 0)), f)
    assert out.tolist() == [[0, 0], [1, 0]]


@pytest.mark.parametrize("text", ["0", "1*T[0]", "1/2*T[-1] + 1/2*T[1]", "-3/7*T[2,-1] + 5*T[0,0]"])
def test_text_round_trip(text):
    p = sp_parse(text)
    assert sp_parse(p.to_text(), p.dim) == p


def test_parse_rejects_garbage():
    for bad in ["", "x+1", "1*T[1] 2*T[0]", "1*T[1] + 1*T[0,1]"]:
        with pytest.raises(ValueError):
            sp_parse(bad)


def test_floats_refused():
    with pytest.raises(TypeError):
        ShiftPoly({(0,): 0.5})


@settings(max_examples=150, deadline=None)
@given(shiftpolys(), shiftpolys(), shiftpolys())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + ShiftPoly.zero() == a
    assert a * ShiftPoly.one() == a
    assert (a - a).is_zero()


@settings(max_examples=100, deadline=None)
@given(shiftpolys(), shiftpolys(), st.floats(-math.pi, math.pi))
def test_symbol_is_homomorphism(a, b, th):
    assert abs(sp_symbol(a * b, th) - sp_symbol(a, th) * sp_symbol(b, th)) <= 1e-12 * (1 + abs(sp_symbol(a * b, th)))
    assert abs(sp_symbol(a + b, th) - sp_symbol(a, th) - sp_symbol(b, th)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(shiftpolys(), shiftpolys(), st.lists(st.fractions(-3, 3, max_denominator=5), min_size=1, max_size=7))
def test_apply_is_action(a, b, values):
    f = grid(values)
    assert list(sp_apply(a * b, f)) == list(sp_apply(a, sp_apply(b, f)))


@settings(max_examples=60, deadline=None)
@given(shiftpolys(), shiftpolys(), shiftpolys())
def test_canonical_form_independent_of_order(a, b, c):
    left = (c * b) + (a * b)
    right = b * (a + c)
    assert left.terms == right.terms
    assert hash(left) == hash(right)
