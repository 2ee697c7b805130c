import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import strategies as st

from lbfds.opmatrix import OpMatrix, rational_det
from lbfds.scheme import LbsSpec
from lbfds.shiftring import ShiftPoly

X_SYM = sp.Symbol("x")


def rand_fraction(rng, lo=-3, hi=3, dens=(1, 2, 3)):
    return Fraction(rng.randint(lo, hi), rng.choice(dens))


def rand_nonzero_fraction(rng, **kw):
    while True:
        v = rand_fraction(rng, **kw)
        if v:
            return v


def rand_shiftpoly(rng, reach=1, nterms=2, dim=1):
    terms = {}
    for _ in range(nterms):
        z = tuple(rng.randint(-reach, reach) for _ in range(dim))
        terms[z] = rand_fraction(rng)
    return ShiftPoly(terms, dim)


def rand_opmatrix(rng, q=3, reach=1, nterms=2):
    return OpMatrix([[rand_shiftpoly(rng, reach, nterms) for _ in range(q)] for _ in range(q)])


def rand_invertible(rng, q):
    while True:
        M = [[rand_fraction(rng) for _ in range(q)] for _ in range(q)]
        if rational_det(M) != 0:
            return M


def rand_spec(rng, q, N=1, with_eq=True):
    M = rand_invertible(rng, q)
    vel = [rng.choice((-1, 0, 1)) for _ in range(q)]
    S = [0] * N + [rng.choice([Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)]) for _ in range(q - N)]
    eq = None
    if with_eq:
        eq = [[Fraction(int(r == c)) for c in range(N)] for r in range(N)]
        eq += [[rand_fraction(rng) for _ in range(N)] for _ in range(q - N)]
    return LbsSpec(M, vel, S, N, eq)


def to_sympy(p: ShiftPoly):
    """Oracle-side view of a 1D operator as a Laurent polynomial in x."""
    assert p.dim == 1
    return sp.Add(*[sp.Rational(c.numerator, c.denominator) * X_SYM ** z[0] for z, c in p.terms.items()])


def sympy_matrix(A: OpMatrix):
    return sp.Matrix([[to_sympy(e) for e in r] for r in A.rows])


def from_sympy(expr) -> ShiftPoly:
    expr = sp.expand(expr)
    terms = {}
    for term in sp.Add.make_args(expr):
        if term == 0:
            continue
        coeff, power = term.as_coeff_exponent(X_SYM)
        terms[(int(power),)] = Fraction(int(sp.numer(coeff)), int(sp.denom(coeff)))
    return ShiftPoly(terms, 1)


@pytest.fixture
def rng():
    return random.Random(20241016)


# hypothesis strategies

fractions_st = st.fractions(min_value=-4, max_value=4, max_denominator=4)


@st.composite
def shiftpolys(draw, dim=1, reach=2, max_terms=3):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        z = tuple(draw(st.integers(-reach, reach)) for _ in range(dim))
        terms[z] = draw(fractions_st)
    return ShiftPoly(terms, dim)


# acceptance criteria report ------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
