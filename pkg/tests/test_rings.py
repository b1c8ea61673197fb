import numpy as np
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conormal.rings import (
    BlockRing,
    GradedRing,
    Polynomial,
    ScrollRing,
    binomial,
    multiply,
    p1_cohomology,
    partial_derivative,
    product_table,
)

P = 1073741789


def to_sympy(poly, syms):
    return sum(c * sympy.prod([s ** k for s, k in zip(syms, e)]) for e, c in poly.terms.items())


def poly_strategy(ring, d):
    basis = ring.degree_basis(d)
    return st.lists(st.integers(-20, 20), min_size=len(basis), max_size=len(basis)).map(
        lambda cs: Polynomial(ring, dict(zip(basis, cs))))


R3 = GradedRing.standard(3)
R5 = GradedRing.standard(5)


def test_degree_basis_two_variables():
    R = GradedRing.standard(2)
    assert R.degree_basis(2) == [(2, 0), (1, 1), (0, 2)]


def test_basis_sizes_are_binomials():
    for n in range(1, 6):
        R = GradedRing.standard(n)
        for d in range(0, 6):
            assert R.basis_size(d) == binomial(n + d - 1, d)


def test_scroll_ring_bases():
    R = ScrollRing((2, 1))
    got = R.degree_basis((1, 0))
    # y1 times degree-2 monomials in t, y2 times degree-1 monomials
    assert len(got) == 5 == R.f + R.d
    assert sum(1 for e in got if e[0] == 1) == 3
    assert ScrollRing((1, 1, 1)).basis_size((0, -1)) == 0


def test_scroll_ring_matches_p1_cohomology():
    for e in ((2, 1), (1, 1, 1), (2, 2, 1), (3, 1)):
        R = ScrollRing(e)
        for a in range(0, 6):
            for b in range(-6, 7):
                assert R.basis_size((a, b)) == p1_cohomology(R.weights(a, b))[0]


def test_p1_cohomology_small():
    assert p1_cohomology([0]) == (1, 0)
    assert p1_cohomology([-2]) == (0, 1)
    assert p1_cohomology([-1, -1]) == (0, 0)
    assert p1_cohomology([-5]) == (0, 4)


def test_p1_cohomology_cubic_symmetric_power():
    # S^3 of O(2)+O(1) is O(6)+O(5)+O(4)+O(3); twisted by -1 the summands are 5,4,3,2
    R = ScrollRing((2, 1))
    assert sorted(R.weights(3, -1)) == [2, 3, 4, 5]
    assert p1_cohomology([5, 4, 3, 2]) == (18, 0)
    assert R.basis_size((3, -1)) == 18


def test_block_ring():
    R = BlockRing((2, 3))
    # bidegree (1,1): 2*3 monomials
    assert R.basis_size((1, 1)) == 6


def test_product_table_is_multiplication():
    R = R3
    table = product_table(R, 1, 2)
    b1, b2, b3 = R.degree_basis(1), R.degree_basis(2), R.degree_basis(3)
    for i, a in enumerate(b1):
        for j, b in enumerate(b2):
            assert b3[table[i, j]] == tuple(x + y for x, y in zip(a, b))


def test_euler_identity_random_cubics():
    rng = np.random.default_rng(0)
    for _ in range(100):
        f = R5.random_form(3, rng)
        lhs = R5.zero()
        for j in range(5):
            lhs = lhs + R5.var(j) * f.derivative(j)
        assert lhs == f.scale(3)


@given(poly_strategy(R3, 2), poly_strategy(R3, 3))
def test_multiply_matches_sympy(f, g):
    syms = sympy.symbols("a b c")
    assert sympy.expand(to_sympy(multiply(f, g), syms) - to_sympy(f, syms) * to_sympy(g, syms)) == 0


@given(poly_strategy(R3, 2), poly_strategy(R3, 2), st.integers(0, 2))
def test_leibniz(f, g, i):
    lhs = partial_derivative(f * g, i)
    rhs = partial_derivative(f, i) * g + f * partial_derivative(g, i)
    assert lhs == rhs


@given(poly_strategy(R3, 3), st.integers(0, 2))
def test_derivative_matches_sympy(f, i):
    syms = sympy.symbols("a b c")
    assert sympy.expand(to_sympy(f.derivative(i), syms) - sympy.diff(to_sympy(f, syms), syms[i])) == 0


@given(poly_strategy(R3, 2))
def test_vector_round_trip(f):
    v = f.to_vector(2, P)
    assert R3.from_vector(2, v) == Polynomial(R3, {e: c % P for e, c in f.terms.items()})
