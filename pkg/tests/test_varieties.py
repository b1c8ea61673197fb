from math import comb

import numpy as np
import pytest

from conormal.ideals import coordinate_piece, generator_counts, ideal_piece, minimal_generators, r1_kernel
from conormal.rings import GradedRing, Polynomial
from conormal.varieties import catalog
from conormal.varieties.base import Degenerate
from conormal.varieties.catalog import complete_intersection_from_forms, hilbert_check
from conormal.varieties.points import FAIL, PASS, smoothness_spot_check, vanishes_at
from conormal.varieties.scrolls import (
    chi_J_3H,
    check_pentagonal,
    pentagonal_invariants,
    scroll_cohomology,
)

P = 1073741789


@pytest.fixture(scope="module")
def twisted_cubic():
    return catalog.veronese(1, 3)


@pytest.fixture(scope="module")
def genus4():
    return catalog.genus4_canonical()


@pytest.mark.parametrize("n,r", [(1, 2), (1, 3), (1, 4), (2, 2), (2, 3)])
def test_veronese_hilbert_function(n, r):
    X = catalog.veronese(n, r)
    M = X.model(P)
    N1 = comb(n + r, n)
    for k in range(0, 4):
        # sections of O(kr) on P^n
        assert M.a_dim(k) == comb(n + k * r, n)
        assert M.ideal_dim(k) + M.a_dim(k) == comb(N1 - 1 + k, k)


@pytest.mark.parametrize("n,r,i2", [(1, 2, 1), (1, 3, 3), (2, 2, 6)])
def test_veronese_quadrics(n, r, i2):
    assert ideal_piece(catalog.veronese(n, r), 2).dim == i2


@pytest.mark.parametrize("n,m,i2", [(1, 1, 1), (1, 2, 3), (2, 2, 9)])
def test_segre_minors(n, m, i2):
    X = catalog.segre(n, m)
    assert X.N + 1 == (n + 1) * (m + 1)
    assert ideal_piece(X, 2).dim == i2 == comb(n + 1, 2) * comb(m + 1, 2)


def test_scrolls():
    assert ideal_piece(catalog.scroll((1, 1)), 2).dim == 1
    assert ideal_piece(catalog.scroll((2, 1)), 2).dim == 3
    X = catalog.scroll((2, 2, 1))
    assert X.N == 7
    # A_2 = h0(S^2 E) = sum over the weights of S^2(O(2)+O(2)+O(1)) of (w + 1)
    weights = [4, 4, 4, 3, 3, 2]
    assert X.model(P).a_dim(2) == sum(w + 1 for w in weights)


def test_complete_intersections(genus4):
    assert genus4.genus == 4
    assert ideal_piece(genus4, 2).dim == 1
    assert ideal_piece(genus4, 3).dim == 5
    assert generator_counts(minimal_generators(genus4, 3)) == {2: 1, 3: 1}
    g5 = catalog.genus5_canonical()
    assert g5.genus == 5 and ideal_piece(g5, 2).dim == 3


def test_koszul_hilbert_for_plane_septic():
    h = catalog.koszul_hilbert(2, [7])
    assert h(7) == comb(9, 2) - 1


def test_plane_canonical_dimensions():
    X = catalog.plane_curve_canonical(5)
    assert X.genus == 6 and X.N + 1 == 6
    assert ideal_piece(X, 2).dim == 6
    assert not hilbert_check(X, range(1, 4))


@pytest.mark.slow
def test_plane_septic_dimensions():
    X = catalog.plane_curve_canonical(7)
    M = X.model(P)
    assert X.genus == 15 and M.a_dim(1) == 15
    assert M.a_dim(2) == 42 and M.ideal_dim(2) == 78


def test_tetragonal_dimensions():
    X = catalog.tetragonal_curve((2, 1, 1), 1, 1)
    assert X.genus == 7 and X.N == 6 and X.model(P).a_dim(2) == 18
    Y = catalog.tetragonal_curve((2, 2, 1), 1, 2)
    assert Y.genus == 8 and ideal_piece(Y, 2).dim == 15
    Z = catalog.tetragonal_curve((2, 1, 1), 0, 2)
    assert Z.genus == 7


def test_pentagonal_invariants_and_chi():
    e8, b8 = pentagonal_invariants(8)
    assert e8 == (1, 1, 1, 1)
    assert sorted(check_pentagonal(e8, b8)) == [0, 1, 1, 1, 1]
    e9, b9 = pentagonal_invariants(9)
    assert e9 == (2, 1, 1, 1)
    assert sorted(check_pentagonal(e9, b9)) == [1, 1, 1, 1, 2]
    for g, want in ((8, 45), (9, 55)):
        X = catalog.pentagonal_curve(g=g)
        assert X.genus == g
        assert chi_J_3H(X.data) == want == 10 * g - 35
        assert X.model(P).a_dim(1) == g
        # h0(O_X(H)) on the scroll is f + 4 = g; negative twists -1..-3 are acyclic
        assert scroll_cohomology(X.data, 0, 1, 0) == g
        assert all(scroll_cohomology(X.data, i, -2, 0) == 0 for i in range(5))


def test_unsupported_pentagonal_genus():
    with pytest.raises(ValueError):
        catalog.pentagonal_curve(g=10)


def test_g25():
    X = catalog.grassmannian_g25()
    M = X.model(P)
    assert M.a_dim(1) == 10 and M.a_dim(2) == 50
    assert generator_counts(minimal_generators(X, 3)) == {2: 5}


def test_g25_symbolic_matches_points():
    A = catalog.grassmannian_g25("points").model(P)
    B = catalog.grassmannian_g25("symbolic").model(P)
    for k in (2, 3):
        assert A.ideal(k) == B.ideal(k)


def test_twisted_cubic_symbolic_matches_points(twisted_cubic):
    # the canonical ideal pieces are representation independent; compare the
    # substitution kernel with the kernel of evaluation at parameterized points
    M = twisted_cubic.model(P)
    ring = twisted_cubic.ring
    rng = np.random.default_rng(0)
    s = rng.integers(1, 1000, (40, 2))
    pts = np.stack([s[:, 0] ** 3 % P, s[:, 0] ** 2 * s[:, 1] % P, s[:, 0] * s[:, 1] ** 2 % P, s[:, 1] ** 3 % P], 1)
    for k in (2, 3):
        vals = M.monomial_values(k, pts)
        I = ideal_piece(twisted_cubic, k)
        assert not np.any((I.basis.astype(object) @ vals.T.astype(object)) % P)
        assert I.dim == ring.basis_size(k) - (3 * k + 1)


def test_coordinate_piece(twisted_cubic):
    basis, proj = coordinate_piece(twisted_cubic, 2)
    assert len(basis) == 7


def test_points5():
    Z = catalog.gorenstein_points5()
    M = Z.model(P)
    assert M.ideal_dim(1) == 0 and M.ideal_dim(2) == 5
    assert all(M.a_dim(k) == 5 for k in range(2, 6))
    assert smoothness_spot_check(Z, 5)["status"] == PASS


def test_r1_kernel_split():
    Q = catalog.segre(1, 1)
    assert r1_kernel(Q, 1, 1).dim == 1 + 6
    T = catalog.veronese(1, 3)
    assert r1_kernel(T, 1, 1).dim == 3 + 6
    assert r1_kernel(T, 0, 2).dim == 0


def test_linear_normality_and_complements():
    for X in (catalog.veronese(1, 4), catalog.segre(1, 2), catalog.genus4_canonical(), catalog.scroll((2, 1))):
        M = X.model(P)
        assert M.ideal_dim(1) == 0
        for k in range(0, 4):
            assert M.ideal_dim(k) + M.a_dim(k) == M.p_dim(k)


def test_smoothness_twisted_cubic(twisted_cubic):
    assert smoothness_spot_check(twisted_cubic, 10)["status"] == PASS


def test_smoothness_negative_control_nodal_cone():
    # cone over the nodal cubic y^2 z = x^2 (x + z); singular along (0:0:1:w)
    R = GradedRing.standard(4, "x")
    x, y, z, w = (R.var(i) for i in range(4))
    F = y * y * z - x * x * (x + z)
    X = complete_intersection_from_forms([F], "nodal-cone")
    node = np.array([[0, 0, 1, 5]])
    assert vanishes_at(X, node[0], P)
    assert smoothness_spot_check(X, points=node)["status"] == FAIL
    smooth = np.array([[0, 1, 0, 3]])  # on X, away from the singular line
    assert vanishes_at(X, smooth[0], P)
    assert smoothness_spot_check(X, points=smooth)["status"] == PASS


def test_retry_records_seed():
    X = catalog.tetragonal_curve((2, 1, 1), 1, 1, seed=3)
    assert X.seed == 3 and X.seed_used >= 3


def test_with_retry_exhaustion():
    def build(s):
        raise Degenerate("always")

    with pytest.raises(Degenerate):
        catalog.with_retry(build, 0, 3)
