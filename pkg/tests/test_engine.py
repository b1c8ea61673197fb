from itertools import combinations
from math import comb

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conormal.engine import (
    FAILS,
    HOLDS,
    STABLE,
    canonical_gaussian_corank,
    conormal_saturation,
    euler_defect,
    euler_space,
    gaussian_to_euler,
    gaussian_wedge_kernel,
    h1_ideal_square,
    jacobian_piece,
    j_equals_n,
    koszul_betti_24,
    normal_presentation_check,
    prop113_coker,
    saturated_square_piece,
    star_check,
    symmetric_matrices,
    t_profiles,
)
from conormal.exactalg import DEFAULT_FIELD, matmul_mod
from conormal.ideals import multiplication_matrix
from conormal.rings import GradedRing
from conormal.varieties import catalog
from conormal.varieties.catalog import complete_intersection_from_forms

P = DEFAULT_FIELD.p


def rnc_gaussian_kernel_oracle(r):
    """Brute force on P^1: s ^ t -> s t' - t s' on the affine chart, rank over Q."""
    x = sympy.symbols("x")
    basis = [x ** i for i in range(r + 1)]
    rows = []
    for i, j in combinations(range(r + 1), 2):
        w = sympy.expand(basis[i] * sympy.diff(basis[j], x) - basis[j] * sympy.diff(basis[i], x))
        rows.append([w.coeff(x, d) for d in range(2 * r - 1)])
    return len(rows) - sympy.Matrix(rows).rank()


@pytest.fixture(scope="module")
def rnc():
    return {r: catalog.veronese(1, r) for r in (2, 3, 4, 5)}


@pytest.mark.parametrize("r", [3, 4, 5])
def test_rnc_gaussian_kernel(rnc, r):
    want = rnc_gaussian_kernel_oracle(r)
    assert want == comb(r + 1, 2) - (2 * r - 1) == (r - 1) * (r - 2) // 2
    X = rnc[r]
    assert gaussian_wedge_kernel(X).dim == want
    assert h1_ideal_square(X, 2).value == want


def test_rnc_other_degrees_vanish(rnc):
    for k in (0, 1, 3, 4):
        assert h1_ideal_square(rnc[4], k).value == 0


def test_euler_space_two_models():
    Q = catalog.segre(1, 1)
    E = euler_space(Q, 2)
    other = multiplication_matrix(Q.model(P), 1, 1, P)
    from conormal.exactalg import rank
    assert E.dim == other.shape[1] - rank(other, P)
    assert E.surjective


def test_euler_space_low_degrees():
    for X in (catalog.veronese(1, 3), catalog.genus4_canonical()):
        assert euler_space(X, 1).dim == 0
        assert conormal_saturation(X, 1).Sat.dim == 0


def test_points5_euler_and_saturation():
    Z = catalog.gorenstein_points5()
    for k in (3, 4):
        E = euler_space(Z, k)
        assert E.dim == 4 * 5 - 5
        piece = conormal_saturation(Z, k)
        assert piece.Sat.dim == E.dim
        assert h1_ideal_square(Z, k).value == 0


def test_complete_intersections_have_no_torsion():
    for X in (catalog.genus4_canonical(), catalog.genus5_canonical(), catalog.segre(1, 1)):
        for k in range(2, 5):
            piece = conormal_saturation(X, k)
            assert piece.Sat == piece.N
            assert piece.status == STABLE


def test_gaussian_to_euler_classical_formula():
    X = catalog.veronese(1, 3)
    n = X.n_vars
    M = X.model(P)
    # e_0 (x) e_1 - e_1 (x) e_0  ->  z0 dz1 - z1 dz0: block 1 holds z0, block 0 holds -z1
    T = np.zeros(n * n, np.int64)
    T[0 * n + 1], T[1 * n + 0] = 1, -1
    img = gaussian_to_euler(X, 2, T).reshape(n, M.a_dim(1))
    want = np.zeros((n, n), np.int64)
    want[1, 0] = 1
    want[0, 1] = P - 1
    assert np.array_equal(img, want)
    assert not np.any(gaussian_to_euler(X, 2, np.zeros(n * n, np.int64)))


def test_symmetric_quadric_tensor_lands_in_jacobian():
    X = catalog.veronese(1, 4)
    M = X.model(P)
    F = M.ideal(2).basis
    S = symmetric_matrices(M, F).reshape(F.shape[0], -1)
    img = gaussian_to_euler(X, 2, S)
    assert jacobian_piece(X, 2).contains_all(img)


@pytest.mark.parametrize("make", [lambda: catalog.veronese(1, 3), lambda: catalog.scroll((2, 1)),
                                  lambda: catalog.genus4_canonical(), lambda: catalog.tetragonal_curve((2, 1, 1), 1, 1)])
def test_j_equals_n(make):
    X = make()
    for k in (2, 3, 4):
        assert j_equals_n(X, k)


@given(st.integers(2, 4), st.integers(0, 2 ** 31))
def test_jacobian_rows_satisfy_euler_relation(k, seed):
    X = catalog.scroll((2, 1))
    M = X.model(P)
    N = jacobian_piece(X, k)
    rng = np.random.default_rng(seed)
    v = matmul_mod(rng.integers(0, P, (3, N.dim)), N.basis, P) if N.dim else np.zeros((1, N.ambient_dim), np.int64)
    assert not np.any(euler_defect(M, k, v))
    assert euler_space(X, k).subspace(P).contains_all(v)


def test_prop113_matches_h1():
    X = catalog.veronese(1, 3)
    r = prop113_coker(X, 1)
    assert r["image_in_sat"] and r["coker"] == h1_ideal_square(X, 3).value == 0


def test_normal_presentation():
    assert normal_presentation_check(catalog.veronese(2, 2), direct=True) == {
        "quadratic_generation": True, "linear_syzygies": True, "linear_syzygies_direct": True}
    res = normal_presentation_check(catalog.genus4_canonical())
    assert res["quadratic_generation"] is False
    # a complete intersection of quadrics has Koszul syzygies in degree 4
    assert koszul_betti_24(catalog.genus5_canonical()) == 3


def test_twisted_cubic_linear_syzygies():
    X = catalog.veronese(1, 3)
    assert normal_presentation_check(X, direct=True)["linear_syzygies_direct"]
    assert koszul_betti_24(X) == 0


def test_quadric_hypersurface_kernel():
    assert gaussian_wedge_kernel(catalog.segre(1, 1)).dim == 0


def test_star_check_veronese():
    rep = star_check(catalog.veronese(1, 3), 5)
    assert rep.verdict == HOLDS and set(rep.dims.values()) == {0}


def test_genus5_corank():
    # a general genus-5 curve: the wedge map has rank 10 into 20, corank 10
    cor = canonical_gaussian_corank(catalog.genus5_canonical())
    assert cor["wedge_dim"] == 10 and cor["kernel_dim"] == 0
    assert cor["corank"] == 5 * 5 - 5 - 10


def test_genus4_t_profile():
    prof = t_profiles(catalog.genus4_canonical(), 3)
    assert all(v == 0 for v in prof["T2"].values())


def test_saturated_square_piece_twisted_cubic():
    assert saturated_square_piece(catalog.veronese(1, 3), 3)["dim"] == 0


@pytest.fixture(scope="module")
def tet8():
    return catalog.tetragonal_curve((2, 2, 1), 1, 2)


def test_tetragonal_g8_star_fails_at_three(tet8):
    rep = star_check(tet8, 4)
    assert rep.verdict == FAILS
    assert rep.dims == {3: 1, 4: 0}
    assert len(rep.details[3].primes) >= 2


def test_tetragonal_g8_prop113(tet8):
    assert prop113_coker(tet8, 1)["coker"] == 1


def test_tetragonal_g8_t2_profile(tet8):
    prof = t_profiles(tet8, 3)
    assert prof["T2"][-2] == 1
    assert prof["T2"][-3] == 0


def test_cone_saturation_terminates():
    # cone over a plane conic: singular vertex, saturation still stabilizes
    R = GradedRing.standard(4)
    x, y, z, w = (R.var(i) for i in range(4))
    X = complete_intersection_from_forms([x * y - z * z], "conic-cone")
    assert conormal_saturation(X, 3).status == STABLE
