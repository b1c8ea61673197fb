import numpy as np
import pytest

from conormal.deform import (
    FAIL,
    NO_LIFT,
    PASS,
    TERMINATED,
    DeformationState,
    PresentationRejected,
    extension_pipeline,
    extension_polynomials,
    first_order_solutions,
    first_order_space,
    first_order_state,
    flatness_check,
    presentation,
    second_order_lift,
    t_zero_fiber_matches,
    trivial_first_order,
)
from conormal.engine import canonical_gaussian_corank, h1_ideal_square
from conormal.exactalg import DEFAULT_PRIME, matmul_mod
from conormal.varieties import catalog

P = DEFAULT_PRIME


@pytest.fixture(scope="module")
def pent8():
    return catalog.pentagonal_curve(g=8)


@pytest.fixture(scope="module")
def pres8(pent8):
    return presentation(pent8, P)


def test_presentation_shape(pres8):
    # 15 quadrics and 35 linear syzygies for a genus-8 curve with linear syzygies
    assert (pres8.k, pres8.ell, pres8.n) == (15, 35, 8)
    assert pres8.quad_syz is None


def test_twisted_cubic_presentation():
    pres = presentation(catalog.veronese(1, 3), P)
    assert (pres.k, pres.ell) == (3, 2)


def test_reject_cubic_generator():
    with pytest.raises(PresentationRejected) as exc:
        presentation(catalog.genus4_canonical(), P)
    assert exc.value.status == "REJECT"


def test_reject_nonlinear_syzygies():
    with pytest.raises(PresentationRejected):
        presentation(catalog.genus5_canonical(), P)


def test_trivial_first_order_bounds(pres8):
    triv = trivial_first_order(pres8)
    assert triv.dim <= pres8.n
    assert triv.dim == 8


def test_first_order_matches_corank(pent8):
    T1 = first_order_space(pent8, P)
    assert T1.dim == canonical_gaussian_corank(pent8, P)["corank"] == 7
    sols = first_order_solutions(pent8, P)
    assert sols.dim == T1.dim + trivial_first_order(presentation(pent8, P)).dim


def test_pentagonal_lifts_are_flat(pent8, pres8):
    res = extension_pipeline(pent8, P, k_max=3)
    assert res["T1_dim"] == 7
    for rec in res["lifts"]:
        assert rec["status"] == TERMINATED and rec["f2_r1_zero"]
        assert rec["flatness"]["status"] == PASS


def test_identities_hold_exactly(pres8, pent8):
    v = first_order_space(pent8, P).basis[0]
    st = second_order_lift(first_order_state(pres8, v))
    assert TERMINATED in st.flags
    polys = extension_polynomials(st)
    assert len(polys) == pres8.k
    assert not np.any(matmul_mod(st.f2[None, :], st.r1, P))


def test_cone_is_flat(pres8):
    # f1 = f2 = 0: the cone over the curve
    zero = np.zeros((pres8.k, pres8.n), np.int64)
    st = first_order_state(pres8, zero)
    assert not np.any(st.r1)
    cone = DeformationState(pres8, zero, st.r1, np.zeros(pres8.k, np.int64), (TERMINATED,))
    res = flatness_check(cone, 4)
    assert res["status"] == PASS
    assert second_order_lift(st).status == TERMINATED


def test_corrupted_f2_fails_at_degree_three(pres8, pent8):
    v = first_order_space(pent8, P).basis[0]
    st = second_order_lift(first_order_state(pres8, v))
    rng = np.random.default_rng(0)
    bad = DeformationState(st.presentation, st.f1, st.r1, rng.integers(0, P, pres8.k), st.flags)
    res = flatness_check(bad, 3)
    assert res["status"] == FAIL and res["first_bad_degree"] == 3


def test_non_solution_rejected(pres8):
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        first_order_state(pres8, rng.integers(0, P, (pres8.k, pres8.n)))


def test_t0_fiber(pres8):
    for k in range(0, 5):
        assert t_zero_fiber_matches(pres8, k)


def test_complete_intersection_lifts_unvalidated():
    # three quadrics: unobstructed, every first-order deformation lifts
    X = catalog.genus5_canonical()
    pres = presentation(X, P, strict=False)
    assert pres.quad_syz is not None
    T1 = first_order_space(X, P, strict=False)
    assert T1.dim == canonical_gaussian_corank(X, P)["corank"]
    for v in T1.basis:
        st = second_order_lift(first_order_state(pres, v))
        assert st.status != NO_LIFT


@pytest.mark.parametrize("e,b", [((2, 1, 1), (1, 1)), ((2, 2, 1), (1, 2)), ((2, 1, 1), (0, 2))])
def test_tetragonal_first_order_equals_corank(e, b):
    X = catalog.tetragonal_curve(e, *b)
    assert first_order_space(X, P, strict=False).dim == canonical_gaussian_corank(X, P)["corank"]


def test_tetragonal_g8_obstruction_dimension():
    X = catalog.tetragonal_curve((2, 2, 1), 1, 2)
    assert h1_ideal_square(X, 3).value == 1
