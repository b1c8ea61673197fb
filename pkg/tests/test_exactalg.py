import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import GF
from sympy.polys.matrices import DomainMatrix

from conormal.exactalg import (
    DEFAULT_PRIME,
    DimensionMismatch,
    FieldConfig,
    Matrix,
    Subspace,
    contains,
    intersect,
    kernel,
    matmul_mod,
    nullspace_basis,
    random_matrix,
    rank,
    rref,
    solve,
)

P = DEFAULT_PRIME


def sympy_rank(a, p=P):
    if a.size == 0:
        return 0
    dm = DomainMatrix([[GF(p)(int(x)) for x in row] for row in a], a.shape, GF(p))
    return dm.rank()


small_matrices = st.integers(1, 7).flatmap(
    lambda n: st.integers(1, 7).flatmap(
        lambda m: st.lists(st.lists(st.integers(-3, 3), min_size=m, max_size=m), min_size=n, max_size=n)
    )
).map(lambda rows: np.array(rows, dtype=np.int64))


def test_identity_rref():
    S = rref(np.eye(2, dtype=np.int64), P)
    assert S.dim == 2 and list(S.pivot_cols) == [0, 1]


def test_zero_matrix_rref():
    assert rref(np.zeros((3, 4), np.int64), P).dim == 0


def test_hand_reduction():
    # (2,4,6) = 2*(1,2,3); (1,2,3) and (0,1,1) are independent
    for p in (11, 13, P):
        S = rref(np.array([[1, 2, 3], [2, 4, 6], [0, 1, 1]]), p)
        assert S.dim == 2
        assert list(S.pivot_cols) == [0, 1]
        assert np.array_equal(S.basis, np.array([[1, 0, 1], [0, 1, 1]]) % p)


def test_kernel_small_cases():
    assert kernel(np.eye(4, dtype=np.int64), P).dim == 0
    K = kernel(np.array([[1, 1, 1]]), P)
    assert K.dim == 2
    assert not np.any(matmul_mod(np.array([[1, 1, 1]]), K.basis.T, P))


def test_rank_nullity_large_random():
    rng = np.random.default_rng(1)
    A = random_matrix(rng, 50, 80, P, rank_=50)
    assert rank(A, P) == 50
    K = kernel(A, P)
    assert K.dim == 30
    assert not np.any(matmul_mod(A, K.basis.T, P))


def test_blocked_path_agrees_with_oracle():
    rng = np.random.default_rng(2)
    A = random_matrix(rng, 300, 260, P, rank_=170)
    assert rank(A, P) == 170
    assert rref(A, P).dim == 170


def test_intersect_examples():
    rng = np.random.default_rng(3)
    a = Subspace.span(rng.integers(0, P, (6, 9)), P)
    assert intersect(a, a) == a
    e = np.eye(6, dtype=np.int64)
    assert intersect(Subspace.span(e[:3], P), Subspace.span(e[3:], P)).dim == 0
    x = Subspace.span(rng.integers(0, P, (10, 20)), P)
    y = Subspace.span(rng.integers(0, P, (10, 20)), P)
    # dim(x ∩ y) = dim x + dim y - dim(x + y)
    assert intersect(x, y).dim == x.dim + y.dim - (x + y).dim == 0


def test_contains_and_solve():
    a = Subspace.span(np.array([[1, 2, 0]]), P)
    assert contains(a, np.zeros(3, np.int64))
    t = np.array([[3], [4], [5]])
    assert np.array_equal(solve(np.eye(3, dtype=np.int64), t, P), t)
    rng = np.random.default_rng(4)
    A = random_matrix(rng, 12, 9, P, rank_=6)
    x = rng.integers(0, P, (9, 2))
    b = matmul_mod(A, x, P)
    y = solve(A, b, P)
    assert y is not None and not np.any((matmul_mod(A, y, P) - b) % P)
    assert solve(np.array([[1, 0], [1, 0]]), np.array([[1], [2]]), P) is None


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        intersect(Subspace.zero(3, P), Subspace.full(4, P))


def test_matrix_sparse_interface():
    m = Matrix.from_entries(2, 3, {(0, 1): 5, (1, 2): -1}, 7)
    assert m.entries == {(0, 1): 5, (1, 2): 6}
    assert (m @ m.transpose()).entries == {(0, 0): 4, (1, 1): 1}


def test_field_config_validation():
    with pytest.raises(ValueError):
        FieldConfig(101)
    cfg = FieldConfig()
    assert cfg.p not in cfg.alternates()


def test_matmul_mod_no_overflow():
    rng = np.random.default_rng(5)
    A = rng.integers(0, P, (7, 40))
    B = rng.integers(0, P, (40, 5))
    want = (np.array(A, dtype=object) @ np.array(B, dtype=object)) % P
    assert np.array_equal(matmul_mod(A, B, P), want.astype(np.int64))


@given(small_matrices)
def test_rank_matches_sympy(a):
    assert rank(a, P) == sympy_rank(a % P)


@given(small_matrices)
def test_rref_is_canonical_and_idempotent(a):
    S = rref(a, P)
    again = rref(S.basis, P) if S.dim else S
    assert again == S
    # reordering and scaling rows does not change the canonical form
    b = (a[::-1] * 5) % P
    assert rref(b, P) == S
    assert S.contains_all(a % P)


@given(small_matrices)
def test_nullspace_rank_nullity(a):
    K = nullspace_basis(a, P)
    assert K.shape[0] + rank(a, P) == a.shape[1]
    assert not np.any(matmul_mod(a % P, K.T, P))


@given(small_matrices, small_matrices)
def test_intersection_dimension_identity(a, b):
    if a.shape[1] != b.shape[1]:
        return
    A, B = rref(a, P), rref(b, P)
    I = intersect(A, B)
    assert I.dim == A.dim + B.dim - (A + B).dim
    assert I.is_subspace_of(A) and I.is_subspace_of(B)
