"""Degree-wise ideal data: I_k, A_k, minimal generators, multiplication kernels."""

from __future__ import annotations

import numpy as np

from .exactalg import DEFAULT_PRIME, Subspace, kernel, matmul_mod
from .rings import product_table
from .varieties.base import EmbeddedVariety, VarietyModel


def _model(X, p) -> VarietyModel:
    return X if isinstance(X, VarietyModel) else X.model(p)


def ideal_piece(X: EmbeddedVariety, k: int, p: int = DEFAULT_PRIME) -> Subspace:
    return _model(X, p).ideal(k)


def coordinate_piece(X: EmbeddedVariety, k: int, p: int = DEFAULT_PRIME) -> tuple[np.ndarray, np.ndarray]:
    """(standard monomial indices spanning A_k, projection matrix P_k -> A_k)."""
    M = _model(X, p)
    NF, std = M.nf(k)
    return std, NF


def multiply_by_variables(ring, d: int, rows: np.ndarray, p: int) -> np.ndarray:
    """All products z_l * row for rows over P_{d-1}; result rows over P_d."""
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, ring.basis_size(d - 1))
    n_out = ring.basis_size(d)
    exps = ring.exponents(d - 1)
    out = np.zeros((ring.n_vars * rows.shape[0], n_out), np.int64)
    for l in range(ring.n_vars):
        e = exps.copy()
        e[:, l] += 1
        idx = ring.lookup(d, e)
        out[l * rows.shape[0]:(l + 1) * rows.shape[0], idx] = rows
    return out


def minimal_generators(X, d_max: int, p: int = DEFAULT_PRIME) -> dict[int, np.ndarray]:
    """New generators by degree: canonical complement of P_1 * I_{d-1} in I_d.

    Returns ``{d: rows over P_d}`` for every ``1 <= d <= d_max`` (possibly
    with zero rows).
    """
    M = _model(X, p)
    key = ("mingens", d_max)
    if key in M.store:
        return M.store[key]
    out = {}
    for d in range(1, d_max + 1):
        I_d = M.ideal(d)
        if d == 1 or M.ideal(d - 1).dim == 0:
            out[d] = I_d.basis
            continue
        prev = M.ideal(d - 1)
        S = Subspace.span(multiply_by_variables(M.ring, d, prev.basis, p), p, M.p_dim(d))
        if S.dim == I_d.dim:
            out[d] = np.zeros((0, M.p_dim(d)), np.int64)
            continue
        C = Subspace.span(S.residues(I_d.basis), p, M.p_dim(d))
        out[d] = C.basis
    M.store[key] = out
    return out


def generator_counts(gens: dict[int, np.ndarray]) -> dict[int, int]:
    return {d: int(rows.shape[0]) for d, rows in gens.items() if rows.shape[0]}


def multiplication_matrix(X, a: int, b: int, p: int = DEFAULT_PRIME) -> np.ndarray:
    """A_a (x) A_b -> A_{a+b}; columns are pairs (u, v) in lexicographic order."""
    M = _model(X, p)
    sa, sb = M.standard(a), M.standard(b)
    NF, _ = M.nf(a + b)
    if len(sa) == 0 or len(sb) == 0:
        return np.zeros((NF.shape[0], len(sa) * len(sb)), np.int64)
    table = product_table(M.ring, a, b)[np.ix_(sa, sb)]
    return np.ascontiguousarray(NF[:, table.reshape(-1)])


def r1_kernel(X, a: int, b: int, p: int = DEFAULT_PRIME) -> Subspace:
    """Kernel of multiplication A_a (x) A_b -> A_{a+b}."""
    return kernel(multiplication_matrix(X, a, b, p), p)


def swap_permutation(n: int) -> np.ndarray:
    """Column permutation of A_1 (x) A_1 exchanging the two factors."""
    i, j = np.divmod(np.arange(n * n), n)
    return j * n + i


def symmetric_part(S: Subspace) -> Subspace:
    """Intersection of a subspace of V (x) V with the symmetric tensors."""
    n = int(round(np.sqrt(S.ambient_dim)))
    perm = swap_permutation(n)
    # v symmetric  <=>  v - swap(v) = 0; restrict to S
    diff = (S.basis - S.basis[:, perm]) % S.p
    coeffs = kernel(diff.T, S.p)
    if coeffs.dim == 0:
        return Subspace.zero(S.ambient_dim, S.p)
    return Subspace.span(matmul_mod(coeffs.basis, S.basis, S.p), S.p, S.ambient_dim)
