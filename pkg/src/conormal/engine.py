"""Conormal saturation, H^1(I^2(k)), Gaussian maps and cotangent profiles.

Notation.  V has basis z_0..z_N, A = P/I.  The Euler model of
Gamma(Omega_P|_X (k)) is

    M_k = {c in V (x) A_{k-1} : sum_j z_j c_j = 0 in A_k}.

Vectors of V (x) A_{k-1} are stored block by block: position
``j * a_{k-1} + s`` is the coefficient of the s-th standard monomial in
block j.  The Jacobian submodule N_k is spanned by the rows u * (df/dz_j)_j
over minimal generators f and standard monomials u; its saturation Sat_k
is the set of c such that every degree-m monomial times c lands in N_{k+m}.
H^1(I^2(k)) has dimension dim Sat_k - dim N_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .exactalg import (
    DEFAULT_FIELD,
    DEFAULT_PRIME,
    FieldConfig,
    Subspace,
    kernel,
    matmul_mod,
    nullspace_basis,
    rank,
)
from .ideals import minimal_generators, multiplication_matrix, multiply_by_variables
from .rings import compositions, product_table
from .varieties.base import EmbeddedVariety, VarietyModel, differentiate_rows

UNSTABLE = "UNSTABLE"
STABLE = "STABLE"
UNLUCKY_PRIME = "UNLUCKY_PRIME"
HOLDS, FAILS, INCONCLUSIVE = "HOLDS", "FAILS", "INCONCLUSIVE"

DEFAULT_GEN_DEGREE = 3


@dataclass(frozen=True)
class SaturationConfig:
    window: int = 2
    m_cap: int = 6

    def __post_init__(self):
        if self.window < 1 or self.m_cap < 1:
            raise ValueError("window and m_cap must be positive")


DEFAULT_SATURATION = SaturationConfig()


def _model(X, p) -> VarietyModel:
    return X if isinstance(X, VarietyModel) else X.model(p)


def _variety(X) -> EmbeddedVariety:
    return X.X if isinstance(X, VarietyModel) else X


def _gen_degree(X) -> int:
    return int(_variety(X).notes.get("gen_degree", DEFAULT_GEN_DEGREE))


def _inv(a: int, p: int) -> int:
    return pow(int(a) % p, -1, p)


# ---------------------------------------------------------------------------
# Euler model


@dataclass
class EulerSpace:
    k: int
    n_blocks: int
    block_dim: int
    contraction: np.ndarray  # a_k x (n_blocks * block_dim)
    basis: np.ndarray  # rows spanning M_k (identity on free columns, not echelon)
    contraction_rank: int
    target_dim: int

    @property
    def ambient_dim(self) -> int:
        return self.n_blocks * self.block_dim

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def surjective(self) -> bool:
        return self.contraction_rank == self.target_dim

    def subspace(self, p: int) -> Subspace:
        return Subspace.span(self.basis, p, self.ambient_dim)


def contraction_matrix(M: VarietyModel, k: int) -> np.ndarray:
    """c -> sum_j z_j c_j from V (x) A_{k-1} to A_k."""
    if k < 1:
        return np.zeros((max(M.a_dim(k), 0), 0), np.int64)
    mult = M.mult(k)  # (n, a_k, a_{k-1})
    return np.ascontiguousarray(np.concatenate(list(mult), axis=1))


def euler_space(X, k: int, p: int = DEFAULT_PRIME, check_two_models: bool = True) -> EulerSpace:
    M = _model(X, p)
    key = ("euler", k)
    if key in M.store:
        return M.store[key]
    n = M.ring.n_vars
    if k < 1:
        E = EulerSpace(k, n, 0, np.zeros((M.a_dim(k), 0), np.int64), np.zeros((0, 0), np.int64), 0, M.a_dim(k))
        M.store[key] = E
        return E
    C = contraction_matrix(M, k)
    B = nullspace_basis(C, p)
    E = EulerSpace(k, n, M.a_dim(k - 1), C, B, C.shape[1] - B.shape[0], M.a_dim(k))
    if check_two_models and k >= 2:
        other = multiplication_matrix(M, 1, k - 1, p)
        if other.shape[1] - rank(other, p) != E.dim:
            raise AssertionError(f"Euler model and R1(1,{k - 1}) disagree in degree {k}")
    M.store[key] = E
    return E


def euler_defect(M: VarietyModel, k: int, vectors: np.ndarray) -> np.ndarray:
    """sum_j z_j c_j in A_k for each row c (zero exactly on M_k)."""
    C = contraction_matrix(M, k)
    v = np.asarray(vectors, dtype=np.int64).reshape(-1, C.shape[1])
    return matmul_mod(v, C.T, M.p)


def block_multiply(M: VarietyModel, k: int, vectors: np.ndarray, lin: np.ndarray) -> np.ndarray:
    """Multiply each block of c in V (x) A_{k-1} by the linear form ``lin``: result in V (x) A_k."""
    p = M.p
    mult = M.mult(k)  # (n, a_k, a_{k-1})
    L = np.zeros(mult.shape[1:], np.int64)
    for l, c in enumerate(np.asarray(lin, dtype=np.int64) % p):
        if c:
            L = (L + mult[l] * int(c)) % p
    n = M.ring.n_vars
    v = np.asarray(vectors, dtype=np.int64).reshape(-1, n, mult.shape[2])
    rows = v.reshape(-1, mult.shape[2])
    out = matmul_mod(rows, L.T, p)
    return out.reshape(v.shape[0], n * mult.shape[1])


def monomial_multiply(M: VarietyModel, k: int, vectors: np.ndarray, mono: tuple[int, ...]) -> np.ndarray:
    """Multiply c in V (x) A_{k-1} by a monomial of degree m: result in V (x) A_{k-1+m}."""
    out = np.asarray(vectors, dtype=np.int64)
    deg = k - 1
    n = M.ring.n_vars
    for l, e in enumerate(mono):
        for _ in range(e):
            deg += 1
            unit = np.zeros(n, np.int64)
            unit[l] = 1
            out = block_multiply(M, deg, out, unit)
    return out


# ---------------------------------------------------------------------------
# Jacobian submodule


def jacobian_rows(X, k: int, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Rows (u * df/dz_j)_j for minimal generators f and standard monomials u."""
    M = _model(X, p)
    n = M.ring.n_vars
    if k < 1:
        return np.zeros((0, 0), np.int64)
    a_k1 = M.a_dim(k - 1)
    gens = minimal_generators(M, max(_gen_degree(X), 2), p)
    NF, _ = M.nf(k - 1)
    blocks = []
    for d, G in sorted(gens.items()):
        if d > k or G.shape[0] == 0 or d < 1:
            continue
        D = differentiate_rows(M.ring, d, G, p)  # (n, n_g, P_{d-1})
        std_u = M.standard(k - d)
        table = product_table(M.ring, k - d, d - 1)[std_u]  # (n_u, P_{d-1})
        Gath = NF.T[table]  # (n_u, P_{d-1}, a_{k-1})
        n_u, Pd1 = table.shape
        Gm = np.ascontiguousarray(Gath.transpose(1, 0, 2).reshape(Pd1, n_u * a_k1))
        out = np.zeros((G.shape[0], n_u, n, a_k1), np.int64)
        for j in range(n):
            out[:, :, j, :] = matmul_mod(D[j], Gm, p).reshape(G.shape[0], n_u, a_k1)
        blocks.append(out.reshape(G.shape[0] * n_u, n * a_k1))
    if not blocks:
        return np.zeros((0, n * a_k1), np.int64)
    return np.vstack(blocks)


def jacobian_piece(X, k: int, p: int = DEFAULT_PRIME) -> Subspace:
    M = _model(X, p)
    key = ("N", k)
    if key not in M.store:
        n = M.ring.n_vars
        amb = n * M.a_dim(k - 1) if k >= 1 else 0
        rows = jacobian_rows(M, k, p)
        M.store[key] = Subspace.span(rows, p, amb) if rows.size else Subspace.zero(amb, p)
    return M.store[key]


# ---------------------------------------------------------------------------
# saturation


@dataclass
class ConormalPiece:
    k: int
    N: Subspace
    Sat: Subspace
    M_dim: int
    stabilization_m: int
    chain: list[int]
    status: str

    @property
    def h1(self) -> int:
        return self.Sat.dim - self.N.dim


def _generic_linear_form(n: int, p: int, k: int, m: int) -> np.ndarray:
    rng = np.random.default_rng([p % 2**32, k, m, 4242])
    return rng.integers(1, p, size=n)


def _saturation_step(M: VarietyModel, k: int, m: int, S: Subspace, E: EulerSpace) -> Subspace:
    """S_m from S_{m-1}: elements c of M_k with mu*c in N_{k+m} for every monomial mu of degree m.

    A generic power l^m gives a superset K; the exact monomial test then runs
    only on a complement of S_{m-1} inside K.
    """
    p = M.p
    n = M.ring.n_vars
    N_big = jacobian_piece(M, k + m, p)
    if E.dim == S.dim:
        return S
    lin = _generic_linear_form(n, p, k, m)
    img = E.basis
    for step in range(m):
        img = block_multiply(M, k + step, img, lin)
    q = N_big.quotient_coords(img)
    coeffs = nullspace_basis(q.T, p)
    if coeffs.shape[0] == 0:
        return S
    K = Subspace.span(matmul_mod(coeffs, E.basis, p), p, E.ambient_dim)
    if K.dim == S.dim:
        return S
    W = Subspace.span(S.residues(K.basis), p, E.ambient_dim)
    tests = []
    for mono in compositions(m, n):
        tests.append(N_big.quotient_coords(monomial_multiply(M, k, W.basis, mono)))
    T = np.hstack(tests)
    c2 = nullspace_basis(T.T, p)
    if c2.shape[0] == 0:
        return S
    return S + Subspace.span(matmul_mod(c2, W.basis, p), p, E.ambient_dim)


def conormal_saturation(X, k: int, window: int = 2, m_cap: int = 6, p: int = DEFAULT_PRIME) -> ConormalPiece:
    """Saturation of N_k inside M_k, stopping once ``window`` consecutive dimensions agree."""
    M = _model(X, p)
    key = ("sat", k, window, m_cap)
    if key in M.store:
        return M.store[key]
    E = euler_space(M, k, p)
    N = jacobian_piece(M, k, p)
    if k < 1 or E.dim == 0:
        piece = ConormalPiece(k, N, N, E.dim, 0, [N.dim], STABLE)
        M.store[key] = piece
        return piece
    chain = [N]
    dims = [N.dim]
    status, stab = UNSTABLE, m_cap
    for m in range(1, m_cap + 1):
        if len(dims) >= window and len(set(dims[-window:])) == 1:
            status, stab = STABLE, len(dims) - window
            break
        chain.append(_saturation_step(M, k, m, chain[-1], E))
        dims.append(chain[-1].dim)
    else:
        if len(dims) >= window and len(set(dims[-window:])) == 1:
            status, stab = STABLE, len(dims) - window
    Sat = chain[stab] if status == STABLE else chain[-1]
    piece = ConormalPiece(k, N, Sat, E.dim, stab, dims, status)
    M.store[key] = piece
    return piece


# ---------------------------------------------------------------------------
# H^1(I^2(k)) with second-prime confirmation


@dataclass
class H1Result:
    k: int
    value: int | None
    primes: list[int]
    status: str = STABLE
    flags: list[str] = field(default_factory=list)
    stabilization_m: int | None = None
    values_by_prime: dict = field(default_factory=dict)


def h1_single(X, k: int, p: int, sat: SaturationConfig = DEFAULT_SATURATION) -> tuple[int, ConormalPiece]:
    piece = conormal_saturation(X, k, sat.window, sat.m_cap, p)
    return piece.h1, piece


def h1_ideal_square(X, k: int, field_cfg: FieldConfig = DEFAULT_FIELD,
                    sat: SaturationConfig = DEFAULT_SATURATION, confirm: bool = True) -> H1Result:
    """dim Sat_k - dim N_k; nonzero answers are confirmed under a second prime."""
    p = field_cfg.p
    v, piece = h1_single(X, k, p, sat)
    res = H1Result(k, v, [p], piece.status, [], piece.stabilization_m, {p: v})
    if piece.status == UNSTABLE:
        res.flags.append(UNSTABLE)
    if v == 0 or not confirm:
        return res
    seen = {p: v}
    for q in field_cfg.alternates():
        w, piece_q = h1_single(X, k, q, sat)
        res.values_by_prime[q] = w
        res.primes.append(q)
        if piece_q.status == UNSTABLE:
            res.flags.append(UNSTABLE)
            res.status = UNSTABLE
        if w in seen.values():
            res.value = w
            return res
        seen[q] = w
        if UNLUCKY_PRIME not in res.flags:
            res.flags.append(UNLUCKY_PRIME)
    res.status = UNSTABLE
    res.flags.append("NO_AGREEMENT")
    return res


@dataclass
class StarReport:
    dims: dict
    verdict: str
    details: dict


def star_check(X, k_max: int, field_cfg: FieldConfig = DEFAULT_FIELD,
               sat: SaturationConfig = DEFAULT_SATURATION, k_min: int = 3) -> StarReport:
    dims, details = {}, {}
    verdict = HOLDS
    for k in range(k_min, k_max + 1):
        r = h1_ideal_square(X, k, field_cfg, sat)
        details[k] = r
        dims[k] = r.value
        if r.status == UNSTABLE:
            verdict = INCONCLUSIVE
        elif r.value and verdict != INCONCLUSIVE:
            verdict = FAILS
    return StarReport(dims, verdict, details)


# ---------------------------------------------------------------------------
# Gaussian maps


def _check_linearly_normal(M: VarietyModel):
    if M.a_dim(1) != M.ring.n_vars:
        raise ValueError("the embedding is degenerate (I_1 != 0)")


def gaussian_to_euler(X, k: int, T: np.ndarray, p: int = DEFAULT_PRIME) -> np.ndarray:
    """T = sum s_i (x) t_i in A_1 (x) A_{k-1}  ->  (sum s_i dt_i/dz_j)_j in V (x) A_{k-1}.

    ``T`` is given as rows of length a_1 * a_{k-1} (pair order (s, t)); t is
    lifted to P by its standard monomials.
    """
    M = _model(X, p)
    _check_linearly_normal(M)
    n = M.ring.n_vars
    a1, ak1 = n, M.a_dim(k - 1)
    T = np.asarray(T, dtype=np.int64).reshape(-1, a1, ak1) % p
    out = np.zeros((T.shape[0], n, ak1), np.int64)
    if k < 2:
        return out.reshape(T.shape[0], -1)
    NF, _ = M.nf(k - 1)
    std = M.standard(k - 1)
    exps = M.ring.exponents(k - 1)[std]  # (ak1, n)
    for j in range(n):
        mult = exps[:, j]
        ok = np.nonzero(mult)[0]
        if len(ok) == 0:
            continue
        # z_a * d/dz_j (m_s) = mult * monomial(m_s - e_j + e_a)
        e = exps[ok].copy()
        e[:, j] -= 1
        prod = e[None, :, :] + np.eye(n, dtype=np.int64)[:, None, :]  # (a, s_ok, n)
        idx = M.ring.lookup(k - 1, prod)  # (a, s_ok)
        cols = NF[:, idx.reshape(-1)]  # (ak1, a*s_ok)
        weights = (T[:, :, ok] * mult[ok][None, None, :]) % p  # (nT, a, s_ok)
        out[:, j, :] = matmul_mod(weights.reshape(T.shape[0], -1), cols.T, p)
    return out.reshape(T.shape[0], -1)


def wedge_tensors(n: int) -> np.ndarray:
    """z_i (x) z_j - z_j (x) z_i for i < j, as rows over V (x) V."""
    pairs = list(combinations(range(n), 2))
    W = np.zeros((len(pairs), n * n), np.int64)
    for r, (i, j) in enumerate(pairs):
        W[r, i * n + j] = 1
        W[r, j * n + i] = -1
    return W


def wedge_images(X, p: int = DEFAULT_PRIME) -> np.ndarray:
    M = _model(X, p)
    return gaussian_to_euler(M, 2, wedge_tensors(M.ring.n_vars) % p, p)


def gaussian_wedge_kernel(X, p: int = DEFAULT_PRIME, sat: SaturationConfig = DEFAULT_SATURATION) -> Subspace:
    """{T in wedge^2 Gamma(L) : Gaussian image of T lies in Sat_2}, coordinates over pairs i<j."""
    M = _model(X, p)
    piece = conormal_saturation(M, 2, sat.window, sat.m_cap, p)
    q = piece.Sat.quotient_coords(wedge_images(M, p))
    return kernel(q.T, p)


def canonical_gaussian_corank(C, p: int = DEFAULT_PRIME, sat: SaturationConfig = DEFAULT_SATURATION) -> dict:
    """Corank of wedge^2 Gamma(K) -> Gamma(K^3) through wedge^2 A_1 -> M_2 / Sat_2."""
    X = _variety(C)
    if X.genus is None or X.dim != 1:
        raise ValueError("needs a canonical curve")
    M = _model(C, p)
    g = X.genus
    piece = conormal_saturation(M, 2, sat.window, sat.m_cap, p)
    q = piece.Sat.quotient_coords(wedge_images(M, p))
    r = rank(q, p)
    return {
        "corank": 5 * g - 5 - r,
        "rank": r,
        "kernel_dim": q.shape[0] - r,
        "target_dim": 5 * g - 5,
        "wedge_dim": q.shape[0],
    }


def t_profiles(C, k_max: int, field_cfg: FieldConfig = DEFAULT_FIELD,
               sat: SaturationConfig = DEFAULT_SATURATION) -> dict:
    """T^1 in degree -1 and T^2 in degrees -k_max..0 (T^2_k = H^1(I^2(1-k)))."""
    cor = canonical_gaussian_corank(C, field_cfg.p, sat)
    t2, flags = {}, []
    for k in range(-k_max, 1):
        r = h1_ideal_square(C, 1 - k, field_cfg, sat)
        t2[k] = r.value
        flags += r.flags
    return {"T1_minus1": cor["corank"], "T2": t2, "flags": sorted(set(flags))}


# ---------------------------------------------------------------------------
# J = N and the equation images


def equation_images(X, k: int, rows: np.ndarray, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Gaussian images of T_F = (1/k) sum_i z_i (x) dF/dz_i for F in I_k (exact lifts)."""
    M = _model(X, p)
    n = M.ring.n_vars
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, M.p_dim(k))
    D1 = differentiate_rows(M.ring, k, rows, p)  # (n, nF, P_{k-1})
    acc = np.zeros((n, rows.shape[0], M.p_dim(k - 1)), np.int64)
    for i in range(n):
        D2 = differentiate_rows(M.ring, k - 1, D1[i], p)  # (n, nF, P_{k-2})
        exps = M.ring.exponents(k - 2).copy()
        exps[:, i] += 1
        idx = M.ring.lookup(k - 1, exps)
        for j in range(n):
            acc[j][:, idx] = (acc[j][:, idx] + D2[j]) % p
    inv_k = _inv(k, p)
    out = np.zeros((rows.shape[0], n, M.a_dim(k - 1)), np.int64)
    for j in range(n):
        out[:, j, :] = M.normal_form(k - 1, acc[j] * inv_k % p)
    return out.reshape(rows.shape[0], -1)


def j_equals_n(X, k: int, p: int = DEFAULT_PRIME) -> bool:
    M = _model(X, p)
    I = M.ideal(k)
    N = jacobian_piece(M, k, p)
    if I.dim == 0:
        return N.dim == 0
    J = Subspace.span(equation_images(M, k, I.basis, p), p, N.ambient_dim)
    return J == N


# ---------------------------------------------------------------------------
# normal generation / presentation


def koszul_betti_24(X, p: int = DEFAULT_PRIME) -> int:
    """Koszul homology at wedge^2 V (x) A_2: the number of degree-4 minimal first syzygies."""
    M = _model(X, p)
    n = M.ring.n_vars
    a2 = M.a_dim(2)
    mult3 = M.mult(3)  # (n, a3, a2)
    mult2 = M.mult(2)  # (n, a2, a1)
    pairs = list(combinations(range(n), 2))
    pidx = {pr: i for i, pr in enumerate(pairs)}
    a3 = mult3.shape[1]
    # d2: (a<b) (x) u  ->  e_b (x) z_a u - e_a (x) z_b u
    d2 = np.zeros((len(pairs), a2, n, a3), np.int64)
    for r, (a, b) in enumerate(pairs):
        d2[r, :, b, :] = mult3[a].T
        d2[r, :, a, :] = (-mult3[b].T) % p
    d2 = d2.reshape(len(pairs) * a2, n * a3)
    ker_dim = d2.shape[0] - rank(d2, p)
    # d3: (a<b<c) (x) u  ->  (b,c) z_a u - (a,c) z_b u + (a,b) z_c u
    triples = list(combinations(range(n), 3))
    a1 = mult2.shape[2]
    d3 = np.zeros((len(triples), a1, len(pairs), a2), np.int64)
    for r, (a, b, c) in enumerate(triples):
        d3[r, :, pidx[(b, c)], :] = mult2[a].T
        d3[r, :, pidx[(a, c)], :] = (-mult2[b].T) % p
        d3[r, :, pidx[(a, b)], :] = mult2[c].T
    d3 = d3.reshape(len(triples) * a1, len(pairs) * a2)
    return ker_dim - rank(d3, p)


def syzygy_space(M: VarietyModel, gens: np.ndarray, extra: int) -> Subspace:
    """Kernel of (P_extra)^k -> P_{2+extra}, (h_i) -> sum h_i f_i, for quadrics f."""
    p = M.p
    k = gens.shape[0]
    Pe = M.p_dim(extra)
    Pt = M.p_dim(2 + extra)
    table = product_table(M.ring, extra, 2)  # (Pe, P2)
    rows = np.zeros((k, Pe, Pt), np.int64)
    for i in range(k):
        for m in range(Pe):
            np.add.at(rows[i, m], table[m], gens[i])
    rows %= p
    return kernel(rows.reshape(k * Pe, Pt).T, p)


def linear_syzygies_direct(X, p: int = DEFAULT_PRIME) -> bool:
    """Degree-4 syzygies of the quadrics are spanned by P_1 times the linear ones (small cases)."""
    M = _model(X, p)
    gens = minimal_generators(M, 2, p)[2]
    k = gens.shape[0]
    s3 = syzygy_space(M, gens, 1)
    s4 = syzygy_space(M, gens, 2)
    P1, P2 = M.p_dim(1), M.p_dim(2)
    prods = []
    for r in s3.basis.reshape(-1, k, P1):
        prods.append(multiply_by_variables(M.ring, 2, r, p).reshape(M.ring.n_vars, k, P2).reshape(M.ring.n_vars, k * P2))
    span = Subspace.span(np.vstack(prods), p, k * P2) if prods else Subspace.zero(k * P2, p)
    return span == s4


def normal_presentation_check(X, d_max: int = 3, p: int = DEFAULT_PRIME, direct: bool = False) -> dict:
    M = _model(X, p)
    gens = minimal_generators(M, max(d_max, 2), p)
    quad = all(gens[d].shape[0] == 0 for d in range(3, d_max + 1)) and gens[2].shape[0] > 0
    lin = koszul_betti_24(M, p) == 0 if quad else False
    out = {"quadratic_generation": bool(quad), "linear_syzygies": bool(lin)}
    if direct and quad:
        out["linear_syzygies_direct"] = linear_syzygies_direct(M, p)
    return out


# ---------------------------------------------------------------------------
# quadrics times A_k versus the saturation


def symmetric_matrices(M: VarietyModel, rows: np.ndarray) -> np.ndarray:
    """Symmetric matrices S with F = sum S_ab z_a z_b for quadrics given over P_2."""
    p = M.p
    n = M.ring.n_vars
    half = _inv(2, p)
    S = np.zeros((rows.shape[0], n, n), np.int64)
    for idx, e in enumerate(M.ring.degree_basis(2)):
        nz = [i for i, x in enumerate(e) if x]
        if len(nz) == 1:
            a = nz[0]
            S[:, a, a] = rows[:, idx]
        else:
            a, b = nz
            S[:, a, b] = rows[:, idx] * half % p
            S[:, b, a] = S[:, a, b]
    return S


def prop113_coker(X, k: int, p: int = DEFAULT_PRIME, sat: SaturationConfig = DEFAULT_SATURATION) -> dict:
    """dim Sat_{k+2} minus the span of u * (1/2) dF over quadrics F and u in A_k."""
    M = _model(X, p)
    n = M.ring.n_vars
    F = M.ideal(2).basis
    S = symmetric_matrices(M, F)  # (nF, n, n)
    mult = M.mult(k + 1)  # (n, a_{k+1}, a_k)
    ak, ak1 = mult.shape[2], mult.shape[1]
    img = np.zeros((F.shape[0], ak, n, ak1), np.int64)
    # block j of u*(1/2)dF = sum_a S[a, j] z_a u
    for j in range(n):
        for a in range(n):
            coeff = S[:, a, j]
            nz = np.nonzero(coeff)[0]
            if len(nz) == 0:
                continue
            zu = mult[a].T  # (ak, ak1): row u = z_a u
            img[nz, :, j, :] = (img[nz, :, j, :] + coeff[nz, None, None] * zu[None]) % p
    img = img.reshape(F.shape[0] * ak, n * ak1)
    image = Subspace.span(img, p, n * ak1)
    piece = conormal_saturation(M, k + 2, sat.window, sat.m_cap, p)
    return {
        "coker": piece.Sat.dim - image.dim,
        "image_in_sat": image.is_subspace_of(piece.Sat),
        "image_dim": image.dim,
        "sat_dim": piece.Sat.dim,
    }


# ---------------------------------------------------------------------------
# the saturated square piece Gamma(I^2(k))


def square_piece(M: VarietyModel, j: int) -> Subspace:
    """(I^2)_j spanned by products of minimal generators times monomials."""
    p = M.p
    gens = minimal_generators(M, max(_gen_degree(M.X), 2), p)
    polys = [(d, r) for d, G in gens.items() for r in G]
    rows = []
    Pj = M.p_dim(j)
    for i1 in range(len(polys)):
        for i2 in range(i1, len(polys)):
            d1, f = polys[i1]
            d2, g = polys[i2]
            rest = j - d1 - d2
            if rest < 0:
                continue
            fg = _poly_product(M, d1, f, d2, g)
            if rest == 0:
                rows.append(fg[None, :])
            else:
                table = product_table(M.ring, d1 + d2, rest)  # (P_{d1+d2}, P_rest)
                block = np.zeros((M.p_dim(rest), Pj), np.int64)
                nz = np.nonzero(fg)[0]
                for a in nz:
                    block[np.arange(M.p_dim(rest)), table[a]] = (block[np.arange(M.p_dim(rest)), table[a]] + fg[a]) % p
                rows.append(block)
    if not rows:
        return Subspace.zero(Pj, p)
    return Subspace.span(np.vstack(rows), p, Pj)


def _poly_product(M: VarietyModel, d1: int, f: np.ndarray, d2: int, g: np.ndarray) -> np.ndarray:
    p = M.p
    table = product_table(M.ring, d1, d2)
    out = np.zeros(M.p_dim(d1 + d2), np.int64)
    for a in np.nonzero(f)[0]:
        for b in np.nonzero(g)[0]:
            out[table[a, b]] = (out[table[a, b]] + int(f[a]) * int(g[b])) % p
    return out


def saturated_square_piece(X, k: int = 3, p: int = DEFAULT_PRIME, window: int = 2, m_cap: int = 4) -> dict:
    """{c in I_k : every degree-m monomial times c lies in (I^2)_{k+m}} for stabilizing m."""
    M = _model(X, p)
    I = M.ideal(k)
    chain = [square_piece(M, k).dim]
    current = I
    n = M.ring.n_vars
    status = UNSTABLE
    for m in range(1, m_cap + 1):
        Sq = square_piece(M, k + m)
        tests = []
        for mono in compositions(m, n):
            exps = M.ring.exponents(k) + np.array(mono)[None, :]
            idx = M.ring.lookup(k + m, exps)
            shifted = np.zeros((current.dim, M.p_dim(k + m)), np.int64)
            shifted[:, idx] = current.basis
            tests.append(Sq.quotient_coords(shifted))
        coeffs = nullspace_basis(np.hstack(tests).T, p)
        current = Subspace.span(matmul_mod(coeffs, current.basis, p), p, I.ambient_dim) if coeffs.shape[0] else Subspace.zero(I.ambient_dim, p)
        chain.append(current.dim)
        if len(chain) >= window + 1 and len(set(chain[-window:])) == 1:
            status = STABLE
            break
    return {"dim": current.dim, "chain": chain, "status": status}
