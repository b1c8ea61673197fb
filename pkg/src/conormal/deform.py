"""Weight -1 deformations of quadratically presented graded rings and their lifts.

A presentation is a row f of k quadrics and a k x l matrix r of linear
forms whose columns span the linear syzygies.  A first-order deformation
is F = f + eps*f1 with f1 linear; flatness forces a constant r1 with

    f1*r + f*r1 = 0.

The second step looks for a constant row f2 with f1*r1 + f2*r = 0, and the
lift terminates when f2*r1 = 0.  Then F = f + t*f1 + t^2*f2 (t of degree 1)
cuts out a flat one-parameter extension, which :func:`flatness_check`
verifies through the Hilbert function of P[t]/(F).

Shapes used throughout: f is (k, dim P_2), r is (l, k, n) with r[a, i, m]
the coefficient of z_m in r_{i,a}, f1 is (k, n), r1 is (k, l), f2 is (k,).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exactalg import DEFAULT_PRIME, Subspace, matmul_mod, nullspace_basis, rank, solve
from .ideals import minimal_generators, multiply_by_variables
from .engine import _model, koszul_betti_24, syzygy_space
from .rings import GradedRing, product_table
from .varieties.base import Degenerate, EmbeddedVariety, differentiate_rows, rows_to_polynomials
from .varieties.catalog import DEFAULT_RETRIES, _rng, canonical_h0, plane_curve_canonical
from .varieties.oracles import PointsOracle, monomial_values

FIRST_ORDER = "FIRST_ORDER"
SECOND_ORDER = "SECOND_ORDER"
TERMINATED = "TERMINATED"
NO_LIFT = "NO_LIFT"
NOT_TERMINATED = "NOT_TERMINATED"
PASS, FAIL = "PASS", "FAIL"


class PresentationRejected(ValueError):
    """The ring is not generated by quadrics with linear first syzygies."""

    status = "REJECT"


@dataclass
class Presentation:
    ring: GradedRing
    p: int
    f: np.ndarray  # (k, P_2), reduced echelon basis of I_2
    f_pivots: np.ndarray
    r: np.ndarray  # (l, k, n)
    hilbert: list[int] = field(default_factory=list)  # dim A_j, j = 0..
    quad_syz: np.ndarray | None = None  # (b, k, P_2) degree-4 syzygies, only when not strict
    store: dict = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return self.f.shape[0]

    @property
    def ell(self) -> int:
        return self.r.shape[0]

    @property
    def n(self) -> int:
        return self.ring.n_vars

    def quad_index(self) -> np.ndarray:
        """(n, n) table of positions of z_l z_m in P_2."""
        if "idx2" not in self.store:
            n = self.n
            e = np.eye(n, dtype=np.int64)
            self.store["idx2"] = self.ring.lookup(2, e[:, None, :] + e[None, :, :])
        return self.store["idx2"]


def _linear_rows_are_variables(ring: GradedRing):
    if not np.array_equal(ring.exponents(1), np.eye(ring.n_vars, dtype=np.int64)):
        raise AssertionError("degree-1 basis is expected to be z_0..z_N in order")


def syzygy_products(pres: Presentation, r: np.ndarray) -> np.ndarray:
    """sum_i f_i r_{i,a} as rows over P_3, one per column a of r."""
    p = pres.p
    if "zf" not in pres.store:
        # row l*k + i is z_l * f_i
        pres.store["zf"] = multiply_by_variables(pres.ring, 3, pres.f, p)
    zf = pres.store["zf"]
    r = np.asarray(r, dtype=np.int64)
    coeff = r.transpose(0, 2, 1).reshape(r.shape[0], r.shape[1] * r.shape[2])  # (l, n*k)
    return matmul_mod(coeff, zf, p)


def presentation(C, p: int = DEFAULT_PRIME, hilbert_to: int = 6, strict: bool = True) -> Presentation:
    """Quadrics f and linear syzygies r of a quadratically presented ring (else REJECT).

    With ``strict=False`` the linear-syzygy hypothesis is not required;
    the full degree-4 syzygy space is kept instead so that first-order
    solutions still respect every relation.  Lifts computed from such a
    presentation are unvalidated.
    """
    M = _model(C, p)
    key = ("presentation", strict)
    if key in M.store:
        return M.store[key]
    _linear_rows_are_variables(M.ring)
    gens = minimal_generators(M, 3, p)
    if gens[1].shape[0] or gens[2].shape[0] == 0 or gens[3].shape[0]:
        raise PresentationRejected("ideal is not generated by quadrics")
    linear = koszul_betti_24(M, p) == 0
    if strict and not linear:
        raise PresentationRejected("first syzygies are not generated by linear ones")
    f = gens[2]
    k, n = f.shape[0], M.ring.n_vars
    S = syzygy_space(M, f, 1)
    r = S.basis.reshape(-1, k, n)
    quad = None if linear else syzygy_space(M, f, 2).basis.reshape(-1, k, M.p_dim(2))
    pres = Presentation(M.ring, p, f, M.ideal(2).pivot_cols, r, [M.a_dim(j) for j in range(hilbert_to + 1)], quad)
    pres.store[("model",)] = M
    if np.any(syzygy_products(pres, r)):
        raise AssertionError("f*r != 0")
    M.store[key] = pres
    return pres


# ---------------------------------------------------------------------------
# first order


def trivial_first_order(pres: Presentation) -> Subspace:
    """Span of (D f_1, ..., D f_k) over constant derivations D = d/dz_j."""
    D = differentiate_rows(pres.ring, 2, pres.f, pres.p)  # (n, k, n)
    return Subspace.span(D.reshape(pres.n, -1), pres.p, pres.k * pres.n)


def _f1_times_r(pres: Presentation, f1: np.ndarray, r: np.ndarray | None = None) -> np.ndarray:
    """sum_i f1_i r_{i,a} as rows over P_2."""
    p = pres.p
    r = pres.r if r is None else r
    n, ell = pres.n, r.shape[0]
    f1 = np.asarray(f1, dtype=np.int64).reshape(pres.k, n)
    # G[l, a, m] = sum_i f1[i, l] r[a, i, m]
    G = matmul_mod(f1.T, r.transpose(1, 0, 2).reshape(pres.k, ell * n), p).reshape(n, ell, n)
    out = np.zeros((ell, pres.ring.basis_size(2)), np.int64)
    idx = pres.quad_index()
    for l in range(n):
        np.add.at(out, (slice(None), idx[l]), G[l])
    return out % p


def first_order_equations(pres: Presentation, M) -> np.ndarray:
    """Matrix E (k*n x l*a_2): f1 (as a row) @ E = normal forms of f1*r_a in A_2."""
    p = pres.p
    n, k, ell = pres.n, pres.k, pres.ell
    NF, _ = M.nf(2)
    Q = NF[:, pres.quad_index()].transpose(1, 2, 0)  # (n_l, n_m, a2)
    a2 = Q.shape[2]
    Qm = np.ascontiguousarray(Q.transpose(1, 0, 2).reshape(n, n * a2))  # m x (l, c)
    T = matmul_mod(pres.r.reshape(ell * k, n), Qm, p).reshape(ell, k, n, a2)
    E = np.ascontiguousarray(T.transpose(1, 2, 0, 3).reshape(k * n, ell * a2))
    if pres.quad_syz is None or pres.quad_syz.shape[0] == 0:
        return E
    # f1 * s in I_3 for the quadratic syzygies s as well
    b = pres.quad_syz.shape[0]
    zs = multiply_by_variables(pres.ring, 3, pres.quad_syz.reshape(b * k, -1), p)  # row l*(b*k) + j*k + i
    Z = M.normal_form(3, zs).reshape(n, b, k, -1).transpose(2, 0, 1, 3).reshape(k * n, -1)
    return np.hstack([E, Z])


def first_order_solutions(C, p: int = DEFAULT_PRIME, strict: bool = True) -> Subspace:
    """All linear rows f1 respecting the relations mod I (= maps I -> A of weight -1)."""
    M = _model(C, p)
    key = ("f1_solutions", strict)
    if key not in M.store:
        pres = presentation(M, p, strict=strict)
        E = first_order_equations(pres, M)
        M.store[key] = Subspace.span(nullspace_basis(E.T, p), p, pres.k * pres.n)
    return M.store[key]


def first_order_space(C, p: int = DEFAULT_PRIME, strict: bool = True) -> Subspace:
    """T^1 in weight -1: canonical complement of the trivial deformations inside the solutions."""
    M = _model(C, p)
    key = ("T1", strict)
    if key not in M.store:
        pres = presentation(M, p, strict=strict)
        sol = first_order_solutions(M, p, strict)
        triv = trivial_first_order(pres)
        if not triv.is_subspace_of(sol):
            raise AssertionError("trivial deformations are not solutions")
        M.store[key] = Subspace.span(triv.residues(sol.basis), p, sol.ambient_dim)
    return M.store[key]


@dataclass(frozen=True)
class DeformationState:
    presentation: Presentation
    f1: np.ndarray
    r1: np.ndarray
    f2: np.ndarray | None = None
    flags: tuple = ()

    @property
    def status(self) -> str:
        for s in (NO_LIFT, TERMINATED, SECOND_ORDER, FIRST_ORDER):
            if s in self.flags:
                return s
        return "NONE"


def relation_lift(pres: Presentation, f1: np.ndarray) -> np.ndarray | None:
    """The constant r1 with f*r1 = -f1*r, or None when f1*r is not in I_2."""
    p = pres.p
    prod = _f1_times_r(pres, f1)  # (l, P_2)
    I2 = Subspace(pres.f.shape[1], pres.f, pres.f_pivots, p)
    if np.any(I2.residues(prod)):
        return None
    return (-I2.coordinates(prod).T) % p  # (k, l)


def first_order_state(pres: Presentation, f1) -> DeformationState:
    p = pres.p
    f1 = np.asarray(f1, dtype=np.int64).reshape(pres.k, pres.n) % p
    r1 = relation_lift(pres, f1)
    if r1 is None:
        raise ValueError("f1 does not define a first-order deformation")
    # f1*r + f*r1 = 0 exactly
    lhs = (_f1_times_r(pres, f1) + matmul_mod(r1.T, pres.f, p)) % p
    if np.any(lhs):
        raise AssertionError("first-order identity fails")
    return DeformationState(pres, f1, r1, None, (FIRST_ORDER,))


def _const_times_r(pres: Presentation) -> np.ndarray:
    """Matrix R (k x l*n): row vector c -> (sum_i c_i r_{i,a})_a as linear forms."""
    return np.ascontiguousarray(pres.r.transpose(1, 0, 2).reshape(pres.k, pres.ell * pres.n))


def second_order_lift(state: DeformationState) -> DeformationState:
    """Solve f2*r = -f1*r1 for a constant row f2 and test f2*r1 = 0."""
    pres = state.presentation
    p = pres.p
    R = _const_times_r(pres)
    rhs = (-matmul_mod(state.r1.T, state.f1, p)).reshape(1, pres.ell * pres.n) % p  # -(f1 r1)_a as (l*n)
    x = solve(R.T, rhs.T, p)
    if x is None:
        return replace(state, flags=state.flags + (NO_LIFT,))
    f2 = x[:, 0]
    if np.any(matmul_mod(f2[None, :], state.r1, p)):
        # adjust by constants c with c*r = 0 so that f2*r1 vanishes too
        Cb = nullspace_basis(R.T, p)
        if Cb.shape[0]:
            target = (-matmul_mod(f2[None, :], state.r1, p)) % p
            c = solve(matmul_mod(Cb, state.r1, p).T, target.T, p)
            if c is not None:
                f2 = (f2 + matmul_mod(c.T, Cb, p)[0]) % p
    check = (matmul_mod(state.r1.T, state.f1, p) + matmul_mod(f2[None, :], R, p).reshape(pres.ell, pres.n)) % p
    if np.any(check):
        raise AssertionError("second-order identity fails")
    flags = state.flags + (SECOND_ORDER,)
    flags += (TERMINATED,) if not np.any(matmul_mod(f2[None, :], state.r1, p)) else (NOT_TERMINATED,)
    return replace(state, f2=f2, flags=flags)


def lift(C, f1, p: int = DEFAULT_PRIME) -> DeformationState:
    return second_order_lift(first_order_state(presentation(C, p), f1))


# ---------------------------------------------------------------------------
# the extension and its flatness


def extension_ring(pres: Presentation) -> GradedRing:
    if "ring_t" not in pres.store:
        pres.store["ring_t"] = GradedRing([*pres.ring.names, "t"])
    return pres.store["ring_t"]


def _embed(ring_t: GradedRing, ring: GradedRing, d: int, t_power: int) -> np.ndarray:
    """Positions in P[t]_{d + t_power} of the P_d monomials times t^t_power."""
    e = ring.exponents(d)
    et = np.hstack([e, np.full((len(e), 1), t_power, np.int64)])
    return ring_t.lookup(d + t_power, et)


def extension_ideal(state: DeformationState) -> tuple[GradedRing, np.ndarray]:
    """Generators F = f + t*f1 + t^2*f2 as rows over P[t]_2."""
    if TERMINATED not in state.flags and state.f2 is not None:
        raise ValueError("lift did not terminate")
    pres = state.presentation
    Rt = extension_ring(pres)
    F = np.zeros((pres.k, Rt.basis_size(2)), np.int64)
    F[:, _embed(Rt, pres.ring, 2, 0)] = pres.f
    F[:, _embed(Rt, pres.ring, 1, 1)] = state.f1
    f2 = np.zeros(pres.k, np.int64) if state.f2 is None else state.f2
    F[:, _embed(Rt, pres.ring, 0, 2)[0]] = f2
    return Rt, F % pres.p


def extension_polynomials(state: DeformationState):
    Rt, F = extension_ideal(state)
    return rows_to_polynomials(Rt, 2, F, state.presentation.p)


def ideal_span_rows(ring: GradedRing, gens: np.ndarray, d_gen: int, k: int) -> np.ndarray:
    """Rows mu * g for all monomials mu of degree k - d_gen and generators g."""
    if k < d_gen:
        return np.zeros((0, ring.basis_size(k)), np.int64)
    table = product_table(ring, k - d_gen, d_gen)  # (n_mu, P_dgen)
    out = np.zeros((table.shape[0], gens.shape[0], ring.basis_size(k)), np.int64)
    for mu in range(table.shape[0]):
        out[mu][:, table[mu]] = gens
    return out.reshape(-1, ring.basis_size(k))


def flatness_check(state: DeformationState, k_max: int = 4) -> dict:
    """dim P[t]_k / (F)_k = sum_{j<=k} dim A_j for k <= k_max, and (F) mod t = I in those degrees."""
    pres = state.presentation
    p = pres.p
    Rt, F = extension_ideal(state)
    dims, fiber = {}, {}
    first_bad = None
    for k in range(0, k_max + 1):
        rows = ideal_span_rows(Rt, F, 2, k)
        quot = Rt.basis_size(k) - (rank(rows, p) if rows.size else 0)
        want = sum(pres.hilbert[: k + 1])
        dims[k] = (quot, want)
        if quot != want and first_bad is None:
            first_bad = k
        fiber[k] = t_zero_fiber_matches(pres, k)
    ok = first_bad is None and all(fiber.values())
    return {"status": PASS if ok else FAIL, "first_bad_degree": first_bad,
            "dims": dims, "t0_fiber_equal": fiber}


def t_zero_fiber(pres: Presentation, k: int) -> Subspace:
    """(F)_k with t set to 0: only the t-free multipliers survive, leaving P_{k-2}*f."""
    key = ("fiber", k)
    if key not in pres.store:
        rows = ideal_span_rows(pres.ring, pres.f, 2, k)
        amb = pres.ring.basis_size(k)
        pres.store[key] = Subspace.span(rows, pres.p, amb) if rows.size else Subspace.zero(amb, pres.p)
    return pres.store[key]


def t_zero_fiber_matches(pres: Presentation, k: int) -> bool:
    M = pres.store[("model",)]
    return t_zero_fiber(pres, k) == M.ideal(k)


def extension_pipeline(C, p: int = DEFAULT_PRIME, k_max: int = 4, basis=None, flat: bool = True) -> dict:
    """Lift every T^1 basis vector and check flatness of the resulting extensions."""
    M = _model(C, p)
    pres = presentation(M, p)
    T1 = first_order_space(M, p)
    vectors = T1.basis if basis is None else np.asarray(basis, dtype=np.int64).reshape(-1, T1.ambient_dim)
    records = []
    for v in vectors:
        st = second_order_lift(first_order_state(pres, v))
        rec = {"status": st.status, "flags": list(st.flags)}
        if st.f2 is not None:
            rec["f2_r1_zero"] = not np.any(matmul_mod(st.f2[None, :], st.r1, p))
        if flat and TERMINATED in st.flags:
            rec["flatness"] = flatness_check(st, k_max)
        records.append(rec)
    return {"k": pres.k, "ell": pres.ell, "T1_dim": T1.dim,
            "trivial_dim": trivial_first_order(pres).dim, "lifts": records}


# ---------------------------------------------------------------------------
# the direct extension of a plane curve through a cubic


def plane_curve_extension(d: int = 7, seed: int = 0, p: int = DEFAULT_PRIME,
                          retries: int = DEFAULT_RETRIES, curve: EmbeddedVariety | None = None) -> EmbeddedVariety:
    """Surface in P^g given by the degree-d forms D*m_i (D a cubic) together with F_C.

    The first g coordinates restrict on C to the canonical coordinates m_i
    (up to the common factor D); the last one is F_C, so the hyperplane
    z_g = 0 cuts out C in its canonical embedding.
    """
    if d < 7:
        raise ValueError("need d >= 7")
    C = curve if curve is not None else plane_curve_canonical(d, seed, p)
    F = C.data["F"]
    x = F.ring
    images = C.data["images"]
    g = len(images)
    errors = []
    for s in range(seed, seed + retries):
        D = x.random_form(3, _rng(s, "cubic"), 30)
        forms = [D * x.monomial(tuple(int(v) for v in e)) for e in images] + [F]
        coeffs = np.array([[int(c) % p for c in f.to_vector(d)] for f in forms], dtype=np.int64)
        if rank(coeffs, p) != g + 1:
            errors.append(f"seed {s}: linear system has the wrong dimension")
            continue
        X = _surface_variety(C, D, coeffs, d, g, s, p)
        check = section_check(X, C, p)
        if not (check["equal"][2] and check["equal"][3]):
            errors.append(f"seed {s}: hyperplane section mismatch")
            continue
        X.notes["section_check"] = check
        X.notes["rejected_seeds"] = errors
        return X
    raise Degenerate("; ".join(errors) or "no seed passed")


def _surface_variety(C, D, coeffs, d, g, s, p) -> EmbeddedVariety:
    x = C.data["F"].ring
    P = GradedRing.standard(g + 1)
    hC = canonical_h0(g)

    def h0(k):
        # Hilbert function of a flat extension of the canonical ring of C
        return sum(hC(j) for j in range(k + 1)) if k >= 0 else 0

    def sample(q, rng, n):
        pts = rng.integers(0, q, size=(n, 3))
        vals = monomial_values(x, d, pts, q)
        return matmul_mod(vals, (coeffs % q).T, q)

    oracle = PointsOracle(P, sample, h0, seed=s)
    return EmbeddedVariety(
        label=f"plane-extension:{d}", constructor="plane-extension", params={"d": d}, seed=C.seed,
        ring=P, oracle=oracle, dim=2, expected_h0=h0, sampler=sample, seed_used=s,
        data={"curve": C, "cubic": D, "forms": coeffs},
    )


def _t_free(ring_x: GradedRing, ring_c: GradedRing, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Positions of monomials without the last variable and their index in the smaller ring."""
    e = ring_x.exponents(k)
    free = np.nonzero(e[:, -1] == 0)[0]
    return free, ring_c.lookup(k, e[free, :-1])


def section_ideal(X: EmbeddedVariety, ring_c: GradedRing, k: int, p: int) -> Subspace:
    """(I_X + (z_g)) / (z_g) in degree k, as a subspace of the curve's P_k."""
    I = X.model(p).ideal(k)
    free, idx = _t_free(X.ring, ring_c, k)
    rows = np.zeros((I.dim, ring_c.basis_size(k)), np.int64)
    rows[:, idx] = I.basis[:, free]
    return Subspace.span(rows, p, ring_c.basis_size(k))


def section_check(X: EmbeddedVariety, C: EmbeddedVariety, p: int = DEFAULT_PRIME, degrees=(2, 3)) -> dict:
    out = {"dims": {}, "equal": {}}
    for k in degrees:
        S = section_ideal(X, C.ring, k, p)
        IC = C.model(p).ideal(k)
        out["dims"][k] = (S.dim, IC.dim)
        out["equal"][k] = S == IC
    return out


def surface_deformation(X: EmbeddedVariety, C, p: int = DEFAULT_PRIME) -> dict:
    """Read f1, f2 off the quadrics of X written as f + t*f1 + t^2*f2; f1 outside Triv means not a cone."""
    MC = _model(C, p)
    pres = presentation(MC, p)
    I = X.model(p).ideal(2)
    free, idx = _t_free(X.ring, C.ring, 2)
    proj = np.zeros((I.dim, C.ring.basis_size(2)), np.int64)
    proj[:, idx] = I.basis[:, free]
    coeff = solve(proj.T, pres.f.T, p)  # proj.T @ coeff = f.T
    if coeff is None or I.dim != pres.k:
        return {"matched": False}
    rows = matmul_mod(coeff.T, I.basis, p)  # (k, P_X,2) with t-free part f
    Rt = X.ring
    lin = _embed(Rt, pres.ring, 1, 1)
    f1 = rows[:, lin]
    f2 = rows[:, _embed(Rt, pres.ring, 0, 2)[0]]
    sol = first_order_solutions(MC, p)
    triv = trivial_first_order(pres)
    v = f1.reshape(1, -1)
    out = {"matched": True, "f1_is_solution": bool(sol.contains(v)), "not_a_cone": bool(not triv.contains(v))}
    st = first_order_state(pres, f1)
    lifted = second_order_lift(st)
    out["lift_status"] = lifted.status
    # the surface's own f2 must satisfy the second-order identity with the same r1
    R = _const_times_r(pres)
    check = (matmul_mod(st.r1.T, f1, p) + matmul_mod(f2[None, :], R, p).reshape(pres.ell, pres.n)) % p
    out["surface_f2_second_order"] = not np.any(check)
    out["surface_f2_r1_zero"] = not np.any(matmul_mod(f2[None, :], st.r1, p))
    return out
