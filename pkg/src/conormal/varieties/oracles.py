"""Section oracles: restriction maps P_k -> Gamma(L^k) in fixed bases.

An oracle only has to produce *some* matrix whose kernel is I_k.  The
row space is what matters; rows may be target monomials (substitution),
quotient coordinates (substitution followed by reduction modulo a
relation space) or sample points (evaluation).
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..exactalg import Subspace, matmul_mod, rank
from ..rings import GradedRing, Polynomial, product_table

SYMBOLIC = "SYMBOLIC"
POINTS = "POINTS"


class OracleError(RuntimeError):
    pass


class SectionOracle:
    realization = SYMBOLIC

    def __init__(self, ring: GradedRing, expected_h0: Callable[[int], int] | None = None):
        self.ring = ring
        self.expected_h0 = expected_h0

    def target_basis_dim(self, k: int, p: int) -> int:
        raise NotImplementedError

    def restriction_matrix(self, k: int, p: int) -> np.ndarray:
        raise NotImplementedError


class MonomialOracle(SectionOracle):
    """Variables map to monomials of a target ring (Veronese, Segre, scrolls).

    ``images`` holds one target exponent vector per variable, and
    ``target_degree(k)`` is the target degree of products of k of them.
    """

    def __init__(self, ring, target: GradedRing, images: Sequence[Sequence[int]],
                 target_degree: Callable[[int], tuple], expected_h0=None):
        super().__init__(ring, expected_h0)
        self.target = target
        self.images = np.array(images, dtype=np.int64).reshape(ring.n_vars, target.n_vars)
        self.target_degree = target_degree

    def target_basis_dim(self, k, p=0):
        return self.target.basis_size(self.target_degree(k))

    def column_targets(self, k: int) -> np.ndarray:
        exps = self.ring.exponents(k) @ self.images
        idx = self.target.lookup(self.target_degree(k), exps)
        if np.any(idx < 0):
            raise OracleError("monomial image outside target degree")
        return idx

    def restriction_matrix(self, k, p):
        idx = self.column_targets(k)
        m = np.zeros((self.target_basis_dim(k), len(idx)), np.int64)
        m[idx, np.arange(len(idx))] = 1
        return m


def relation_space(target: GradedRing, relations: Sequence[Polynomial], degree, p: int) -> np.ndarray:
    """Rows spanning sum_i g_i * (target monomials of complementary degree)."""
    degree = tuple(degree)
    n = target.basis_size(degree)
    blocks = []
    for g in relations:
        dg = g.degree
        comp = tuple(a - b for a, b in zip(degree, dg))
        m = target.basis_size(comp)
        if m == 0:
            continue
        coeffs = g.to_vector(dg, p)
        table = product_table(target, dg, comp)  # (len(basis dg), m)
        rows = np.zeros((m, n), np.int64)
        nz = np.nonzero(coeffs)[0]
        for a in nz:
            rows[np.arange(m), table[a]] = (rows[np.arange(m), table[a]] + coeffs[a]) % p
        blocks.append(rows)
    if not blocks:
        return np.zeros((0, n), np.int64)
    return np.vstack(blocks)


class QuotientOracle(SectionOracle):
    """Substitution into a target ring followed by reduction modulo relations.

    Used for curves cut out of a plane or a scroll, and for complete
    intersections (identity substitution).
    """

    def __init__(self, inner: MonomialOracle, relations: Sequence[Polynomial], expected_h0=None):
        super().__init__(inner.ring, expected_h0)
        self.inner = inner
        self.relations = list(relations)
        self._quot: dict = {}

    def _quotient(self, k, p) -> Subspace:
        key = (k, p)
        if key not in self._quot:
            deg = self.inner.target_degree(k)
            W = relation_space(self.inner.target, self.relations, deg, p)
            self._quot[key] = Subspace.span(W, p, self.inner.target_basis_dim(k))
        return self._quot[key]

    def target_basis_dim(self, k, p):
        W = self._quotient(k, p)
        return W.ambient_dim - W.dim

    def restriction_matrix(self, k, p):
        W = self._quotient(k, p)
        idx = self.inner.column_targets(k)
        # quotient coordinates of each target monomial, then pick columns
        Q = W.quotient_map()
        return np.ascontiguousarray(Q[:, idx])


class PolynomialOracle(SectionOracle):
    """Variables map to polynomials (Pluecker minors); products are expanded."""

    def __init__(self, ring, target: GradedRing, images: Sequence[Polynomial],
                 target_degree: Callable[[int], tuple], expected_h0=None):
        super().__init__(ring, expected_h0)
        self.target = target
        self.images = list(images)
        self.target_degree = target_degree

    def target_basis_dim(self, k, p=0):
        return self.target.basis_size(self.target_degree(k))

    def restriction_matrix(self, k, p):
        deg = self.target_degree(k)
        cols = []
        cache: dict = {(): Polynomial(self.target, {(0,) * self.target.n_vars: 1})}
        for e in self.ring.degree_basis(k):
            # build products incrementally along the exponent vector prefix
            key = []
            prod = cache[()]
            for i, x in enumerate(e):
                for _ in range(x):
                    key.append(i)
                    kt = tuple(key)
                    if kt not in cache:
                        cache[kt] = prod * self.images[i]
                    prod = cache[kt]
            cols.append(prod.to_vector(deg, p))
        if not cols:
            return np.zeros((self.target_basis_dim(k), 0), np.int64)
        return np.stack(cols, axis=1).astype(np.int64)


def monomial_values(ring: GradedRing, k: int, points: np.ndarray, p: int) -> np.ndarray:
    """Matrix (n_points x dim P_k) of degree-k monomials evaluated mod p."""
    pts = np.asarray(points, dtype=np.int64) % p
    n = pts.shape[0]
    exps = ring.exponents(k)
    if exps.shape[0] == 0:
        return np.zeros((n, 0), np.int64)
    # powers[v][e] = pts[:, v] ** e
    powers = np.ones((ring.n_vars, k + 1, n), np.int64)
    for e in range(1, k + 1):
        powers[:, e] = powers[:, e - 1] * pts.T % p
    out = np.ones((n, exps.shape[0]), np.int64)
    for v in range(ring.n_vars):
        out = out * powers[v][exps[:, v]].T % p
    return out


class PointsOracle(SectionOracle):
    """Evaluation at sampled points with a rank-saturation check.

    ``sampler(p, rng, n)`` returns an ``n x n_vars`` array of points of
    the cone.  For each degree we take ``ceil(1.2 * h0)`` points (h0 the
    expected dimension, or a growing guess), then add 20% more and require
    the rank not to move.  ``fixed`` samplers (finite sets) skip this.
    """

    realization = POINTS

    def __init__(self, ring, sampler: Callable, expected_h0=None, seed: int = 0,
                 fixed: bool = False, max_rounds: int = 12):
        super().__init__(ring, expected_h0)
        self.sampler = sampler
        self.seed = seed
        self.fixed = fixed
        self.max_rounds = max_rounds
        self._mats: dict = {}
        self.saturation_log: dict = {}

    def _points(self, p, n, salt):
        rng = np.random.default_rng([self.seed, p % (2**32), salt])
        return np.asarray(self.sampler(p, rng, n), dtype=np.int64)

    def target_basis_dim(self, k, p):
        return self.restriction_matrix(k, p).shape[0]

    def restriction_matrix(self, k, p):
        key = (k, p)
        if key in self._mats:
            return self._mats[key]
        P_k = self.ring.basis_size(k)
        if self.fixed:
            pts = self._points(p, 0, 0)
            m = monomial_values(self.ring, k, pts, p)
            self.saturation_log[key] = (len(pts), rank(m, p), True)
            self._mats[key] = m
            return m
        guess = self.expected_h0(k) if self.expected_h0 else min(P_k, 50)
        n = min(math.ceil(1.2 * guess) + 2, P_k + 2)
        pts = self._points(p, n, 1000 * k)
        m = monomial_values(self.ring, k, pts, p)
        r = rank(m, p)
        for rnd in range(self.max_rounds):
            extra = max(1, math.ceil(0.2 * len(pts)))
            more = self._points(p, extra, 1000 * k + rnd + 1)
            m2 = np.vstack([m, monomial_values(self.ring, k, more, p)])
            r2 = rank(m2, p)
            pts = np.vstack([pts, more])
            m = m2
            if r2 == r and r < len(pts):
                self.saturation_log[key] = (len(pts), r, True)
                break
            r = r2
        else:
            self.saturation_log[key] = (len(pts), r, False)
            raise OracleError(f"evaluation rank did not saturate in degree {k}")
        self._mats[key] = m
        return m
