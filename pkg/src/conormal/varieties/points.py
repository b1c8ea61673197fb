"""Finding F_p-points on catalog varieties and the smoothness spot check."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import sympy

from ..exactalg import DEFAULT_PRIME, matmul_mod, rank
from ..rings import Polynomial
from .base import EmbeddedVariety, differentiate_rows
from .oracles import monomial_values

PASS = "PASS"
FAIL = "FAIL"
NO_POINTS_FOUND = "NO_POINTS_FOUND"


def to_sympy(poly: Polynomial, symbols: Sequence[sympy.Symbol]):
    expr = sympy.Integer(0)
    for e, c in poly.terms.items():
        term = sympy.Integer(c)
        for s, k in zip(symbols, e):
            if k:
                term *= s**k
        expr += term
    return expr


def roots_mod_p(expr, var, p: int) -> list[int]:
    """Roots in F_p of a univariate polynomial."""
    poly = sympy.Poly(expr, var, modulus=p)
    if poly.is_zero:
        raise ValueError("zero polynomial has every root")
    if poly.degree() <= 0:
        return []
    out = []
    for fac, _ in poly.factor_list()[1]:
        if fac.degree() == 1:
            a, b = (int(c) for c in fac.all_coeffs())
            out.append((-b * pow(a, -1, p)) % p)
    return sorted(set(out))


def solve_zero_dim(polys, variables, p: int, limit: int = 50) -> list[tuple[int, ...]]:
    """F_p-rational solutions of a zero-dimensional system (lex Groebner basis)."""
    polys = [sympy.expand(q) for q in polys]
    polys = [q for q in polys if q != 0]
    if not variables:
        return [()] if all(int(q) % p == 0 for q in polys) else []
    if not polys:
        return []
    G = sympy.groebner(polys, *variables, order="lex", modulus=p)
    exprs = list(G.exprs)
    if any(e.is_number and int(e) % p != 0 for e in exprs):
        return []
    last = variables[-1]
    uni = [e for e in exprs if e.free_symbols <= {last} and not e.is_number]
    if not uni:
        return []  # positive-dimensional in this chart
    roots = roots_mod_p(uni[0], last, p)
    out = []
    for r in roots:
        sub = [e.subs(last, r) for e in exprs]
        for rest in solve_zero_dim(sub, variables[:-1], p, limit):
            out.append((*rest, r))
            if len(out) >= limit:
                return out
    return out


def slice_sampler(forms: Sequence[Polynomial], dim: int, tries: int = 200):
    """Points of V(forms) with z_0 = 1 and z_1..z_dim random, solved for the rest."""
    ring = forms[0].ring
    syms = sympy.symbols(f"s0:{ring.n_vars}")

    def sample(p, rng, n):
        out = []
        exprs = [to_sympy(f, syms) for f in forms]
        for _ in range(tries):
            if len(out) >= n:
                break
            fixed = {syms[0]: 1}
            for i in range(1, dim + 1):
                fixed[syms[i]] = int(rng.integers(1, p))
            free = [s for s in syms if s not in fixed]
            sols = solve_zero_dim([e.subs(fixed) for e in exprs], free, p)
            for s in sols:
                pt = [0] * ring.n_vars
                for sym, v in fixed.items():
                    pt[syms.index(sym)] = v
                for sym, v in zip(free, s):
                    pt[syms.index(sym)] = v
                out.append(pt)
        return np.array(out[:n], dtype=np.int64).reshape(-1, ring.n_vars)

    return sample


def generator_rows(X: EmbeddedVariety, p: int, d_max: int = 3) -> list[tuple[int, np.ndarray]]:
    from ..ideals import minimal_generators

    gens = minimal_generators(X, d_max, p)
    return [(d, rows) for d, rows in gens.items() if rows.shape[0]]


def jacobian_at(X: EmbeddedVariety, point, p: int, d_max: int = 3) -> np.ndarray:
    """Jacobian matrix of the minimal generators (degree <= d_max) at a point."""
    pt = np.asarray(point, dtype=np.int64).reshape(1, -1) % p
    rows = []
    for d, gens in generator_rows(X, p, d_max):
        D = differentiate_rows(X.ring, d, gens, p)  # (n_vars, n_gens, P_{d-1})
        vals = monomial_values(X.ring, d - 1, pt, p)[0]
        J = np.zeros((D.shape[1], D.shape[0]), np.int64)
        for v in range(D.shape[0]):
            J[:, v] = _dot_mod(D[v], vals, p)
        rows.append(J)
    if not rows:
        return np.zeros((0, X.n_vars), np.int64)
    return np.vstack(rows)


def _dot_mod(A: np.ndarray, x: np.ndarray, p: int) -> np.ndarray:
    return matmul_mod(A, np.asarray(x, dtype=np.int64).reshape(-1, 1), p)[:, 0]


def vanishes_at(X: EmbeddedVariety, point, p: int, d_max: int = 3) -> bool:
    pt = np.asarray(point, dtype=np.int64).reshape(1, -1) % p
    for d, gens in generator_rows(X, p, d_max):
        vals = monomial_values(X.ring, d, pt, p)[0]
        if np.any(_dot_mod(gens, vals, p)):
            return False
    return True


def smoothness_spot_check(X: EmbeddedVariety, n_points: int = 5, seed: int = 0,
                          p: int = DEFAULT_PRIME, points=None) -> dict:
    """Jacobian rank = codim at sampled points; PASS iff every point passes."""
    if points is None:
        if X.sampler is None:
            return {"status": NO_POINTS_FOUND, "n_points": 0, "ranks": []}
        rng = np.random.default_rng([seed, 7919])
        try:
            points = X.sampler(p, rng, n_points)
        except Exception as exc:  # sampling failures are reported, not raised
            return {"status": NO_POINTS_FOUND, "n_points": 0, "ranks": [], "error": str(exc)}
    points = np.asarray(points, dtype=np.int64).reshape(-1, X.n_vars)
    if len(points) == 0:
        return {"status": NO_POINTS_FOUND, "n_points": 0, "ranks": []}
    ranks = []
    on_x = []
    for q in points:
        on_x.append(vanishes_at(X, q, p))
        ranks.append(rank(jacobian_at(X, q, p), p))
    ok = all(r == X.codim for r in ranks) and all(on_x)
    return {
        "status": PASS if ok else FAIL,
        "n_points": int(len(points)),
        "ranks": [int(r) for r in ranks],
        "codim": X.codim,
        "points_on_variety": bool(all(on_x)),
    }
