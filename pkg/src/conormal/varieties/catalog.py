"""Catalog constructors.  Each returns an :class:`EmbeddedVariety`.

Randomized constructors take an explicit seed and retry with seeds
``seed, seed+1, ...`` (at most ``retries``) when a genericity check
fails.  The seed that passed is stored in ``seed_used``.
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Callable, Sequence

import numpy as np

from ..exactalg import DEFAULT_PRIME, rank
from ..rings import BlockRing, GradedRing, Polynomial, ScrollRing, p1_cohomology
from .base import Degenerate, EmbeddedVariety
from .oracles import MonomialOracle, PointsOracle, PolynomialOracle, QuotientOracle, monomial_values
from .points import PASS, roots_mod_p, slice_sampler, smoothness_spot_check, to_sympy
from .scrolls import (
    ScrollCurveData,
    pentagonal_equations,
    pentagonal_invariants,
    scroll_sampler,
    tetragonal_equations,
)

DEFAULT_RETRIES = 8
UNSUPPORTED_PENTAGONAL_GENERA = (10, 15)


def canonical_h0(g: int) -> Callable[[int], int]:
    def h0(k: int) -> int:
        if k < 0:
            return 0
        if k == 0:
            return 1
        if k == 1:
            return g
        return (2 * k - 1) * (g - 1)

    return h0


def hilbert_check(X: EmbeddedVariety, degrees, p: int = DEFAULT_PRIME) -> list[tuple[int, int, int]]:
    """Degrees where dim A_k differs from the expected value: (k, got, expected)."""
    M = X.model(p)
    bad = []
    for k in degrees:
        got, want = M.a_dim(k), X.expected_h0(k)
        if got != want:
            bad.append((k, got, want))
    return bad


def with_retry(build: Callable[[int], EmbeddedVariety], seed: int, retries: int = DEFAULT_RETRIES) -> EmbeddedVariety:
    errors = []
    for s in range(seed, seed + retries):
        try:
            X = build(s)
        except Degenerate as exc:
            errors.append(f"seed {s}: {exc}")
            continue
        X.seed = seed
        X.seed_used = s
        X.notes["rejected_seeds"] = errors
        return X
    raise Degenerate("; ".join(errors) or "no seed passed")


def _rng(seed: int, tag: str) -> np.random.Generator:
    return np.random.default_rng([seed, sum(ord(c) * 131**i for i, c in enumerate(tag)) % 2**32])


# ---------------------------------------------------------------------------
# monomial embeddings


def veronese(n: int, r: int) -> EmbeddedVariety:
    if n < 1 or r < 1:
        raise ValueError("need n >= 1 and r >= 1")
    src = GradedRing.standard(n + 1, "x")
    images = src.degree_basis(r)
    P = GradedRing.standard(len(images))
    h0 = lambda k: comb(n + r * k, n) if k >= 0 else 0
    oracle = MonomialOracle(P, src, images, lambda k: (r * k,), h0)
    img = np.array(images, dtype=np.int64)

    def sample(p, rng, m):
        x = rng.integers(1, p, size=(m, n + 1))
        return monomial_values(src, r, x, p)

    return EmbeddedVariety(
        label=f"veronese:{n},{r}", constructor="veronese", params={"n": n, "r": r}, seed=None,
        ring=P, oracle=oracle, dim=n, degree=r**n, expected_h0=h0, sampler=sample,
        genus=0 if n == 1 else None, data={"images": img},
    )


def rational_normal_curve(r: int) -> EmbeddedVariety:
    return veronese(1, r)


def segre(n: int, m: int) -> EmbeddedVariety:
    if n < 1 or m < 1:
        raise ValueError("need n, m >= 1")
    T = BlockRing((n + 1, m + 1))
    images = []
    for i in range(n + 1):
        for j in range(m + 1):
            e = [0] * (n + m + 2)
            e[i] = 1
            e[n + 1 + j] = 1
            images.append(e)
    P = GradedRing.standard(len(images))
    h0 = lambda k: comb(n + k, n) * comb(m + k, m) if k >= 0 else 0
    oracle = MonomialOracle(P, T, images, lambda k: (k, k), h0)
    img = np.array(images, dtype=np.int64)

    def sample(p, rng, cnt):
        xy = rng.integers(1, p, size=(cnt, n + m + 2))
        return _eval_monomials(xy, img, p)

    return EmbeddedVariety(
        label=f"segre:{n},{m}", constructor="segre", params={"n": n, "m": m}, seed=None,
        ring=P, oracle=oracle, dim=n + m, degree=comb(n + m, n), expected_h0=h0, sampler=sample,
    )


def _eval_monomials(pts: np.ndarray, exps: np.ndarray, p: int) -> np.ndarray:
    out = np.ones((pts.shape[0], exps.shape[0]), np.int64)
    for v in range(exps.shape[1]):
        for e in range(1, int(exps[:, v].max(initial=0)) + 1):
            mask = exps[:, v] >= e
            out[:, mask] = out[:, mask] * (pts[:, v:v + 1] % p) % p
    return out


def scroll_h0(e: Sequence[int], k: int, b: int = 0) -> int:
    S = ScrollRing(e)
    return p1_cohomology(S.weights(k, b))[0] if k >= 0 else 0


def scroll(e: Sequence[int]) -> EmbeddedVariety:
    e = tuple(sorted((int(x) for x in e), reverse=True))
    if min(e) <= 0 or sum(e) < 2:
        raise ValueError("need all e_i > 0 and f >= 2")
    S = ScrollRing(e)
    images = S.degree_basis((1, 0))
    P = GradedRing.standard(len(images))
    h0 = lambda k: scroll_h0(e, k)
    oracle = MonomialOracle(P, S, images, lambda k: (k, 0), h0)
    img = np.array(images, dtype=np.int64)

    def sample(p, rng, m):
        cox = rng.integers(1, p, size=(m, S.n_vars))
        return _eval_monomials(cox, img, p)

    return EmbeddedVariety(
        label="scroll:" + ",".join(map(str, e)), constructor="scroll", params={"e": list(e)}, seed=None,
        ring=P, oracle=oracle, dim=len(e), degree=sum(e), expected_h0=h0, sampler=sample,
        data={"images": img},
    )


# ---------------------------------------------------------------------------
# complete intersections and plane curves


def koszul_hilbert(N: int, degrees: Sequence[int]) -> Callable[[int], int]:
    """Hilbert function of P / (regular sequence of the given degrees)."""

    def h(k: int) -> int:
        if k < 0:
            return 0
        total = 0
        # numerator prod (1 - s^d) expanded over subsets
        for r in range(len(degrees) + 1):
            for sub in combinations(degrees, r):
                s = sum(sub)
                if s <= k:
                    total += (-1) ** r * comb(N + k - s, N)
        return total

    return h


def complete_intersection_from_forms(forms: Sequence[Polynomial], label: str, seed=None,
                                     constructor: str = "ci", params=None, sampler=None) -> EmbeddedVariety:
    P = forms[0].ring
    N = P.n_vars - 1
    degrees = [f.total_degree for f in forms]
    ident = np.eye(P.n_vars, dtype=np.int64)
    inner = MonomialOracle(P, P, ident, lambda k: (k,))
    h0 = koszul_hilbert(N, degrees)
    oracle = QuotientOracle(inner, forms, h0)
    dim = N - len(degrees)
    genus = None
    if dim == 1:
        deg = int(np.prod(degrees))
        k = sum(degrees) + 2  # past the regularity
        genus = deg * k + 1 - h0(k)
    return EmbeddedVariety(
        label=label, constructor=constructor, params=params or {"N": N, "degrees": degrees}, seed=seed,
        ring=P, oracle=oracle, dim=dim, degree=int(np.prod(degrees)), genus=genus, expected_h0=h0,
        sampler=sampler or slice_sampler(forms, dim), data={"forms": list(forms)},
    )


def complete_intersection(N: int, degrees: Sequence[int], seed: int = 0, p: int = DEFAULT_PRIME,
                          retries: int = DEFAULT_RETRIES, bound: int = 30) -> EmbeddedVariety:
    degrees = [int(d) for d in degrees]
    if not (1 <= len(degrees) < N) or min(degrees) < 2:
        raise ValueError("need 1 <= #degrees < N and every degree >= 2")

    def build(s):
        rng = _rng(s, "ci")
        P = GradedRing.standard(N + 1)
        forms = [P.random_form(d, rng, bound) for d in sorted(degrees)]
        X = complete_intersection_from_forms(
            forms, f"ci:{N}," + ",".join(map(str, degrees)), seed=s, params={"N": N, "degrees": degrees})
        bad = hilbert_check(X, range(1, max(degrees) + 3), p)
        if bad:
            raise Degenerate(f"Hilbert function mismatch {bad}")
        return X

    return with_retry(build, seed, retries)


def genus4_canonical(seed: int = 0, **kw) -> EmbeddedVariety:
    X = complete_intersection(3, [2, 3], seed, **kw)
    X.label = "genus4"
    return X


def genus5_canonical(seed: int = 0, **kw) -> EmbeddedVariety:
    X = complete_intersection(4, [2, 2, 2], seed, **kw)
    X.label = "genus5"
    return X


def plane_curve_sampler(F: Polynomial, images: np.ndarray, tries: int = 400):
    import sympy

    x = sympy.symbols("x0:3")
    expr = to_sympy(F, x)

    def sample(p, rng, n):
        out = []
        for _ in range(tries):
            if len(out) >= n:
                break
            a = int(rng.integers(0, p))
            uni = expr.subs({x[0]: 1, x[1]: a})
            if sympy.Poly(uni, x[2], modulus=p).is_zero:
                continue
            for r in roots_mod_p(uni, x[2], p):
                out.append(_eval_monomials(np.array([[1, a, r]]), images, p)[0])
        return np.array(out[:n], dtype=np.int64).reshape(-1, len(images))

    return sample


def plane_points(F: Polynomial, p: int, rng, n: int) -> np.ndarray:
    """Points (x0:x1:x2) of the plane curve F = 0."""
    ident = np.eye(3, dtype=np.int64)
    return plane_curve_sampler(F, ident)(p, rng, n)


def plane_curve_is_smooth_at(F: Polynomial, pts: np.ndarray, p: int) -> bool:
    grads = [F.derivative(i) for i in range(3)]
    for q in pts:
        if all(g.evaluate(q, p) == 0 for g in grads):
            return False
    return True


def plane_curve_form(d: int, seed: int, bound: int = 30) -> Polynomial:
    x = GradedRing.standard(3, "x")
    return x.random_form(d, _rng(seed, "plane"), bound)


def plane_curve_canonical(d: int, seed: int = 0, p: int = DEFAULT_PRIME, retries: int = DEFAULT_RETRIES,
                          n_check: int = 8) -> EmbeddedVariety:
    if d < 5:
        raise ValueError("need d >= 5")
    g = (d - 1) * (d - 2) // 2

    def build(s):
        F = plane_curve_form(d, s)
        pts = plane_points(F, p, _rng(s, "pts"), n_check)
        if len(pts) == 0 or not plane_curve_is_smooth_at(F, pts, p):
            raise Degenerate("plane curve singular at a sampled point")
        X = plane_canonical_from_form(F, seed=s)
        bad = hilbert_check(X, range(1, 4), p)
        if bad:
            raise Degenerate(f"Hilbert function mismatch {bad}")
        return X

    return with_retry(build, seed, retries)


def plane_canonical_from_form(F: Polynomial, seed=None) -> EmbeddedVariety:
    x = F.ring
    d = F.total_degree
    g = (d - 1) * (d - 2) // 2
    images = x.degree_basis(d - 3)
    P = GradedRing.standard(len(images))
    inner = MonomialOracle(P, x, images, lambda k: (k * (d - 3),))
    h0 = canonical_h0(g)
    oracle = QuotientOracle(inner, [F], h0)
    img = np.array(images, dtype=np.int64)
    return EmbeddedVariety(
        label=f"plane-canonical:{d}", constructor="plane-canonical", params={"d": d}, seed=seed,
        ring=P, oracle=oracle, dim=1, genus=g, degree=2 * g - 2, expected_h0=h0,
        sampler=plane_curve_sampler(F, img), data={"F": F, "images": img},
    )


# ---------------------------------------------------------------------------
# curves on scrolls


def _scroll_curve_variety(data: ScrollCurveData, label, constructor, params, seed) -> EmbeddedVariety:
    S = data.ring
    images = S.degree_basis((1, 0))
    P = GradedRing.standard(len(images))
    inner = MonomialOracle(P, S, images, lambda k: (k, 0))
    g = data.genus
    h0 = canonical_h0(g)
    oracle = QuotientOracle(inner, data.equations, h0)
    img = np.array(images, dtype=np.int64)
    return EmbeddedVariety(
        label=label, constructor=constructor, params=params, seed=seed, ring=P, oracle=oracle,
        dim=1, genus=g, degree=2 * g - 2, expected_h0=h0,
        sampler=scroll_sampler(S, data.equations, img), data=data,
    )


def _validate_curve(X: EmbeddedVariety, p: int, n_points: int, seed: int):
    bad = hilbert_check(X, range(1, 5), p)
    if bad:
        raise Degenerate(f"Hilbert function mismatch {bad}")
    if n_points:
        res = smoothness_spot_check(X, n_points, seed, p)
        if res["status"] != PASS:
            raise Degenerate(f"smoothness spot check: {res['status']} {res.get('ranks')}")
        X.notes["smoothness"] = res


def tetragonal_curve(e: Sequence[int], b1: int, b2: int, seed: int = 0, p: int = DEFAULT_PRIME,
                     retries: int = DEFAULT_RETRIES, n_points: int = 3) -> EmbeddedVariety:
    e = tuple(sorted((int(x) for x in e), reverse=True))
    params = {"e": list(e), "b": [int(b1), int(b2)]}
    label = "tetragonal:" + ",".join(map(str, e)) + f",b={b1},{b2}"

    def build(s):
        data = tetragonal_equations(e, b1, b2, _rng(s, "tetragonal"))
        X = _scroll_curve_variety(data, label, "tetragonal", params, s)
        _validate_curve(X, p, n_points, s)
        return X

    return with_retry(build, seed, retries)


def pentagonal_curve(e: Sequence[int] | None = None, b: Sequence[int] | None = None, seed: int = 0,
                     g: int | None = None, p: int = DEFAULT_PRIME, retries: int = DEFAULT_RETRIES,
                     n_points: int = 3) -> EmbeddedVariety:
    if e is None or b is None:
        if g is None:
            raise ValueError("give either (e, b) or g")
        if g in UNSUPPORTED_PENTAGONAL_GENERA:
            raise ValueError(f"genus {g} needs a non-balanced construction; unsupported")
        e, b = pentagonal_invariants(g)
    e = tuple(int(x) for x in e)
    b = tuple(int(x) for x in b)
    params = {"e": list(e), "b": list(b)}
    label = "pentagonal:" + ",".join(map(str, e)) + ",b=" + ",".join(map(str, b))

    def build(s):
        data = pentagonal_equations(e, b, _rng(s, "pentagonal"))
        X = _scroll_curve_variety(data, label, "pentagonal", params, s)
        _validate_curve(X, p, n_points, s)
        return X

    return with_retry(build, seed, retries)


# ---------------------------------------------------------------------------
# Grassmannian and points


def g25_h0(k: int) -> int:
    if k < 0:
        return 0
    return (k + 1) * (k + 2) ** 2 * (k + 3) ** 2 * (k + 4) // 144


PLUECKER_PAIRS = list(combinations(range(5), 2))


def _g25_sample(p, rng, n):
    A = rng.integers(0, p, size=(n, 2, 5))
    out = np.zeros((n, 10), np.int64)
    for c, (i, j) in enumerate(PLUECKER_PAIRS):
        out[:, c] = (A[:, 0, i] * A[:, 1, j] - A[:, 0, j] * A[:, 1, i]) % p
    return out


def grassmannian_g25(realization: str = "points", seed: int = 0) -> EmbeddedVariety:
    P = GradedRing.standard(10)
    if realization == "points":
        oracle = PointsOracle(P, _g25_sample, g25_h0, seed=seed)
    elif realization == "symbolic":
        T = BlockRing((5, 5))
        x = [T.var(i) for i in range(5)]
        y = [T.var(5 + i) for i in range(5)]
        minors = [x[i] * y[j] - x[j] * y[i] for i, j in PLUECKER_PAIRS]
        oracle = PolynomialOracle(P, T, minors, lambda k: (k, k), g25_h0)
    else:
        raise ValueError("realization must be 'points' or 'symbolic'")
    return EmbeddedVariety(
        label="g25", constructor="g25", params={"realization": realization}, seed=seed,
        ring=P, oracle=oracle, dim=6, degree=5, expected_h0=g25_h0, sampler=_g25_sample,
        seed_used=seed,
    )


def gorenstein_points5(seed: int = 0, p: int = DEFAULT_PRIME, retries: int = DEFAULT_RETRIES,
                       bound: int = 20) -> EmbeddedVariety:
    P = GradedRing.standard(4)

    def build(s):
        rng = _rng(s, "points5")
        pts = rng.integers(-bound, bound + 1, size=(5, 4))
        for quad in combinations(range(5), 4):
            if rank(pts[list(quad)] % p, p) < 4:
                raise Degenerate("four of the points are coplanar")
        fixed = pts.copy()
        h0 = lambda k: 0 if k < 0 else (1 if k == 0 else (4 if k == 1 else 5))
        oracle = PointsOracle(P, lambda p_, rng_, n: fixed, h0, seed=s, fixed=True)
        return EmbeddedVariety(
            label="points5", constructor="points5", params={}, seed=s, ring=P, oracle=oracle,
            dim=0, degree=5, expected_h0=h0, sampler=lambda p_, rng_, n: fixed[:n],
            data={"points": fixed.tolist()},
        )

    return with_retry(build, seed, retries)
