"""Curves on rational normal scrolls: equations in the Cox ring and scroll cohomology.

A tetragonal curve is cut out of a 3-fold scroll by two relative
quadrics; a pentagonal curve is the Pfaffian locus of a skew 5x5 matrix
on a 4-fold scroll.  Everything is expressed in :class:`ScrollRing`
bidegrees (a, b) = aH + bR.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
import sympy

from ..rings import Polynomial, ScrollRing, compositions, p1_cohomology
from .points import solve_zero_dim, to_sympy


@dataclass
class ScrollCurveData:
    kind: str  # "tetragonal" or "pentagonal"
    e: tuple[int, ...]
    b: tuple[int, ...]
    a: tuple[int, ...] = ()
    ring: ScrollRing | None = None
    equations: list[Polynomial] = field(default_factory=list)
    psi: list[list[Polynomial]] | None = None

    @property
    def f(self) -> int:
        return sum(self.e)

    @property
    def d(self) -> int:
        return len(self.e)

    @property
    def genus(self) -> int:
        return self.f + (3 if self.kind == "tetragonal" else 4)

    def multiplier_degrees(self) -> list[tuple[int, int]]:
        """Bidegree shift of each equation: equation i lies in (2, -s_i)."""
        s = self.b if self.kind == "tetragonal" else self.a
        return [(2, -x) for x in s]


def balanced(total: int, parts: int) -> tuple[int, ...]:
    """Non-increasing integers differing by at most one with the given sum."""
    q, r = divmod(total, parts)
    return tuple([q + 1] * r + [q] * (parts - r))


def pentagonal_invariants(g: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Balanced (e, b) for a general pentagonal curve of genus g."""
    if g < 8:
        raise ValueError("pentagonal scroll invariants need g >= 8")
    f = g - 4
    e = balanced(f, 4)
    a = balanced(2 * g - 12, 5)
    b = tuple(f - 2 - x for x in a)
    return e, b


def check_pentagonal(e: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """Validate pentagonal invariants; returns a_i = f - 2 - b_i."""
    e, b = tuple(e), tuple(b)
    if len(e) != 4 or len(b) != 5:
        raise ValueError("pentagonal data needs 4 scroll twists and 5 integers b")
    if min(e) <= 0:
        raise ValueError("scroll twists must be positive")
    f = sum(e)
    g = f + 4
    a = tuple(f - 2 - x for x in b)
    if min(a) < 0 or min(b) < 0:
        raise ValueError(f"a_i = {a} and b_i = {b} must be >= 0")
    if sum(a) != 2 * g - 12:
        raise ValueError(f"sum a_i = {sum(a)} but 2g-12 = {2 * g - 12}")
    worst = max(b[j] - a[k] for j in range(5) for k in range(5) if j != k)
    if min(e) < worst:
        raise ValueError(f"global generation fails: min e = {min(e)} < max(b_j - a_k) = {worst}")
    return a


def tetragonal_equations(e, b1, b2, rng, bound=30) -> ScrollCurveData:
    e = tuple(e)
    if len(e) != 3 or min(e) <= 0:
        raise ValueError("tetragonal curves need three positive scroll twists")
    if not (0 <= b1 <= b2) or b1 + b2 != sum(e) - 2:
        raise ValueError("need 0 <= b1 <= b2 and b1 + b2 = f - 2")
    S = ScrollRing(e)
    eqs = [S.random_form((2, -b1), rng, bound), S.random_form((2, -b2), rng, bound)]
    return ScrollCurveData("tetragonal", e, (b1, b2), ring=S, equations=eqs)


def pfaffian4(M, idx) -> Polynomial:
    j, k, l, m = idx
    return M[j][k] * M[l][m] - M[j][l] * M[k][m] + M[j][m] * M[k][l]


def pentagonal_equations(e, b, rng, bound=30) -> ScrollCurveData:
    e, b = tuple(e), tuple(b)
    a = check_pentagonal(e, b)
    S = ScrollRing(e)
    zero = S.zero()
    psi = [[zero] * 5 for _ in range(5)]
    for j, k in combinations(range(5), 2):
        entry = S.random_form((1, a[k] - b[j]), rng, bound)
        psi[j][k] = entry
        psi[k][j] = -entry
    pf = []
    for i in range(5):
        rest = [x for x in range(5) if x != i]
        pf.append(pfaffian4(psi, rest))
    return ScrollCurveData("pentagonal", e, b, a=a, ring=S, equations=pf, psi=psi)


def signed_pfaffians(data: ScrollCurveData) -> list[Polynomial]:
    """Pfaffian vector v with psi * v = 0."""
    return [q.scale((-1) ** i) for i, q in enumerate(data.equations)]


def scroll_sampler(data_ring: ScrollRing, equations: Sequence[Polynomial], embed_exps: np.ndarray,
                   tries: int = 400):
    """Points of a curve on a scroll: fix t = (1, lam), solve the fibre in the chart y_d = 1."""
    syms = sympy.symbols(f"c0:{data_ring.n_vars}")
    d = data_ring.d
    exprs = [to_sympy(q, syms) for q in equations]

    def sample(p, rng, n):
        out = []
        for _ in range(tries):
            if len(out) >= n:
                break
            lam = int(rng.integers(1, p))
            fixed = {syms[d - 1]: 1, syms[d]: 1, syms[d + 1]: lam}
            free = list(syms[: d - 1])
            sols = solve_zero_dim([q.subs(fixed) for q in exprs], free, p)
            for s in sols:
                cox = np.array([*s, 1, 1, lam], dtype=object)
                z = [_monomial_value(cox, row, p) for row in embed_exps]
                out.append(z)
        return np.array(out[:n], dtype=np.int64).reshape(-1, len(embed_exps))

    return sample


def _monomial_value(point, exps, p) -> int:
    v = 1
    for x, k in zip(point, exps):
        if k:
            v = v * pow(int(x), int(k), p) % p
    return v


def scroll_cohomology(data: ScrollCurveData, i: int, j: int, k: int) -> int:
    """h^i(O_X(jH + kR)) on the scroll X = P(E) of dimension d over P^1."""
    d = data.d
    if i < 0 or i > d:
        return 0
    if -d < j < 0:
        return 0
    if j >= 0:
        if i >= 2:
            return 0
        weights = [k + sum(x * y for x, y in zip(alpha, data.e)) for alpha in compositions(j, d)]
        return p1_cohomology(weights)[i]
    # j <= -d: Serre duality with K_X = -dH + (f - 2)R
    return scroll_cohomology(data, d - i, -d - j, data.f - 2 - k)


def scroll_euler_characteristic(data: ScrollCurveData, j: int, k: int) -> int:
    return sum((-1) ** i * scroll_cohomology(data, i, j, k) for i in range(data.d + 1))


def chi_J_3H(data: ScrollCurveData) -> int:
    """chi(J(3H)) from the Pfaffian resolution of the curve's ideal sheaf on the scroll."""
    if data.kind != "pentagonal":
        raise ValueError("defined for pentagonal data")
    f = data.f
    chi = 0
    for ai in data.a:
        chi += scroll_euler_characteristic(data, 3 - 2, ai)
    for bi in data.b:
        chi -= scroll_euler_characteristic(data, 3 - 3, bi)
    chi += scroll_euler_characteristic(data, 3 - 5, f - 2)
    return chi
