"""Graded polynomial rings with fixed monomial bases.

Monomials of a given (multi)degree are listed in lexicographically
descending order of their exponent vectors, e.g. ``z0^2, z0*z1, z1^2``.
This order never changes, so cached subspaces stay valid.

Coefficients of :class:`Polynomial` are exact Python integers; they are
reduced modulo a prime only when converted to coordinate vectors.  This
keeps every random instance integrally defined, so the same object can
be re-examined under a second prime.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


def compositions(total: int, parts: int) -> Iterable[Exponent]:
    """Exponent vectors of length ``parts`` summing to ``total``, lex-descending."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first, *rest)


class GradedRing:
    """Polynomial ring whose variables carry integer multidegrees."""

    def __init__(self, names: Sequence[str], degrees: Sequence[Sequence[int]] | None = None):
        self.names = tuple(names)
        if degrees is None:
            degrees = [(1,)] * len(self.names)
        self.degrees = tuple(tuple(int(x) for x in d) for d in degrees)
        if len(self.degrees) != len(self.names):
            raise ValueError("one degree per variable")
        ranks = {len(d) for d in self.degrees}
        if len(ranks) > 1:
            raise ValueError("inconsistent grading rank")
        self.grading_rank = ranks.pop() if ranks else 1
        self._bases: dict = {}

    @classmethod
    def standard(cls, n_vars: int, prefix: str = "z") -> "GradedRing":
        return cls([f"{prefix}{i}" for i in range(n_vars)])

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def is_standard(self) -> bool:
        return all(d == (1,) for d in self.degrees)

    def _normalize_degree(self, d) -> tuple[int, ...]:
        if isinstance(d, (int, np.integer)):
            d = (int(d),)
        d = tuple(int(x) for x in d)
        if len(d) != self.grading_rank:
            raise ValueError(f"degree {d} has wrong rank")
        return d

    def _enumerate(self, d: tuple[int, ...]) -> list[Exponent]:
        if self.is_standard:
            return list(compositions(d[0], self.n_vars)) if d[0] >= 0 else []
        raise NotImplementedError("degree_basis only for standard gradings; subclass for others")

    def degree_basis(self, d) -> list[Exponent]:
        d = self._normalize_degree(d)
        if d not in self._bases:
            self._bases[d] = self._enumerate(d)
        return self._bases[d]

    def basis_size(self, d) -> int:
        return len(self.degree_basis(d))

    def index(self, d) -> dict[Exponent, int]:
        d = self._normalize_degree(d)
        key = ("index", d)
        if key not in self._bases:
            self._bases[key] = {e: i for i, e in enumerate(self.degree_basis(d))}
        return self._bases[key]

    def exponents(self, d) -> np.ndarray:
        """Exponent matrix (basis_size x n_vars) of the degree-d basis."""
        d = self._normalize_degree(d)
        key = ("exps", d)
        if key not in self._bases:
            b = self.degree_basis(d)
            self._bases[key] = np.array(b, dtype=np.int64).reshape(len(b), self.n_vars)
        return self._bases[key]

    def _codes(self, d):
        # mixed-radix codes of the degree-d basis; radix = max exponent + 1
        key = ("sorted", d)
        if key not in self._bases:
            exps = self.exponents(d)
            base = int(exps.max()) + 1 if exps.size else 1
            if base ** self.n_vars >= 2**62:
                raise ValueError("degree too large for vectorized lookup")
            radix = base ** np.arange(self.n_vars, dtype=np.int64)[::-1]
            codes = exps @ radix
            order = np.argsort(codes, kind="stable")
            self._bases[key] = (codes[order], order, base, radix)
        return self._bases[key]

    def lookup(self, d, exps: np.ndarray) -> np.ndarray:
        """Vectorized positions of exponent rows in degree_basis(d); -1 if absent."""
        d = self._normalize_degree(d)
        codes, order, base, radix = self._codes(d)
        exps = np.asarray(exps, dtype=np.int64)
        shape = exps.shape[:-1]
        flat = exps.reshape(-1, self.n_vars)
        if len(codes) == 0:
            return np.full(shape, -1, np.int64)
        ok = np.all((flat >= 0) & (flat < base), axis=1)
        q = np.where(ok, flat @ radix, -1)
        pos = np.minimum(np.searchsorted(codes, q), len(codes) - 1)
        found = ok & (codes[pos] == q)
        return np.where(found, order[pos], -1).reshape(shape)

    def degree_of(self, e: Exponent) -> tuple[int, ...]:
        out = [0] * self.grading_rank
        for x, d in zip(e, self.degrees):
            for r in range(self.grading_rank):
                out[r] += x * d[r]
        return tuple(out)

    def var(self, i: int) -> "Polynomial":
        e = [0] * self.n_vars
        e[i] = 1
        return Polynomial(self, {tuple(e): 1})

    def monomial(self, e: Exponent, coeff: int = 1) -> "Polynomial":
        return Polynomial(self, {tuple(e): coeff})

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def from_vector(self, d, vec) -> "Polynomial":
        basis = self.degree_basis(d)
        return Polynomial(self, {basis[i]: int(c) for i, c in enumerate(vec) if c})

    def random_form(self, d, rng: np.random.Generator, bound: int = 50) -> "Polynomial":
        """Form with independent integer coefficients in [-bound, bound]."""
        basis = self.degree_basis(d)
        coeffs = rng.integers(-bound, bound + 1, size=len(basis))
        return Polynomial(self, {e: int(c) for e, c in zip(basis, coeffs) if c})

    def __eq__(self, other):
        return isinstance(other, GradedRing) and (self.names, self.degrees) == (other.names, other.degrees)

    def __hash__(self):
        return hash((self.names, self.degrees))

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(self.names)})"


class BlockRing(GradedRing):
    """Variables split into blocks; block i has degree e_i (multigrading).

    Houses the targets of Segre maps and of Pluecker minors.
    """

    def __init__(self, block_sizes: Sequence[int], prefixes: Sequence[str] | None = None):
        self.block_sizes = tuple(int(b) for b in block_sizes)
        r = len(self.block_sizes)
        prefixes = prefixes or [chr(ord("x") + i) if i < 3 else f"w{i}_" for i in range(r)]
        names, degrees = [], []
        for i, b in enumerate(self.block_sizes):
            unit = tuple(1 if j == i else 0 for j in range(r))
            for v in range(b):
                names.append(f"{prefixes[i]}{v}")
                degrees.append(unit)
        super().__init__(names, degrees)

    def _enumerate(self, d) -> list[Exponent]:
        if any(x < 0 for x in d):
            return []
        out: list[Exponent] = [()]
        for b, k in zip(self.block_sizes, d):
            out = [e + c for e in out for c in compositions(k, b)]
        return out


class ScrollRing(GradedRing):
    """Cox ring of the scroll P(O(e_1) + ... + O(e_d)) over P^1.

    Variables are ordered ``y1..yd, t0, t1`` with ``deg y_i = (1, -e_i)``
    and ``deg t_j = (0, 1)``.
    """

    def __init__(self, e: Sequence[int]):
        self.e = tuple(int(x) for x in e)
        if any(x < 0 for x in self.e):
            raise ValueError("scroll twists must be >= 0")
        d = len(self.e)
        names = [f"y{i + 1}" for i in range(d)] + ["t0", "t1"]
        degrees = [(1, -x) for x in self.e] + [(0, 1), (0, 1)]
        super().__init__(names, degrees)

    @property
    def d(self) -> int:
        return len(self.e)

    @property
    def f(self) -> int:
        return sum(self.e)

    def _enumerate(self, deg) -> list[Exponent]:
        a, b = deg
        if a < 0:
            return []
        out = []
        for alpha in compositions(a, self.d):
            s = b + sum(x * y for x, y in zip(alpha, self.e))
            if s < 0:
                continue
            for j in range(s, -1, -1):
                out.append((*alpha, j, s - j))
        out.sort(reverse=True)
        return out

    def weights(self, a: int, b: int) -> list[int]:
        """Twists of the line bundles making up S^a E (b) on P^1."""
        return [b + sum(x * y for x, y in zip(alpha, self.e)) for alpha in compositions(a, self.d)]


class Polynomial:
    """Sparse polynomial with exact integer coefficients."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: GradedRing, terms: Mapping[Exponent, int]):
        self.ring = ring
        self.terms = {tuple(e): int(c) for e, c in terms.items() if c}

    # arithmetic -----------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if other.ring != self.ring:
            raise ValueError("ring mismatch")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Polynomial(self.ring, t)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c: int) -> "Polynomial":
        return Polynomial(self.ring, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        return multiply(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        out = Polynomial(self.ring, {(0,) * self.ring.n_vars: 1})
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    # structure -------------------------------------------------------------

    def degrees(self) -> set[tuple[int, ...]]:
        return {self.ring.degree_of(e) for e in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> tuple[int, ...]:
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError("not a nonzero homogeneous polynomial")
        return degs.pop()

    @property
    def total_degree(self) -> int:
        return self.degree[0]

    def derivative(self, i: int) -> "Polynomial":
        return partial_derivative(self, i)

    def to_vector(self, d, p: int | None = None) -> np.ndarray:
        """Coefficient vector in degree_basis(d), optionally reduced mod p."""
        idx = self.ring.index(d)
        v = np.zeros(len(idx), dtype=object if p is None else np.int64)
        for e, c in self.terms.items():
            if e not in idx:
                raise ValueError(f"term {e} not of degree {d}")
            v[idx[e]] = c % p if p is not None else c
        return v

    def evaluate(self, point: Sequence[int], p: int) -> int:
        total = 0
        for e, c in self.terms.items():
            term = c % p
            for x, k in zip(point, e):
                if k:
                    term = term * pow(int(x), k, p) % p
            total += term
        return total % p

    def substitute(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Replace variable i by images[i] (all in one target ring)."""
        target = images[0].ring
        out = Polynomial(target, {})
        powers: dict = {}
        for e, c in self.terms.items():
            term = Polynomial(target, {(0,) * target.n_vars: c})
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in powers:
                        powers[(i, k)] = images[i] ** k
                    term = term * powers[(i, k)]
            out = out + term
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(self.ring.names, e) if k
            )
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def multiply(a: Polynomial, b: Polynomial) -> Polynomial:
    a._check(b)
    out: dict[Exponent, int] = {}
    for e1, c1 in a.terms.items():
        for e2, c2 in b.terms.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return Polynomial(a.ring, out)


def partial_derivative(a: Polynomial, var) -> Polynomial:
    i = a.ring.names.index(var) if isinstance(var, str) else int(var)
    out: dict[Exponent, int] = {}
    for e, c in a.terms.items():
        if e[i]:
            f = list(e)
            f[i] -= 1
            out[tuple(f)] = c * e[i]
    return Polynomial(a.ring, out)


def p1_cohomology(twists: Iterable[int]) -> tuple[int, int]:
    """(h^0, h^1) of the direct sum of O(m) on P^1 over the given twists."""
    h0 = h1 = 0
    for m in twists:
        if m >= 0:
            h0 += m + 1
        elif m <= -2:
            h1 += -m - 1
    return h0, h1


@lru_cache(maxsize=None)
def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    from math import comb

    return comb(n, k)


def monomials_of_degree(n_vars: int, d: int) -> list[Exponent]:
    return list(compositions(d, n_vars)) if d >= 0 else []


def product_table(ring: GradedRing, d1, d2) -> np.ndarray:
    """Index in degree d1+d2 of the product of basis monomials (i, j)."""
    a = ring.exponents(d1)
    b = ring.exponents(d2)
    deg = tuple(x + y for x, y in zip(ring._normalize_degree(d1), ring._normalize_degree(d2)))
    prod = a[:, None, :] + b[None, :, :]
    return ring.lookup(deg, prod)
