"""Exact linear algebra over a prime field F_p.

Everything here works on ``numpy.int64`` arrays whose entries lie in
``[0, p)``.  Elimination is blocked: a numba kernel finds the pivots of a
narrow column panel and the trailing update is a matrix product carried
out exactly in float64 BLAS (see :func:`matmul_mod`).

The row space of a matrix is returned as a :class:`Subspace` in reduced
row-echelon form, which is canonical: two generating sets of the same
space give bit-identical bases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numba
import numpy as np
from sympy import isprime

DEFAULT_PRIME = 1073741789
DEFAULT_RETRY_PRIMES = (1073741783, 1073741741, 1073741723)

# float64 products stay exact while the accumulated magnitude is < 2**53:
# |centered a| < 2**29, 15-bit limbs of b, inner chunk <= 500.
_LIMB = 15
_LIMB_MASK = (1 << _LIMB) - 1
_CHUNK = 500
_PANEL = 96
_SMALL_WORK = 4_000_000


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FieldConfig:
    """The working prime and the primes used to re-check nonzero answers."""

    p: int = DEFAULT_PRIME
    retry_primes: tuple[int, ...] = DEFAULT_RETRY_PRIMES

    def __post_init__(self):
        object.__setattr__(self, "retry_primes", tuple(int(q) for q in self.retry_primes))
        for q in (self.p, *self.retry_primes):
            if q <= 10**6 or not isprime(q):
                raise ValueError(f"{q} is not a prime > 10^6")
            if q >= 2**31:
                raise ValueError(f"{q} too large for int64 products")
        if len(set(self.retry_primes)) != len(self.retry_primes):
            raise ValueError("retry primes must be distinct")

    def alternates(self) -> tuple[int, ...]:
        """Retry primes other than ``p``, in order."""
        return tuple(q for q in self.retry_primes if q != self.p)

    def with_prime(self, q: int) -> "FieldConfig":
        rest = tuple(x for x in (self.p, *self.retry_primes) if x != q)
        return FieldConfig(q, rest)


DEFAULT_FIELD = FieldConfig()


# ---------------------------------------------------------------------------
# numba kernels


@numba.njit(cache=True)
def _modinv(a, p):
    # extended Euclid; a != 0 mod p
    t, newt = 0, 1
    r, newr = p, a % p
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    if t < 0:
        t += p
    return t


@numba.njit(cache=True)
def _rref_inplace(A, p):
    n, m = A.shape
    piv = np.empty(min(n, m), np.int64)
    r = 0
    for c in range(m):
        if r == n:
            break
        k = -1
        for i in range(r, n):
            if A[i, c] != 0:
                k = i
                break
        if k < 0:
            continue
        if k != r:
            for j in range(c, m):
                tmp = A[k, j]
                A[k, j] = A[r, j]
                A[r, j] = tmp
        inv = _modinv(A[r, c], p)
        for j in range(c, m):
            A[r, j] = A[r, j] * inv % p
        for i in range(n):
            if i != r:
                f = A[i, c]
                if f != 0:
                    for j in range(c, m):
                        A[i, j] = (A[i, j] - f * A[r, j]) % p
        piv[r] = c
        r += 1
    return piv[:r]


@numba.njit(cache=True)
def _panel_pivots(X, p):
    """Row-echelon a panel in place; return (pivot rows, pivot cols)."""
    n, w = X.shape
    used = np.zeros(n, np.bool_)
    prow = np.empty(w, np.int64)
    pcol = np.empty(w, np.int64)
    r = 0
    for c in range(w):
        k = -1
        for i in range(n):
            if not used[i] and X[i, c] != 0:
                k = i
                break
        if k < 0:
            continue
        used[k] = True
        inv = _modinv(X[k, c], p)
        for j in range(c, w):
            X[k, j] = X[k, j] * inv % p
        for i in range(n):
            if not used[i]:
                f = X[i, c]
                if f != 0:
                    for j in range(c, w):
                        X[i, j] = (X[i, j] - f * X[k, j]) % p
        prow[r] = k
        pcol[r] = c
        r += 1
    return prow[:r], pcol[:r]


@numba.njit(cache=True)
def _inverse_mod(M, p):
    n = M.shape[0]
    A = np.zeros((n, 2 * n), np.int64)
    for i in range(n):
        for j in range(n):
            A[i, j] = M[i, j] % p
        A[i, n + i] = 1
    piv = _rref_inplace(A, p)
    if piv.shape[0] < n or piv[n - 1] != n - 1:
        raise ValueError("singular matrix")
    return A[:, n:].copy()


# ---------------------------------------------------------------------------
# dense helpers


def as_array(m, p: int | None = None) -> np.ndarray:
    """Coerce a Matrix / nested list / ndarray to an int64 array (reduced mod p)."""
    if isinstance(m, Matrix):
        return m.dense()
    a = np.asarray(m, dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if p is not None and a.size and (a.min() < 0 or a.max() >= p):
        a = a % p
    return a


@numba.njit(cache=True)
def _accumulate(out, lo, hi, p, sign):
    # out <- (out + sign * (hi * 2**15 + lo)) mod p, all exact in int64
    n, m = out.shape
    for i in range(n):
        for j in range(m):
            h = np.int64(hi[i, j]) % p
            l = np.int64(lo[i, j]) % p
            v = (h * 32768 + l) % p
            if sign < 0:
                v = p - v
            w = out[i, j] + v
            if w >= p:
                w -= p
            out[i, j] = w


def _split(A, B, p):
    half = p // 2
    Af = A.astype(np.float64)
    Af[A > half] -= p
    Blo = (B & _LIMB_MASK).astype(np.float64)
    Bhi = (B >> _LIMB).astype(np.float64)
    return Af, Blo, Bhi


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """Exact ``A @ B mod p`` for int64 inputs in ``[0, p)``, p < 2**30."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    n, k = A.shape
    k2, m = B.shape
    if k != k2:
        raise DimensionMismatch(f"inner dimensions {k} != {k2}")
    out = np.zeros((n, m), dtype=np.int64)
    if n and m and k:
        _addmul(out, A, B, p, 1)
    return out


def _addmul(out, A, B, p, sign):
    """out += sign * A @ B (mod p), in place; out entries in [0, p)."""
    Af, Blo, Bhi = _split(A, B, p)
    k = A.shape[1]
    for s in range(0, k, _CHUNK):
        a = Af[:, s:s + _CHUNK]
        _accumulate(out, a @ Blo[s:s + _CHUNK], a @ Bhi[s:s + _CHUNK], p, sign)


def _echelon(A: np.ndarray, p: int, reduced: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row-echelon form of ``A`` (copied). Returns (rows, pivots).

    With ``reduced=False`` the rows are only echelon (enough for ranks).
    """
    A = np.array(A, dtype=np.int64, copy=True)
    n, m = A.shape
    if n == 0 or m == 0:
        return np.zeros((0, m), np.int64), np.zeros(0, np.int64)
    A = A[np.any(A != 0, axis=1)]
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, m), np.int64), np.zeros(0, np.int64)
    if n * m * min(n, m) <= _SMALL_WORK * 8 or min(n, m) <= _PANEL:
        piv = _rref_inplace(A, p)
        return A[: len(piv)].copy(), piv.copy()
    return _echelon_blocked(A, p, reduced)


def _echelon_blocked(A: np.ndarray, p: int, reduced: bool = True) -> tuple[np.ndarray, np.ndarray]:
    n, m = A.shape
    done: list[np.ndarray] = []  # finished pivot rows, one block per panel
    pivots: list[np.ndarray] = []
    rest = A
    col = 0
    while col < m and rest.shape[0] > 0:
        c1 = min(col + _PANEL, m)
        X = np.ascontiguousarray(rest[:, col:c1])
        prow, pcol = _panel_pivots(X, p)
        if len(prow) == 0:
            col = c1
            continue
        pc = pcol + col
        T = _inverse_mod(np.ascontiguousarray(rest[np.ix_(prow, pc)]), p)
        newP = np.zeros((len(prow), m), np.int64)
        newP[:, col:] = matmul_mod(T, rest[prow, col:], p)
        keep = np.ones(rest.shape[0], dtype=bool)
        keep[prow] = False
        rest = rest[keep]
        if rest.shape[0] and c1 < m:
            tail = np.ascontiguousarray(rest[:, c1:])
            _addmul(tail, rest[:, pc], newP[:, c1:], p, -1)
            rest = np.zeros((tail.shape[0], m), np.int64)
            rest[:, c1:] = tail
            rest = rest[np.any(tail != 0, axis=1)]
        else:
            rest = rest[:0]
        if reduced:
            for blk in done:
                tail = np.ascontiguousarray(blk[:, col:])
                _addmul(tail, blk[:, pc], newP[:, col:], p, -1)
                blk[:, col:] = tail
        done.append(newP)
        pivots.append(pc)
        col = c1
    if not done:
        return np.zeros((0, m), np.int64), np.zeros(0, np.int64)
    return np.vstack(done), np.concatenate(pivots)


# ---------------------------------------------------------------------------
# public types


class Matrix:
    """A matrix over F_p.

    Stored densely; :meth:`from_entries` and :attr:`entries` give the
    sparse ``(row, col) -> value`` view with no stored zeros.
    """

    __slots__ = ("_a", "p")

    def __init__(self, array, p: int):
        a = as_array(array, p)
        self._a = a
        self.p = int(p)

    @classmethod
    def from_entries(cls, n_rows: int, n_cols: int, entries: Mapping[tuple[int, int], int], p: int) -> "Matrix":
        a = np.zeros((n_rows, n_cols), np.int64)
        for (i, j), v in entries.items():
            if not (0 <= i < n_rows and 0 <= j < n_cols):
                raise IndexError((i, j))
            a[i, j] = v % p
        return cls(a, p)

    @classmethod
    def identity(cls, n: int, p: int) -> "Matrix":
        return cls(np.eye(n, dtype=np.int64), p)

    @property
    def n_rows(self) -> int:
        return self._a.shape[0]

    @property
    def n_cols(self) -> int:
        return self._a.shape[1]

    @property
    def entries(self) -> dict[tuple[int, int], int]:
        rows, cols = np.nonzero(self._a)
        return {(int(i), int(j)): int(self._a[i, j]) for i, j in zip(rows, cols)}

    def dense(self) -> np.ndarray:
        return self._a

    def transpose(self) -> "Matrix":
        return Matrix(self._a.T.copy(), self.p)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return Matrix(matmul_mod(self._a, as_array(other), self.p), self.p)

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.p == other.p and np.array_equal(self._a, other._a)

    def __repr__(self):
        return f"Matrix({self.n_rows}x{self.n_cols} mod {self.p}, nnz={np.count_nonzero(self._a)})"


@dataclass(eq=False)
class Subspace:
    """Row space in canonical reduced row-echelon form."""

    ambient_dim: int
    basis: np.ndarray
    pivot_cols: np.ndarray
    p: int
    _nonpivots: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def zero(cls, ambient_dim: int, p: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((0, ambient_dim), np.int64), np.zeros(0, np.int64), p)

    @classmethod
    def full(cls, ambient_dim: int, p: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim, dtype=np.int64), np.arange(ambient_dim), p)

    @classmethod
    def span(cls, rows, p: int, ambient_dim: int | None = None) -> "Subspace":
        a = as_array(rows, p)
        if ambient_dim is not None and a.size == 0:
            a = a.reshape(0, ambient_dim)
        R, piv = _echelon(a, p)
        return cls(a.shape[1], R, piv, p)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def nonpivots(self) -> np.ndarray:
        if self._nonpivots is None:
            mask = np.ones(self.ambient_dim, bool)
            mask[self.pivot_cols] = False
            self._nonpivots = np.nonzero(mask)[0]
        return self._nonpivots

    def residues(self, vectors) -> np.ndarray:
        """Reduce row vectors modulo the subspace (zero exactly on members)."""
        v = as_array(vectors, self.p).reshape(-1, self.ambient_dim)
        if self.dim == 0 or v.shape[0] == 0:
            return v.copy()
        out = v - matmul_mod(v[:, self.pivot_cols], self.basis, self.p)
        return out % self.p

    def quotient_coords(self, vectors) -> np.ndarray:
        """Coordinates of the images of ``vectors`` in ambient/self (non-pivot entries of residues)."""
        return self.residues(vectors)[:, self.nonpivots]

    def quotient_map(self) -> np.ndarray:
        """Matrix Q (codim x ambient) with Q @ v = quotient_coords(v)."""
        Q = np.zeros((len(self.nonpivots), self.ambient_dim), np.int64)
        Q[np.arange(len(self.nonpivots)), self.nonpivots] = 1
        if self.dim:
            Q[:, self.pivot_cols] = (-self.basis[:, self.nonpivots].T) % self.p
        return Q

    def coordinates(self, vectors) -> np.ndarray:
        """Coordinates of member vectors in the canonical basis (pivot entries)."""
        v = as_array(vectors, self.p).reshape(-1, self.ambient_dim)
        return v[:, self.pivot_cols].copy()

    def contains(self, v) -> bool:
        return not np.any(self.residues(v))

    def contains_all(self, vectors) -> bool:
        return not np.any(self.residues(vectors))

    def is_subspace_of(self, other: "Subspace") -> bool:
        _check_same(self, other)
        return other.contains_all(self.basis) if self.dim else True

    def __add__(self, other: "Subspace") -> "Subspace":
        _check_same(self, other)
        return Subspace.span(np.vstack([self.basis, other.basis]), self.p, self.ambient_dim)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.p == other.p
            and np.array_equal(self.pivot_cols, other.pivot_cols)
            and np.array_equal(self.basis, other.basis)
        )

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim}, p={self.p})"


def _check_same(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(f"ambient {a.ambient_dim} != {b.ambient_dim}")
    if a.p != b.p:
        raise DimensionMismatch("different primes")


# ---------------------------------------------------------------------------
# operations


def rref(m, p: int) -> Subspace:
    """Row space of ``m`` in canonical form."""
    return Subspace.span(m, p)


def rank(m, p: int) -> int:
    a = as_array(m, p)
    if a.size == 0:
        return 0
    if a.shape[0] > a.shape[1]:
        a = a.T
    return len(_echelon(a, p, reduced=False)[1])


def nullspace_basis(m, p: int) -> np.ndarray:
    """Basis of {v : m v = 0} that is the identity on the free columns.

    This basis is unique but not echelon; use :func:`kernel` for the
    canonical Subspace.
    """
    a = as_array(m, p)
    n_cols = a.shape[1]
    R, piv = _echelon(a, p)
    free = np.setdiff1d(np.arange(n_cols), piv)
    K = np.zeros((len(free), n_cols), np.int64)
    K[np.arange(len(free)), free] = 1
    if len(piv):
        K[:, piv] = (-R[:, free].T) % p
    return K


def kernel(m, p: int) -> Subspace:
    a = as_array(m, p)
    K = nullspace_basis(a, p)
    return Subspace.span(K, p, a.shape[1])


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """Canonical basis of a ∩ b (Zassenhaus)."""
    _check_same(a, b)
    n = a.ambient_dim
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(n, a.p)
    if a.dim > b.dim:
        a, b = b, a
    # v in a with v in b  <=>  residue of v mod b vanishes
    coeffs = kernel(b.residues(a.basis).T, a.p)
    if coeffs.dim == 0:
        return Subspace.zero(n, a.p)
    return Subspace.span(matmul_mod(coeffs.basis, a.basis, a.p), a.p, n)


def contains(a: Subspace, v) -> bool:
    return a.contains(v)


def solve(m, target, p: int) -> np.ndarray | None:
    """Some X with ``m @ X == target`` (columnwise), or None if inconsistent."""
    A = as_array(m, p)
    B = as_array(target, p)
    if B.shape[0] != A.shape[0]:
        if B.shape[1] == A.shape[0] and B.shape[0] == 1:
            B = B.T
        else:
            raise DimensionMismatch(f"target has {B.shape[0]} rows, matrix has {A.shape[0]}")
    n, k = A.shape
    aug = np.hstack([A, B])
    R, piv = _echelon(aug, p)
    if len(piv) and piv[-1] >= k:
        return None
    X = np.zeros((k, B.shape[1]), np.int64)
    X[piv] = R[:, k:]
    return X


def random_matrix(rng: np.random.Generator, n: int, m: int, p: int, rank_: int | None = None) -> np.ndarray:
    """Random n x m matrix, optionally of prescribed rank (generic factors)."""
    if rank_ is None:
        return rng.integers(0, p, size=(n, m), dtype=np.int64)
    L = rng.integers(0, p, size=(n, rank_), dtype=np.int64)
    R = rng.integers(0, p, size=(rank_, m), dtype=np.int64)
    return matmul_mod(L, R, p)


def stack(blocks: Iterable[np.ndarray], n_cols: int) -> np.ndarray:
    blocks = [b for b in blocks if b.size]
    if not blocks:
        return np.zeros((0, n_cols), np.int64)
    return np.vstack(blocks)
