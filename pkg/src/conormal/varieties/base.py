"""Embedded varieties and their degree-wise data over a fixed prime."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..exactalg import DEFAULT_PRIME, Subspace, _echelon, matmul_mod, nullspace_basis
from ..rings import GradedRing, Polynomial, product_table
from .oracles import SectionOracle


class Degenerate(RuntimeError):
    """A randomly chosen instance failed a genericity check."""


@dataclass
class EmbeddedVariety:
    """X in P^N given by a section oracle.

    ``oracle_factory`` builds the oracle (it may depend on nothing but the
    construction data); per-prime linear algebra lives in :meth:`model`.
    """

    label: str
    constructor: str
    params: dict
    seed: int | None
    ring: GradedRing
    oracle: SectionOracle
    dim: int
    genus: int | None = None
    degree: int | None = None
    expected_h0: Callable[[int], int] | None = None
    sampler: Callable | None = None
    data: Any = None
    seed_used: int | None = None
    notes: dict = field(default_factory=dict)
    _models: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def N(self) -> int:
        return self.ring.n_vars - 1

    @property
    def n_vars(self) -> int:
        return self.ring.n_vars

    @property
    def codim(self) -> int:
        return self.N - self.dim

    @property
    def is_canonical_curve(self) -> bool:
        return self.dim == 1 and self.genus is not None and self.N == self.genus - 1

    def model(self, p: int = DEFAULT_PRIME) -> "VarietyModel":
        with self._lock:
            if p not in self._models:
                self._models[p] = VarietyModel(self, p)
            return self._models[p]

    def fingerprint(self) -> str:
        import hashlib
        import json

        blob = json.dumps(
            {"constructor": self.constructor, "params": self.params, "seed": self.seed_used},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


class VarietyModel:
    """Linear algebra of X in each degree over F_p.

    A_k is identified with the span of the *standard monomials* of degree
    k: the pivot columns of the reduced echelon form NF_k of the
    restriction matrix.  Column j of NF_k is then the normal form of the
    j-th monomial in standard-monomial coordinates.
    """

    def __init__(self, X: EmbeddedVariety, p: int):
        self.X = X
        self.p = p
        self.ring = X.ring
        self._nf: dict = {}
        self._ideal: dict = {}
        self._mult: dict = {}
        self._lock = threading.RLock()
        self.store: dict = {}  # shared per-prime cache for downstream modules

    # degree-wise normal forms --------------------------------------------

    def nf(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(NF_k, standard monomial indices) for degree k."""
        if k < 0:
            return np.zeros((0, 0), np.int64), np.zeros(0, np.int64)
        with self._lock:
            if k not in self._nf:
                if k == 0:
                    self._nf[k] = (np.ones((1, 1), np.int64), np.zeros(1, np.int64))
                else:
                    R = self.X.oracle.restriction_matrix(k, self.p)
                    NF, piv = _echelon(R, self.p)
                    self._nf[k] = (NF, piv)
            return self._nf[k]

    def a_dim(self, k: int) -> int:
        if k < 0:
            return 0
        return self.nf(k)[0].shape[0]

    def p_dim(self, k: int) -> int:
        return self.ring.basis_size(k) if k >= 0 else 0

    def standard(self, k: int) -> np.ndarray:
        return self.nf(k)[1]

    def normal_form(self, k: int, vectors: np.ndarray) -> np.ndarray:
        """A_k coordinates of polynomials given as rows over P_k."""
        NF, _ = self.nf(k)
        v = np.asarray(vectors, dtype=np.int64).reshape(-1, self.p_dim(k))
        return matmul_mod(v, NF.T, self.p)

    def ideal(self, k: int) -> Subspace:
        """I_k as a canonical subspace of P_k."""
        with self._lock:
            if k not in self._ideal:
                n = self.p_dim(k)
                if k <= 0:
                    self._ideal[k] = Subspace.zero(max(n, 0), self.p)
                else:
                    NF, _ = self.nf(k)
                    K = nullspace_basis(NF, self.p)
                    self._ideal[k] = Subspace.span(K, self.p, n)
            return self._ideal[k]

    def ideal_dim(self, k: int) -> int:
        return self.p_dim(k) - self.a_dim(k)

    def mult(self, k: int) -> np.ndarray:
        """Array (n_vars, a_k, a_{k-1}): multiplication by z_l from A_{k-1} to A_k."""
        with self._lock:
            if k not in self._mult:
                NF, _ = self.nf(k)
                std = self.standard(k - 1)
                n = self.ring.n_vars
                exps = self.ring.exponents(k - 1)[std]
                out = np.zeros((n, NF.shape[0], len(std)), np.int64)
                for l in range(n):
                    e = exps.copy()
                    e[:, l] += 1
                    idx = self.ring.lookup(k, e)
                    out[l] = NF[:, idx]
                self._mult[k] = out
            return self._mult[k]

    def product_nf(self, d1: int, rows1: np.ndarray, d2: int) -> np.ndarray:
        """Normal forms of (std monomial u of degree d1) * (each P_{d2} monomial).

        Returns array (len(rows1), dim P_{d2}, a_{d1+d2}).
        """
        table = product_table(self.ring, d1, d2)[rows1]
        NF, _ = self.nf(d1 + d2)
        return NF.T[table]

    def monomial_values(self, k: int, points) -> np.ndarray:
        from .oracles import monomial_values

        return monomial_values(self.ring, k, points, self.p)

    def hilbert(self, kmax: int) -> list[int]:
        return [self.a_dim(k) for k in range(kmax + 1)]


def derivative_matrix(ring: GradedRing, d: int, var: int) -> tuple[np.ndarray, np.ndarray]:
    """(target index, multiplier) of d/dz_var on the degree-d monomial basis.

    Monomials not involving the variable get target -1 and multiplier 0.
    """
    exps = ring.exponents(d).copy()
    mult = exps[:, var].copy()
    exps[:, var] -= 1
    idx = np.full(len(exps), -1, np.int64)
    ok = mult > 0
    if d >= 1 and ok.any():
        idx[ok] = ring.lookup(d - 1, exps[ok])
    return idx, mult


def differentiate_rows(ring: GradedRing, d: int, rows: np.ndarray, p: int) -> np.ndarray:
    """Partials of polynomials (rows over P_d): array (n_vars, n_rows, dim P_{d-1})."""
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, ring.basis_size(d))
    out = np.zeros((ring.n_vars, rows.shape[0], ring.basis_size(d - 1) if d >= 1 else 0), np.int64)
    if d < 1:
        return out
    for v in range(ring.n_vars):
        idx, mult = derivative_matrix(ring, d, v)
        ok = np.nonzero(mult)[0]
        # d/dz_v is injective on the monomials containing z_v
        out[v][:, idx[ok]] = rows[:, ok] * mult[ok] % p
    return out


def rows_to_polynomials(ring: GradedRing, d: int, rows: np.ndarray, p: int) -> list[Polynomial]:
    """Coefficient rows to Polynomials with symmetric representatives mod p."""
    out = []
    half = p // 2
    for r in np.asarray(rows).reshape(-1, ring.basis_size(d)):
        vals = [int(c) - p if c > half else int(c) for c in r]
        out.append(ring.from_vector(d, vals))
    return out
