"""Persistent cache of canonical subspaces.

Entries are keyed by (variety fingerprint, quantity, degree, prime) and
stored one per file:

    magic "CNRM" | u16 format version | u32 header length | header JSON
    | payload (npz of the arrays) | 32-byte sha256 of everything before it

A bad magic, version or checksum makes the entry a miss; it is then
recomputed and overwritten.  Writers take a per-key file lock and publish
with ``os.replace`` so readers never see partial files.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import struct
import tempfile
from pathlib import Path

import numpy as np
from filelock import FileLock

from .exactalg import Subspace

MAGIC = b"CNRM"
FORMAT_VERSION = 1
ENV_VAR = "CONORMAL_CACHE_DIR"

log = logging.getLogger(__name__)


def default_cache_dir() -> str | None:
    return os.environ.get(ENV_VAR) or None


def encode(header: dict, arrays: dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    np.savez(buf, **{k: np.ascontiguousarray(v, dtype=np.int64) for k, v in arrays.items()})
    head = json.dumps(header, sort_keys=True).encode()
    body = MAGIC + struct.pack("<HI", FORMAT_VERSION, len(head)) + head + buf.getvalue()
    return body + hashlib.sha256(body).digest()


def decode(blob: bytes) -> tuple[dict, dict[str, np.ndarray]] | None:
    if len(blob) < 42 or blob[:4] != MAGIC:
        return None
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        return None
    version, n = struct.unpack("<HI", body[4:10])
    if version != FORMAT_VERSION:
        return None
    header = json.loads(body[10:10 + n].decode())
    with np.load(io.BytesIO(body[10 + n:]), allow_pickle=False) as z:
        arrays = {k: z[k] for k in z.files}
    return header, arrays


class SubspaceCache:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _path(self, fingerprint: str, quantity: str, degree: int, p: int) -> Path:
        return self.root / fingerprint / f"{quantity}-k{degree}-p{p}.bin"

    def get(self, fingerprint, quantity, degree, p) -> tuple[dict, dict[str, Subspace]] | None:
        path = self._path(fingerprint, quantity, degree, p)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            self.misses += 1
            return None
        got = decode(blob)
        if got is None:
            log.warning("corrupt cache entry %s ignored", path)
            self.misses += 1
            return None
        header, arrays = got
        spaces = {}
        for name in header.get("subspaces", []):
            basis, piv = arrays[name + ".basis"], arrays[name + ".pivots"]
            spaces[name] = Subspace(int(header["ambient"][name]), basis, piv, p)
        self.hits += 1
        return header, spaces

    def put(self, fingerprint, quantity, degree, p, spaces: dict[str, Subspace], meta: dict | None = None):
        path = self._path(fingerprint, quantity, degree, p)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = {"meta": meta or {}, "subspaces": sorted(spaces),
                  "ambient": {k: s.ambient_dim for k, s in spaces.items()}, "prime": p}
        arrays = {}
        for k, s in spaces.items():
            arrays[k + ".basis"] = s.basis.reshape(s.dim, s.ambient_dim)
            arrays[k + ".pivots"] = s.pivot_cols
        blob = encode(header, arrays)
        with FileLock(str(path) + ".lock"):
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(blob)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


def load_saturation(cache: SubspaceCache | None, X, k: int, p: int, window: int, m_cap: int) -> bool:
    """Seed the per-prime model with a cached (N_k, Sat_k); True on a hit."""
    if cache is None:
        return False
    from .engine import ConormalPiece

    got = cache.get(X.fingerprint(), f"sat-w{window}-m{m_cap}", k, p)
    if got is None:
        return False
    meta, spaces = got[0]["meta"], got[1]
    M = X.model(p)
    piece = ConormalPiece(k, spaces["N"], spaces["Sat"], meta["M_dim"], meta["stabilization_m"],
                          list(meta["chain"]), meta["status"])
    M.store[("N", k)] = spaces["N"]
    M.store[("sat", k, window, m_cap)] = piece
    return True


def save_saturation(cache: SubspaceCache | None, X, k: int, p: int, window: int, m_cap: int):
    if cache is None:
        return
    piece = X.model(p).store.get(("sat", k, window, m_cap))
    if piece is None:
        return
    meta = {"M_dim": piece.M_dim, "stabilization_m": piece.stabilization_m,
            "chain": piece.chain, "status": piece.status}
    cache.put(X.fingerprint(), f"sat-w{window}-m{m_cap}", k, p, {"N": piece.N, "Sat": piece.Sat}, meta)
