"""Versioned, checksummed cache for bimoment matrices and factorizations.

Files are npz archives with a format-version field and a sha256 checksum of
the payload arrays; writes are atomic (temp file + rename).  A corrupted or
version-mismatched file is reported via CacheError so callers can recompute.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from typing import Optional, Tuple

import numpy as np

from .biortho import BiorthogonalSystem, factorize
from .errors import CacheError
from .quadrature import BimomentMatrix

FORMAT_VERSION = 1

_PAYLOAD_KEYS = (
    "entries", "work_entries", "alpha_left", "beta_left",
    "alpha_right", "beta_right", "basis_left", "basis_right",
)


def cache_key(fingerprint: str, d: int, order: int) -> str:
    return f"{fingerprint[:16]}_d{d}_o{order}"


def cache_path(cache_dir: str, fingerprint: str, d: int, order: int) -> str:
    return os.path.join(cache_dir, f"bimoments_{cache_key(fingerprint, d, order)}.npz")


def _checksum(arrays: dict) -> str:
    hasher = hashlib.sha256()
    for k in _PAYLOAD_KEYS:
        hasher.update(k.encode())
        hasher.update(np.ascontiguousarray(arrays[k]).tobytes())
    return hasher.hexdigest()


def save_bimoments(path: str, bm: BimomentMatrix) -> None:
    payload = {
        "entries": bm.entries,
        "work_entries": bm.work_entries,
        "alpha_left": bm.alpha_left,
        "beta_left": bm.beta_left,
        "alpha_right": bm.alpha_right,
        "beta_right": bm.beta_right,
        "basis_left": bm.basis_left,
        "basis_right": bm.basis_right,
    }
    meta = {
        "format_version": np.asarray(FORMAT_VERSION),
        "degree": np.asarray(bm.degree),
        "order": np.asarray(bm.order),
        "fingerprint": np.asarray(bm.fingerprint),
        "checksum": np.asarray(_checksum(payload)),
    }
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, **payload, **meta)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise CacheError(f"cannot write cache file {path}: {exc}") from exc


def load_bimoments(path: str, expected_fingerprint: Optional[str] = None) -> BimomentMatrix:
    if not os.path.exists(path):
        raise CacheError(f"cache file {path} does not exist")
    try:
        with np.load(path, allow_pickle=False) as data:
            if int(data["format_version"]) != FORMAT_VERSION:
                raise CacheError(
                    f"cache format version {int(data['format_version'])} != {FORMAT_VERSION}"
                )
            payload = {k: data[k] for k in _PAYLOAD_KEYS}
            if str(data["checksum"]) != _checksum(payload):
                raise CacheError(f"cache file {path} failed its checksum")
            fingerprint = str(data["fingerprint"])
            if expected_fingerprint and fingerprint != expected_fingerprint:
                raise CacheError("cache fingerprint does not match the model")
            return BimomentMatrix(
                payload["entries"], int(data["degree"]), int(data["order"]),
                fingerprint, payload["work_entries"],
                payload["alpha_left"], payload["beta_left"],
                payload["alpha_right"], payload["beta_right"],
                payload["basis_left"], payload["basis_right"],
            )
    except CacheError:
        raise
    except Exception as exc:
        raise CacheError(f"cannot read cache file {path}: {exc}") from exc


def load_or_build(cache_dir: str, model, fingerprint: str, d: int, order: int
                  ) -> Tuple[BimomentMatrix, BiorthogonalSystem, bool]:
    """(bimoments, system, cache_hit); recomputes on any cache problem."""
    from .quadrature import bimoment_matrix

    path = cache_path(cache_dir, fingerprint, d, order)
    try:
        bm = load_bimoments(path, fingerprint)
        hit = True
    except CacheError:
        bm = bimoment_matrix(model, d, order, fingerprint)
        save_bimoments(path, bm)
        hit = False
    return bm, factorize(bm), hit
