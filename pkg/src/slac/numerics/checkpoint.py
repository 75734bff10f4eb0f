"""Versioned flat checkpoint container.

Layout: magic "SLACCKPT", u32 format version, u32 header length, JSON
header (shape table in declaration order plus a free-form metadata block),
then the raw little-endian float64 arrays back to back in that order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from slac.errors import CompatibilityError

MAGIC = b"SLACCKPT"
FORMAT_VERSION = 1


def save_checkpoint(path, arrays: dict, metadata: dict | None = None) -> None:
    """Write named float64 arrays (insertion order preserved) plus metadata."""
    entries = []
    blobs = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape)})
        blobs.append(arr.astype("<f8").tobytes())
    header = json.dumps(
        {"arrays": entries, "metadata": metadata or {}}, sort_keys=True
    ).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(FORMAT_VERSION.to_bytes(4, "little"))
        fh.write(len(header).to_bytes(4, "little"))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path) -> tuple:
    """Read a checkpoint; returns (arrays dict, metadata dict).

    Refuses (CompatibilityError) on bad magic, unknown version, or a
    truncated/oversized payload -- never a partial load.
    """
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 8 or raw[: len(MAGIC)] != MAGIC:
        raise CompatibilityError(f"{path}: not a SLACCKPT checkpoint")
    off = len(MAGIC)
    version = int.from_bytes(raw[off : off + 4], "little")
    if version != FORMAT_VERSION:
        raise CompatibilityError(f"{path}: unsupported checkpoint version {version}")
    off += 4
    hlen = int.from_bytes(raw[off : off + 4], "little")
    off += 4
    if off + hlen > len(raw):
        raise CompatibilityError(f"{path}: truncated checkpoint header")
    try:
        header = json.loads(raw[off : off + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CompatibilityError(f"{path}: corrupt checkpoint header: {exc}") from exc
    off += hlen
    expected = sum(int(np.prod(e["shape"])) for e in header["arrays"]) * 8
    if len(raw) - off != expected:
        raise CompatibilityError(
            f"{path}: payload is {len(raw) - off} bytes, expected {expected} (truncated or corrupt)"
        )
    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape))
        arr = np.frombuffer(raw[off : off + n * 8], dtype="<f8").reshape(shape)
        arrays[entry["name"]] = arr.astype(np.float64)
        off += n * 8
    return arrays, header["metadata"]
