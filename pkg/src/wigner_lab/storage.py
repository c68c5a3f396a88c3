"""Binary matrix container used by the CLI pipeline.

Layout (little-endian): magic "WGNR", u32 version, u32 n, u32 count,
u32 flags, then `count` row-major complex64 lower triangles (diagonal
included), n(n+1)/2 entries each.  The lower triangle determines the
Hermitian matrix; readers reconstruct the upper half by conjugation.
complex64 is the storage contract, so round-tripping quantizes entries
to single precision.
"""

from __future__ import annotations

import struct
from typing import Iterable, Iterator, List, Tuple

import numpy as np

MAGIC = b"WGNR"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


def write_matrices(path, matrices: Iterable[np.ndarray], n: int, count: int,
                   flags: int = 0) -> None:
    rows, cols = np.tril_indices(n)
    written = 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, count, flags))
        for m in matrices:
            m = np.asarray(m)
            if m.shape != (n, n):
                raise ValueError(f"matrix shape {m.shape} != ({n}, {n})")
            fh.write(np.ascontiguousarray(m[rows, cols], dtype=np.complex64).tobytes())
            written += 1
    if written != count:
        raise ValueError(f"wrote {written} matrices, header promised {count}")


def read_header(path) -> Tuple[int, int, int]:
    """(n, count, flags) after validating magic and version."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise ValueError("truncated matrix file")
    magic, version, n, count, flags = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    return n, count, flags


def iter_matrices(path) -> Iterator[np.ndarray]:
    """Yield full Hermitian complex128 matrices one at a time."""
    n, count, _ = read_header(path)
    rows, cols = np.tril_indices(n)
    per = len(rows)
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        for _ in range(count):
            buf = fh.read(per * 8)
            if len(buf) != per * 8:
                raise ValueError("truncated matrix payload")
            tri = np.frombuffer(buf, dtype=np.complex64).astype(np.complex128)
            full = np.zeros((n, n), dtype=np.complex128)
            full[rows, cols] = tri
            diag = np.diag(full).copy()
            full = full + full.conj().T
            # diagonal was added twice; a Hermitian diagonal is real
            full[np.diag_indices(n)] = diag.real
            yield full


def read_matrices(path) -> List[np.ndarray]:
    return list(iter_matrices(path))
