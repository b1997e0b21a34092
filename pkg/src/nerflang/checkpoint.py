"""Named-array checkpoint archive.

Binary layout (little-endian): magic ``NWAT``, u32 version, u32 entry count;
per entry: u32 name length, UTF-8 name, u32 rank, rank x u64 dims, then the
float32 payload in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"NWAT"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_archive(path: str | Path, arrays: dict[str, np.ndarray]) -> None:
    path = Path(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(arrays)))
        for name, arr in arrays.items():
            arr = np.ascontiguousarray(arr, dtype=np.float32)
            nb = name.encode("utf-8")
            f.write(struct.pack("<I", len(nb)))
            f.write(nb)
            f.write(struct.pack("<I", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            f.write(arr.tobytes(order="C"))


def load_archive(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    out: dict[str, np.ndarray] = {}
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        version, count = struct.unpack("<II", f.read(8))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported version {version}")
        for _ in range(count):
            (name_len,) = struct.unpack("<I", f.read(4))
            name = f.read(name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", f.read(4))
            dims = struct.unpack(f"<{rank}Q", f.read(8 * rank)) if rank else ()
            n = int(np.prod(dims)) if dims else 1
            payload = f.read(4 * n)
            if len(payload) != 4 * n:
                raise CheckpointError(f"{path}: truncated payload for entry {name!r}")
            arr = np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float32)
            out[name] = arr
    return out
