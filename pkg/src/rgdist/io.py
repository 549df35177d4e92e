"""File formats: RGDMAT01 binary matrices, CSV matrices and fields.

Scalar CSVs carry a header ``index,value`` with 0-based indices and
17-significant-digit floats, which round-trips 64-bit values exactly.
The binary matrix format is the 8-byte magic ``RGDMAT01``, a little-endian
u64 vertex count, then n*n little-endian float64 row-major.
"""

from __future__ import annotations

import struct

import numpy as np

RGDMAT_MAGIC = b"RGDMAT01"


def save_matrix_rgdmat(path, D: np.ndarray):
    D = np.ascontiguousarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("matrix must be square")
    with open(path, "wb") as fh:
        fh.write(RGDMAT_MAGIC)
        fh.write(struct.pack("<Q", D.shape[0]))
        fh.write(D.astype("<f8").tobytes())


def load_matrix_rgdmat(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != RGDMAT_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {RGDMAT_MAGIC!r}")
        (n,) = struct.unpack("<Q", fh.read(8))
        payload = fh.read(8 * n * n)
        if len(payload) != 8 * n * n:
            raise ValueError(f"{path}: truncated matrix payload")
        data = np.frombuffer(payload, dtype="<f8")
    return data.reshape(n, n).copy()


def save_matrix_csv(path, D: np.ndarray):
    """Headerless n x n CSV with 17 significant digits (lossless)."""
    np.savetxt(path, np.asarray(D, dtype=np.float64), fmt="%.17g", delimiter=",")


def load_matrix_csv(path) -> np.ndarray:
    D = np.loadtxt(path, delimiter=",", ndmin=2)
    if D.shape[0] != D.shape[1]:
        raise ValueError(f"{path}: expected a square matrix, got {D.shape}")
    return D


def load_matrix(path) -> np.ndarray:
    """Dispatch on extension: .rgdmat binary or .csv text."""
    p = str(path)
    if p.lower().endswith(".rgdmat"):
        return load_matrix_rgdmat(p)
    if p.lower().endswith(".csv"):
        return load_matrix_csv(p)
    raise ValueError(f"unknown matrix format (want .rgdmat or .csv): {p}")


def save_values_csv(path, values: np.ndarray):
    """Per-index scalars as 'index,value' rows."""
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{v:.17g}\n")


def load_values_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "index,value":
            raise ValueError(f"{path}: expected header 'index,value'")
        idx, vals = [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i, v = line.split(",")
            idx.append(int(i))
            vals.append(float(v))
    out = np.zeros(len(vals))
    out[np.asarray(idx, dtype=np.int64)] = vals
    return out


def save_face_field_csv(path, vectors: np.ndarray):
    """Per-face 3-vectors as 'index,vx,vy,vz' rows."""
    V = np.asarray(vectors, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,vx,vy,vz\n")
        for i, (x, y, z) in enumerate(V):
            fh.write(f"{i},{x:.17g},{y:.17g},{z:.17g}\n")


def load_face_field_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "index,vx,vy,vz":
            raise ValueError(f"{path}: expected header 'index,vx,vy,vz'")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            rows.append((int(parts[0]), [float(x) for x in parts[1:4]]))
    out = np.zeros((len(rows), 3))
    for i, vec in rows:
        out[i] = vec
    return out
