"""Flat binary matrix files and CSV export.

Format: a 16-byte header (4-byte magic ``CRM1``, 4 reserved bytes, uint32
row count, uint32 column count, all little-endian) followed by the entries
as little-endian float64 in row-major order.
"""

import struct

import numpy as np

MAGIC = b"CRM1"
_HEADER = struct.Struct("<4s4xII")


def save_matrix(path, a):
    """Write a 1D or 2D float array; vectors are stored as single columns."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a 1D or 2D array, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    rows, cols = a.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_matrix(path):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        payload = fh.read(8 * rows * cols)
    if len(payload) != 8 * rows * cols:
        raise ValueError(f"{path}: truncated payload")
    a = np.frombuffer(payload, dtype="<f8").reshape(rows, cols)
    return np.ascontiguousarray(a)


def matrix_to_bytes(a):
    """Header plus payload as bytes (same layout as the file format)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    rows, cols = a.shape
    return _HEADER.pack(MAGIC, rows, cols) + np.ascontiguousarray(a, dtype="<f8").tobytes()


def matrix_from_buffer(buf, offset=0):
    """Parse one matrix from ``buf`` at ``offset``; returns (array, next offset)."""
    magic, rows, cols = _HEADER.unpack_from(buf, offset)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r} at offset {offset}")
    start = offset + _HEADER.size
    end = start + 8 * rows * cols
    if end > len(buf):
        raise ValueError("truncated matrix payload")
    a = np.frombuffer(buf[start:end], dtype="<f8").reshape(rows, cols)
    return np.ascontiguousarray(a), end


def load_vector(path):
    a = load_matrix(path)
    if a.shape[1] != 1:
        raise ValueError(f"{path}: expected a single-column file, got {a.shape}")
    return a[:, 0].copy()


def export_csv(path, a, header=None):
    """Human-readable companion export; full float64 round-trip precision."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    with open(path, "w") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in a:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
