"""Matrix exchange files.

Binary layout (little endian)::

    bytes 0-3    magic b"EMX1"
    bytes 4-7    rows   (uint32)
    bytes 8-11   cols   (uint32)
    bytes 12-15  field  (uint32, 0 = real, 1 = complex)
    payload      column-major float64; complex entries as (re, im) pairs

CSV input is one matrix row per line; complex entries use Python syntax
(``1+2j``). Lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMX1"
_HEADER = struct.Struct("<4sIII")


def write_matrix(path, A) -> None:
    a = np.asarray(A)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    is_complex = np.iscomplexobj(a)
    rows, cols = a.shape
    a = np.asfortranarray(a.astype("<c16" if is_complex else "<f8"))
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols, int(is_complex)))
        fh.write(a.tobytes(order="F"))


def read_matrix(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, rows, cols, tag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if tag not in (0, 1):
        raise ValueError(f"{path}: unknown field tag {tag}")
    dtype = "<c16" if tag else "<f8"
    expected = rows * cols * np.dtype(dtype).itemsize
    payload = data[_HEADER.size:]
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    a = np.frombuffer(payload, dtype=dtype).reshape((rows, cols), order="F")
    out = a.astype(np.complex128 if tag else np.float64)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{path}: non-finite entries")
    return out


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            rows.append([complex(v.strip().replace(" ", "")) for v in rec])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged rows")
    a = np.array(rows, dtype=np.complex128)
    if np.all(a.imag == 0):
        a = a.real.copy()
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{path}: non-finite entries")
    return a


def load_matrix(path) -> np.ndarray:
    """Read either format, choosing by extension (``.csv`` or binary)."""
    if str(path).lower().endswith(".csv"):
        return read_matrix_csv(path)
    return read_matrix(path)
