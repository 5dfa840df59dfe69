"""Dense float64 linear algebra, backed by numpy.

Matrices are 2-D ``numpy.ndarray`` of float64 in row-major order, vectors
are 1-D.  The helpers here add the package's contract on top of numpy:
shape mismatches raise :class:`ShapeError` naming both operands, and public
results are guaranteed finite.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

Matrix = np.ndarray
Vector = np.ndarray


def as_matrix(data, rows: int | None = None, cols: int | None = None) -> Matrix:
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if rows is not None and m.shape[0] != rows:
        raise ShapeError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ShapeError(f"expected {cols} cols, got {m.shape[1]}")
    return m


def as_vector(data, length: int | None = None) -> Vector:
    v = np.asarray(data, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got ndim={v.ndim}")
    if length is not None and v.shape[0] != length:
        raise ShapeError(f"expected length {length}, got {v.shape[0]}")
    return v


def require_finite(arr: np.ndarray, what: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"{what} contains non-finite entries")
    return arr


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product with shape checking and a finiteness guarantee."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return require_finite(a @ b, "matrix product")
