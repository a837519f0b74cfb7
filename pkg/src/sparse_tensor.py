#!/usr/bin/env python3
"""
Coordinate-format sparse 3-mode tensors and the dense/sparse primitives the factorization consumes.

Conventions used throughout the package:

- Modes are numbered 1, 2, 3 in the public API (axis = mode - 1).
- Unfolding follows Kolda & Bader: row index is the mode index, the remaining modes are ordered
  ascending and the earlier one varies fastest. For a 3-mode tensor of shape (n1, n2, n3), entry
  (i1, i2, i3) lands in column i2 + i3 * n2 (mode 1), i1 + i3 * n1 (mode 2), i1 + i2 * n1 (mode 3).
- ``ttm(t, M, mode)`` contracts the tensor's mode against the *rows* of ``M``:
  ``Y[.., r, ..] = sum_i X[.., i, ..] * M[i, r]``. ``M.rows`` must equal ``t.shape[mode]`` and the
  result's mode dimension is ``M.cols``. In Kolda notation this is ``X x_n M^T``, so the Kolda
  product ``G x_n U`` is written ``ttm(G, U.T, n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataError, ShapeError

Shape3 = Tuple[int, int, int]


def _axis(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise ConfigError(f"invalid mode {mode!r}; expected 1, 2 or 3")
    return mode - 1


def _other_axes(axis: int) -> Tuple[int, int]:
    a, b = (k for k in range(3) if k != axis)
    return a, b


@dataclass(frozen=True)
class SparseTensor3:
    """Non-negative 3-mode tensor in canonical coordinate form.

    ``subs`` is an (nnz, 3) int64 array and ``vals`` an (nnz,) float64 array. Canonical form means
    strictly positive values, no duplicate coordinates, and entries sorted by linear index with the
    third mode slowest, so every mode-3 slice is a contiguous run.
    """

    shape: Shape3
    subs: np.ndarray
    vals: np.ndarray

    # --- Construction ---
    @classmethod
    def from_arrays(cls, shape: Sequence[int], subs: np.ndarray, vals: np.ndarray) -> "SparseTensor3":
        """Build from raw coordinates, summing duplicates and dropping explicit zeros."""
        shape3: Shape3 = tuple(int(n) for n in shape)  # type: ignore[assignment]
        if len(shape3) != 3 or any(n < 0 for n in shape3):
            raise ShapeError(f"invalid shape {shape!r}")
        subs = np.asarray(subs, dtype=np.int64).reshape(-1, 3)
        vals = np.asarray(vals, dtype=np.float64).reshape(-1)
        if subs.shape[0] != vals.shape[0]:
            raise ShapeError(f"{subs.shape[0]} coordinates but {vals.shape[0]} values")
        if vals.size and (not np.all(np.isfinite(vals)) or np.any(vals < 0)):
            raise DataError("tensor values must be finite and non-negative")
        if subs.size and (np.any(subs < 0) or np.any(subs >= np.asarray(shape3))):
            raise ShapeError(f"coordinate out of bounds for shape {shape3}")

        n1, n2, _ = shape3
        linear = subs[:, 0] + subs[:, 1] * n1 + subs[:, 2] * (n1 * n2)
        keys, inverse = np.unique(linear, return_inverse=True)
        summed = np.bincount(inverse, weights=vals, minlength=keys.size) if keys.size else np.zeros(0)
        keep = summed > 0
        keys, summed = keys[keep], summed[keep]

        out_subs = np.empty((keys.size, 3), dtype=np.int64)
        out_subs[:, 0] = keys % n1 if n1 else 0
        out_subs[:, 1] = (keys // n1) % n2 if n1 and n2 else 0
        out_subs[:, 2] = keys // (n1 * n2) if n1 and n2 else 0
        out_subs.setflags(write=False)
        summed = summed.astype(np.float64)
        summed.setflags(write=False)
        return cls(shape3, out_subs, summed)

    @classmethod
    def from_entries(cls, shape: Sequence[int], entries: Iterable[Tuple[int, int, int, float]]) -> "SparseTensor3":
        rows = list(entries)
        if not rows:
            return cls.from_arrays(shape, np.zeros((0, 3), dtype=np.int64), np.zeros(0))
        arr = np.asarray(rows, dtype=np.float64)
        return cls.from_arrays(shape, arr[:, :3].astype(np.int64), arr[:, 3])

    @classmethod
    def from_dense(cls, array: np.ndarray) -> "SparseTensor3":
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != 3:
            raise ShapeError(f"expected a 3-mode array, got {array.ndim} modes")
        subs = np.argwhere(array != 0)
        return cls.from_arrays(array.shape, subs, array[tuple(subs.T)])

    # --- Properties ---
    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    @property
    def total(self) -> float:
        return math.fsum(self.vals)

    @property
    def density(self) -> float:
        cells = self.shape[0] * self.shape[1] * self.shape[2]
        return self.nnz / cells if cells else 0.0

    @cached_property
    def _slice_bounds(self) -> np.ndarray:
        return np.searchsorted(self.subs[:, 2], np.arange(self.shape[2] + 1), side="left")

    def slice(self, k: int) -> sp.csr_matrix:
        """Mode-3 slice ``X[:, :, k]`` as a sparse n1 x n2 matrix."""
        lo, hi = self._slice_bounds[k], self._slice_bounds[k + 1]
        return sp.csr_matrix(
            (self.vals[lo:hi], (self.subs[lo:hi, 0], self.subs[lo:hi, 1])),
            shape=(self.shape[0], self.shape[1]),
        )

    def entries(self) -> Iterable[Tuple[int, int, int, float]]:
        for (i, j, k), v in zip(self.subs.tolist(), self.vals.tolist()):
            yield i, j, k, v

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.float64)
        if self.nnz:
            out[tuple(self.subs.T)] = self.vals
        return out

    def scaled(self, factor: float) -> "SparseTensor3":
        return SparseTensor3.from_arrays(self.shape, self.subs, self.vals * factor)


Tensor3 = Union[SparseTensor3, np.ndarray]


# --- Unfolding ---
def matricize(t: SparseTensor3, mode: int) -> sp.coo_matrix:
    """Mode-n unfolding of a sparse tensor as a COO matrix with the same stored entries."""
    axis = _axis(mode)
    a, b = _other_axes(axis)
    rows = t.subs[:, axis]
    cols = t.subs[:, a] + t.subs[:, b] * t.shape[a]
    return sp.coo_matrix(
        (np.array(t.vals), (np.array(rows), np.array(cols))),
        shape=(t.shape[axis], t.shape[a] * t.shape[b]),
    )


def unfold(x: np.ndarray, mode: int) -> np.ndarray:
    """Dense mode-n unfolding under the same column ordering as :func:`matricize`."""
    axis = _axis(mode)
    return np.moveaxis(x, axis, 0).reshape(x.shape[axis], -1, order="F")


def fold(m: np.ndarray, mode: int, shape: Sequence[int]) -> np.ndarray:
    axis = _axis(mode)
    rest = [shape[k] for k in range(3) if k != axis]
    full = np.asarray(m).reshape([shape[axis]] + rest, order="F")
    return np.moveaxis(full, 0, axis)


# --- Tensor times matrix ---
def ttm(t: Tensor3, m: np.ndarray, mode: int) -> np.ndarray:
    """Contract mode ``mode`` of ``t`` against the rows of ``m``; returns a dense tensor."""
    axis = _axis(mode)
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != t.shape[axis]:
        raise ShapeError(f"ttm mode {mode}: matrix {m.shape} does not match tensor dimension {t.shape[axis]}")
    out_shape = list(t.shape)
    out_shape[axis] = m.shape[1]

    if isinstance(t, SparseTensor3):
        xn = matricize(t, mode).tocsc()
        # (rest x n_mode) @ (n_mode x cols) -> rest x cols, then transpose into the mode-n unfolding
        yn = np.asarray((xn.T @ m)).T
        return fold(yn, mode, out_shape)

    x = np.asarray(t, dtype=np.float64)
    y = np.tensordot(x, m, axes=([axis], [0]))
    return np.moveaxis(y, -1, axis)


# --- Norms ---
def frobenius_norm(t: Tensor3) -> float:
    """Square root of the correctly rounded sum of squared entries."""
    values = t.vals if isinstance(t, SparseTensor3) else np.asarray(t, dtype=np.float64).ravel()
    return math.sqrt(math.fsum(np.square(values)))
