"""Toeplitz scheme matrices and their products with vectors.

Only the first column (and row) is stored.  Dense materialization is kept
for reference products and small spectral checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from fracconv.coeff import Scheme, scheme_weights

__all__ = [
    "LowerToeplitz",
    "ToeplitzOperator",
    "build_bhat",
    "combine_beta",
    "matvec_dense",
    "matvec_fft",
    "shift_matrix",
]


@dataclass(frozen=True)
class LowerToeplitz:
    first_col: np.ndarray

    @property
    def n(self) -> int:
        return len(self.first_col)

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_col, np.zeros(self.n))


@dataclass(frozen=True)
class ToeplitzOperator:
    """``T[i, j] = first_col[i - j]`` for ``i >= j`` and ``first_row[j - i]`` otherwise."""

    first_col: np.ndarray
    first_row: np.ndarray
    _fft_size: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        col = np.asarray(self.first_col, dtype=float)
        row = np.asarray(self.first_row, dtype=float)
        if col.shape != row.shape or col.ndim != 1 or col.size == 0:
            raise ValueError("first column and row must be nonempty 1-D arrays of equal length")
        if col[0] != row[0]:
            raise ValueError("first column and row disagree on the diagonal")
        object.__setattr__(self, "first_col", col)
        object.__setattr__(self, "first_row", row)
        size = 1
        while size < 2 * col.size - 1:
            size *= 2
        object.__setattr__(self, "_fft_size", size)

    @property
    def n(self) -> int:
        return len(self.first_col)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_col, self.first_row)

    def transpose(self) -> ToeplitzOperator:
        return ToeplitzOperator(self.first_row, self.first_col)

    def scaled(self, factor: float) -> ToeplitzOperator:
        return ToeplitzOperator(factor * self.first_col, factor * self.first_row)

    @cached_property
    def _symbol(self) -> np.ndarray:
        # circulant embedding [col, 0..., reversed row tail]
        c = np.zeros(self._fft_size)
        c[: self.n] = self.first_col
        if self.n > 1:
            c[-(self.n - 1) :] = self.first_row[:0:-1]
        return np.fft.rfft(c)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return matvec_fft(self, v)

    __matmul__ = matvec


def _check_dim(op: ToeplitzOperator, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (op.n,):
        raise ValueError(f"vector of shape {v.shape} does not match operator of size {op.n}")
    return v


def matvec_dense(op: ToeplitzOperator, v: np.ndarray) -> np.ndarray:
    v = _check_dim(op, v)
    return op.dense() @ v


def matvec_fft(op: ToeplitzOperator, v: np.ndarray) -> np.ndarray:
    """O(N log N) product through a power-of-two circulant embedding."""
    v = _check_dim(op, v)
    y = np.fft.irfft(op._symbol * np.fft.rfft(v, op._fft_size), op._fft_size)
    return y[: op.n]


def build_bhat(scheme, alpha: float, N: int) -> LowerToeplitz:
    """The lower-triangular scheme matrix ``B_hat_m``.

    Its first column is ``2 * rho_m * W_k``: ``2b + c`` for M1 and
    ``2 W_k`` for M2/M3, i.e. twice the sum that multiplies
    ``1/(Gamma(3-a) h^a)`` in the difference quotient.
    """
    scheme = Scheme.parse(scheme)
    if N < 3:
        raise ValueError(f"need at least 3 grid points, got {N}")
    table = scheme_weights(scheme, alpha, N)
    return LowerToeplitz(2.0 * table.prefactor * table.weights)


def combine_beta(bhat: LowerToeplitz, beta: float) -> ToeplitzOperator:
    """``(1+beta)/2 * B_hat + (1-beta)/2 * B_hat^T``."""
    if not (-1.0 <= beta <= 1.0):
        raise ValueError(f"skewness beta must lie in [-1, 1], got {beta}")
    col = 0.5 * (1.0 + beta) * bhat.first_col
    row = 0.5 * (1.0 - beta) * bhat.first_col
    col = col.copy()
    row = row.copy()
    # both triangles share the diagonal
    col[0] = row[0] = bhat.first_col[0]
    return ToeplitzOperator(col, row)


def shift_matrix(N: int) -> np.ndarray:
    """Dense lag-one shift ``J`` (first column ``e_1``)."""
    return np.eye(N, k=-1)
