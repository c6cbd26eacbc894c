"""Bidiagonal Toeplitz stencils: a diagonal, one neighbour diagonal, no storage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BidiagonalToeplitz:
    """``diagonal * I + off_diagonal * N`` where N is the sub- (lower) or
    super-diagonal (upper) shift, optionally closed periodically.

    ``left_multiply`` computes ``T @ X`` and ``right_multiply`` computes
    ``X @ T`` as two-term stencils along the matching axis.
    """

    diagonal: float
    off_diagonal: float
    lower: bool = True
    periodic: bool = True

    @classmethod
    def identity(cls, periodic: bool = True) -> "BidiagonalToeplitz":
        return cls(1.0, 0.0, True, periodic)

    def transpose(self) -> "BidiagonalToeplitz":
        return BidiagonalToeplitz(self.diagonal, self.off_diagonal, not self.lower, self.periodic)

    def _neighbour(self, x: np.ndarray, axis: int, step: int) -> np.ndarray:
        # out[k] = x[k + step] along axis
        if self.periodic:
            return np.roll(x, -step, axis=axis)
        out = np.zeros_like(x)
        src = [slice(None)] * x.ndim
        dst = [slice(None)] * x.ndim
        if step > 0:
            src[axis], dst[axis] = slice(step, None), slice(None, -step)
        else:
            src[axis], dst[axis] = slice(None, step), slice(-step, None)
        out[tuple(dst)] = x[tuple(src)]
        return out

    def left_multiply(self, x: np.ndarray) -> np.ndarray:
        step = -1 if self.lower else 1
        return self.diagonal * x + self.off_diagonal * self._neighbour(x, 0, step)

    def right_multiply(self, x: np.ndarray) -> np.ndarray:
        step = 1 if self.lower else -1
        return self.diagonal * x + self.off_diagonal * self._neighbour(x, 1, step)

    def dense(self, size: int) -> np.ndarray:
        """Materialise the ``size x size`` matrix (diagnostics and tests only)."""
        mat = np.eye(size) * self.diagonal
        last = size if self.periodic else size - 1
        for i in range(last):
            row, col = ((i + 1) % size, i) if self.lower else (i, (i + 1) % size)
            mat[row, col] += self.off_diagonal
        return mat
