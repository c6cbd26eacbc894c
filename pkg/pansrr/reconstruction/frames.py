"""Observation frames and the blur/noise models attached to them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from pansrr.core.raster import ImagePlane
from pansrr.errors import InsufficientFramesError, ReconstructionError

KERNEL_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class BlurSpec:
    """Normalised 2D stencil applied with periodic boundaries; ``None`` is identity."""

    kernel: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kernel is None:
            return
        k = np.array(self.kernel, dtype=np.float64, copy=True)
        if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
            raise ReconstructionError(f"blur kernel must be 2D with odd sides, got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ReconstructionError("blur kernel has non-finite entries")
        if abs(k.sum() - 1.0) > KERNEL_SUM_TOLERANCE:
            raise ReconstructionError(f"blur kernel sums to {k.sum()!r}, expected 1")
        k.flags.writeable = False
        object.__setattr__(self, "kernel", k)

    @classmethod
    def identity(cls) -> "BlurSpec":
        return cls(None)

    @classmethod
    def gaussian(cls, sigma: float, size: int = 5) -> "BlurSpec":
        """Sampled Gaussian of standard deviation ``sigma`` on a ``size x size`` grid."""
        if sigma < 0:
            raise ReconstructionError(f"sigma must be >= 0, got {sigma}")
        if size < 1 or size % 2 == 0:
            raise ReconstructionError(f"size must be odd and positive, got {size}")
        if sigma == 0 or size == 1:
            return cls.identity()
        axis = np.arange(size) - size // 2
        g = np.exp(-(axis**2) / (2.0 * sigma**2))
        kernel = np.outer(g, g)
        return cls(kernel / kernel.sum())

    @property
    def is_identity(self) -> bool:
        return self.kernel is None

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kernel is None:
            return x
        return ndimage.convolve(x, self.kernel, mode="wrap")

    def apply_adjoint(self, x: np.ndarray) -> np.ndarray:
        if self.kernel is None:
            return x
        return ndimage.correlate(x, self.kernel, mode="wrap")


@dataclass(frozen=True)
class NoiseModel:
    """Additive white Gaussian noise, used only when simulating frames."""

    sigma: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ReconstructionError(f"noise sigma must be >= 0, got {self.sigma}")

    def sample(self, shape, rng: np.random.Generator) -> np.ndarray:
        if self.sigma == 0:
            return np.zeros(shape)
        return rng.normal(0.0, self.sigma, size=shape)


@dataclass(frozen=True, eq=False)
class ObservationFrame:
    """One LR observation in approximation scale plus its shift in HR pixels."""

    approximation: ImagePlane
    shift_x: float = 0.0
    shift_y: float = 0.0
    blur: BlurSpec = field(default_factory=BlurSpec.identity)

    @property
    def shape(self):
        return self.approximation.shape

    @property
    def is_reference(self) -> bool:
        return self.shift_x == 0 and self.shift_y == 0


def validate_frames(frames: Sequence[ObservationFrame], minimum: int = 1) -> None:
    if len(frames) < minimum:
        raise InsufficientFramesError(f"need at least {minimum} frame(s), got {len(frames)}")
    shape = frames[0].shape
    for index, frame in enumerate(frames):
        if frame.shape != shape:
            raise ReconstructionError(f"frame {index} is {frame.shape}, frame 0 is {shape}")
    if not frames[0].is_reference:
        raise ReconstructionError(
            f"frame 0 must be the reference with zero shift, got "
            f"({frames[0].shift_x}, {frames[0].shift_y})"
        )
