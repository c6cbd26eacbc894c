"""
First-level orthonormal 2D Haar analysis/synthesis.

For the 2x2 block ``p q / r s`` at block index (i, j)::

    A = (p + q + r + s) / 2      a = (p - q + r - s) / 2
    b = (p + q - r - s) / 2      c = (p - q - r + s) / 2

One level therefore multiplies a constant plane by ``APPROXIMATION_GAIN``.
Deeper decompositions are recursions on the approximation subband.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from pansrr.core.raster import ImagePlane
from pansrr.errors import TransformError

APPROXIMATION_GAIN = 2.0

Quad = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True, eq=False)
class SubbandSet:
    A: ImagePlane
    a: ImagePlane
    b: ImagePlane
    c: ImagePlane

    def __post_init__(self):
        shapes = {"A": self.A.shape, "a": self.a.shape, "b": self.b.shape, "c": self.c.shape}
        if len(set(shapes.values())) != 1:
            raise TransformError(f"subband dimensions disagree: {shapes}")

    @classmethod
    def from_arrays(cls, A, a, b, c) -> "SubbandSet":
        return cls(ImagePlane(A), ImagePlane(a), ImagePlane(b), ImagePlane(c))

    @classmethod
    def zeros(cls, height: int, width: int) -> "SubbandSet":
        zero = ImagePlane.zeros(height, width)
        return cls(zero, zero, zero, zero)

    def arrays(self) -> Quad:
        return self.A.samples, self.a.samples, self.b.samples, self.c.samples

    def details(self) -> Tuple[ImagePlane, ImagePlane, ImagePlane]:
        return self.a, self.b, self.c

    @property
    def shape(self) -> Tuple[int, int]:
        return self.A.shape

    def energy(self) -> float:
        return float(sum(np.sum(x * x) for x in self.arrays()))


# =============================================================================
# ARRAY KERNELS
# =============================================================================


def require_even(shape: Sequence[int], levels: int = 1) -> None:
    step = 2**levels
    for axis, size in zip(("height", "width"), shape):
        if size % step:
            raise TransformError(f"{axis} {size} is not divisible by {step}")


def analyze_array(x: np.ndarray) -> Quad:
    p = x[0::2, 0::2]
    q = x[0::2, 1::2]
    r = x[1::2, 0::2]
    s = x[1::2, 1::2]
    return (
        (p + q + r + s) / 2.0,
        (p - q + r - s) / 2.0,
        (p + q - r - s) / 2.0,
        (p - q - r + s) / 2.0,
    )


def synthesize_array(A: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    m, n = A.shape
    out = np.empty((2 * m, 2 * n), dtype=np.float64)
    out[0::2, 0::2] = (A + a + b + c) / 2.0
    out[0::2, 1::2] = (A - a + b - c) / 2.0
    out[1::2, 0::2] = (A + a - b - c) / 2.0
    out[1::2, 1::2] = (A - a - b + c) / 2.0
    return out


def upsample_array(x: np.ndarray, levels: int = 1) -> np.ndarray:
    for _ in range(levels):
        zero = np.zeros_like(x)
        x = synthesize_array(x, zero, zero, zero)
    return x


# =============================================================================
# OPERATIONS
# =============================================================================


def haar_analyze(plane: ImagePlane) -> SubbandSet:
    require_even(plane.shape)
    return SubbandSet.from_arrays(*analyze_array(plane.samples))


def haar_synthesize(subbands: SubbandSet) -> ImagePlane:
    return ImagePlane(synthesize_array(*subbands.arrays()))


def upsample_via_zero_details(plane: ImagePlane, levels: int = 1) -> ImagePlane:
    """Treat ``plane`` as an approximation and synthesise ``levels`` times with zero detail.

    Each level doubles both dimensions and divides values by the gain, so
    ``haar_analyze(upsample_via_zero_details(P, 1)).A == P``.
    """
    if levels < 1:
        raise TransformError(f"levels must be >= 1, got {levels}")
    return ImagePlane(upsample_array(plane.samples, levels))


def expand_to_grid(plane: ImagePlane, levels: int) -> ImagePlane:
    """Value-preserving upsampling by ``2**levels`` (pixel replication)."""
    if levels < 1:
        raise TransformError(f"levels must be >= 1, got {levels}")
    return ImagePlane(upsample_array(plane.samples, levels) * APPROXIMATION_GAIN**levels)


def circular_shift_subbands(subbands: SubbandSet, dx: int, dy: int) -> SubbandSet:
    """Shift every subband by (dx, dy) subband pixels, ``out[i, j] = in[i + dy, j + dx]``."""
    if dx == 0 and dy == 0:
        return subbands
    return SubbandSet.from_arrays(
        *(np.roll(x, (-int(dy), -int(dx)), axis=(0, 1)) for x in subbands.arrays())
    )


def analyze_levels(plane: ImagePlane, levels: int) -> Tuple[ImagePlane, List[SubbandSet]]:
    """Recursive analysis; returns the deepest approximation and details finest-first."""
    if levels < 1:
        raise TransformError(f"levels must be >= 1, got {levels}")
    require_even(plane.shape, levels)
    details: List[SubbandSet] = []
    current = plane
    for _ in range(levels):
        subbands = haar_analyze(current)
        details.append(subbands)
        current = subbands.A
    return current, details


def synthesize_levels(approximation: ImagePlane, details: Sequence[SubbandSet]) -> ImagePlane:
    """Inverse of :func:`analyze_levels`; ``details`` are finest-first."""
    current = approximation
    for level in reversed(details):
        current = haar_synthesize(SubbandSet(current, level.a, level.b, level.c))
    return current
