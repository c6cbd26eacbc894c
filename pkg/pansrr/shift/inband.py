"""
In-band shifts: subbands of a translated plane computed directly from the
subbands of the reference plane.

Shifts follow the sampling convention used across the package: a shift of
``+t`` along an axis yields ``out[k] = in[k + t]``. Real shifts are given in
pixels of the plane the subbands were analysed from. A shift splits into a
circular part (whole subband pixels, i.e. two plane pixels) and a subpixel
remainder ``s / 2**h`` handled by the closed-form operator below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pansrr.core.haar import Quad, SubbandSet, analyze_array, haar_analyze, haar_synthesize
from pansrr.core.raster import ImagePlane
from pansrr.errors import ShiftError
from pansrr.shift.toeplitz import BidiagonalToeplitz

DEFAULT_H_MAX = 6
INTEGER_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ShiftSpec:
    """Subpixel shift ``s / 2**h`` at the analysed level."""

    h: int = 0
    s: int = 0

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 0:
            raise ShiftError(f"h must be a non-negative integer, got {self.h}")
        if int(self.s) != self.s:
            raise ShiftError(f"s must be an integer, got {self.s}")

    @property
    def value(self) -> float:
        return self.s / 2**self.h

    @property
    def scale(self) -> float:
        return float(2 ** (self.h + 1))

    def is_subpixel(self) -> bool:
        return abs(self.s) < 2 ** (self.h + 1)


@dataclass(frozen=True)
class ShiftDecomposition:
    circular: int
    subpixel: ShiftSpec

    @property
    def recomposed(self) -> float:
        return 2 * self.circular + self.subpixel.value


@dataclass(frozen=True)
class ShiftOperator:
    fx: BidiagonalToeplitz
    fy: BidiagonalToeplitz
    k1: BidiagonalToeplitz
    k2: BidiagonalToeplitz
    l1: BidiagonalToeplitz
    l2: BidiagonalToeplitz
    m: int
    n: int


# =============================================================================
# OPERATOR CONSTRUCTION
# =============================================================================


def _axis_factors(
    spec: ShiftSpec, lower_when_positive: bool, periodic: bool
) -> Tuple[BidiagonalToeplitz, BidiagonalToeplitz, BidiagonalToeplitz]:
    scale = spec.scale
    magnitude = abs(spec.s)
    # negative shifts swap the occupied diagonal
    lower = lower_when_positive if spec.s >= 0 else not lower_when_positive
    f = BidiagonalToeplitz((scale - magnitude) / scale, magnitude / scale, lower, periodic)
    k1 = BidiagonalToeplitz(-spec.s / scale, spec.s / scale, lower, periodic)
    k2 = BidiagonalToeplitz((scale - 3 * magnitude) / scale, -magnitude / scale, lower, periodic)
    return f, k1, k2


def build_operator(
    spec_x: ShiftSpec, spec_y: ShiftSpec, m: int, n: int, periodic: bool = True
) -> ShiftOperator:
    """Coefficient stencils for an ``m x n`` subband shift.

    Horizontal factors (Fx, K1, K2) multiply from the right and are lower
    bidiagonal for non-negative shifts; vertical factors (Fy, L1, L2)
    multiply from the left and are upper bidiagonal for non-negative shifts.
    """
    if m < 1 or n < 1:
        raise ShiftError(f"operator dimensions must be positive, got {m}x{n}")
    for axis, spec in (("x", spec_x), ("y", spec_y)):
        if not spec.is_subpixel():
            raise ShiftError(
                f"|s_{axis}|={abs(spec.s)} >= 2^(h+1)={int(spec.scale)}; decompose the shift first"
            )
    fx, k1, k2 = _axis_factors(spec_x, True, periodic)
    fy, l1, l2 = _axis_factors(spec_y, False, periodic)
    return ShiftOperator(fx=fx, fy=fy, k1=k1, k2=k2, l1=l1, l2=l2, m=m, n=n)


# =============================================================================
# APPLICATION
# =============================================================================


def _sandwich(left: BidiagonalToeplitz, x: np.ndarray, right: BidiagonalToeplitz) -> np.ndarray:
    return right.right_multiply(left.left_multiply(x))


def apply_inband_arrays(quad: Quad, op: ShiftOperator) -> Quad:
    A, a, b, c = quad
    Fx, Fy, K1, K2, L1, L2 = op.fx, op.fy, op.k1, op.k2, op.l1, op.l2
    A_s = _sandwich(Fy, A, Fx) + _sandwich(Fy, a, K1) + _sandwich(L1, b, Fx) + _sandwich(L1, c, K1)
    a_s = -_sandwich(Fy, A, K1) + _sandwich(Fy, a, K2) - _sandwich(L1, b, K1) + _sandwich(L1, c, K2)
    b_s = -_sandwich(L1, A, Fx) - _sandwich(L1, a, K1) + _sandwich(L2, b, Fx) + _sandwich(L2, c, K1)
    c_s = _sandwich(L1, A, K1) - _sandwich(L1, a, K2) - _sandwich(L2, b, K1) + _sandwich(L2, c, K2)
    return A_s, a_s, b_s, c_s


def apply_inband_shift(subbands: SubbandSet, op: ShiftOperator) -> SubbandSet:
    if subbands.shape != (op.m, op.n):
        raise ShiftError(f"operator is {op.m}x{op.n}, subbands are {subbands.shape}")
    return SubbandSet.from_arrays(*apply_inband_arrays(subbands.arrays(), op))


# =============================================================================
# ARBITRARY SHIFTS
# =============================================================================


def _encode_remainder(remainder: float, h_max: int) -> ShiftSpec:
    for h in range(h_max + 1):
        scaled = remainder * 2**h
        if math.isclose(scaled, round(scaled), rel_tol=0.0, abs_tol=INTEGER_TOLERANCE):
            return ShiftSpec(h, int(round(scaled)))
    # not dyadic within h_max: round to the grid, then drop redundant levels
    h, s = h_max, int(round(remainder * 2**h_max))
    while h > 0 and s % 2 == 0:
        h, s = h - 1, s // 2
    return ShiftSpec(h, s)


def decompose_shift(true_shift: float, h_max: int = DEFAULT_H_MAX) -> ShiftDecomposition:
    """Split a shift into whole subband pixels and a subpixel :class:`ShiftSpec`.

    Example:
        >>> decompose_shift(1.5)
        ShiftDecomposition(circular=1, subpixel=ShiftSpec(h=1, s=-1))
    """
    if h_max < 0:
        raise ShiftError(f"h_max must be >= 0, got {h_max}")
    t = float(true_shift)
    if not math.isfinite(t):
        raise ShiftError(f"shift must be finite, got {true_shift}")
    nearest = round(t)
    if math.isclose(t, nearest, rel_tol=0.0, abs_tol=INTEGER_TOLERANCE):
        k = int(nearest)
        circular = k // 2
        remainder = float(k - 2 * circular)
    else:
        ceil, floor = math.ceil(t), math.floor(t)
        if ceil % 2 == 0:
            circular, remainder = ceil // 2, t - ceil
        else:
            circular, remainder = floor // 2, t - floor
    return ShiftDecomposition(circular, _encode_remainder(remainder, h_max))


def shift_arrays(
    quad: Quad, shift_x: float, shift_y: float, h_max: int = DEFAULT_H_MAX, periodic: bool = True
) -> Quad:
    dx = decompose_shift(shift_x, h_max)
    dy = decompose_shift(shift_y, h_max)
    if dx.circular or dy.circular:
        quad = tuple(np.roll(x, (-dy.circular, -dx.circular), axis=(0, 1)) for x in quad)
    if dx.subpixel.s == 0 and dy.subpixel.s == 0:
        return quad
    m, n = quad[0].shape
    return apply_inband_arrays(quad, build_operator(dx.subpixel, dy.subpixel, m, n, periodic))


def shift_subbands(
    subbands: SubbandSet,
    shift_x: float,
    shift_y: float,
    h_max: int = DEFAULT_H_MAX,
    periodic: bool = True,
) -> SubbandSet:
    """Subbands of the plane shifted by (shift_x, shift_y) plane pixels."""
    return SubbandSet.from_arrays(*shift_arrays(subbands.arrays(), shift_x, shift_y, h_max, periodic))


def shift_plane(
    plane: ImagePlane, shift_x: float, shift_y: float, h_max: int = DEFAULT_H_MAX
) -> ImagePlane:
    """Translate a plane by a subpixel amount through its subbands."""
    return haar_synthesize(shift_subbands(haar_analyze(plane), shift_x, shift_y, h_max))


def shifted_approximation(
    plane: np.ndarray, shift_x: float, shift_y: float, h_max: int = DEFAULT_H_MAX
) -> np.ndarray:
    """Approximation subband of ``plane`` shifted by (shift_x, shift_y)."""
    return shift_arrays(analyze_array(plane), shift_x, shift_y, h_max)[0]


def lr_to_hr_shift(shift: float) -> float:
    return 2.0 * shift


def hr_to_lr_shift(shift: float) -> float:
    return 0.5 * shift
