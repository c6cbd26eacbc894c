"""
Rigid registration of frames against a reference, and rotation removal.

Rotation is estimated coarsely from the angular correlation of high-passed
magnitude spectra in polar coordinates, then refined jointly with the
translation by minimising the mismatch over a central window. Translations
follow the sampling convention (``target[y, x] ~ reference[y + ty, x + tx]``
once rotation is removed) and are left in the frames for the SRR stage.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage, optimize
from skimage.filters import window
from skimage.registration import phase_cross_correlation
from skimage.transform import rotate, warp_polar

from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.errors import RegistrationError
from pansrr.logging_utils import log_event
from pansrr.models import RigidParams

CROP_FRACTION = 0.3
UPSAMPLE_FACTOR = 100
ANGULAR_BINS = 720
REFINE_SPAN_DEG = 3.0
MAX_RELATIVE_RESIDUAL = 0.25
ROTATION_TOLERANCE = math.radians(0.01)


# =============================================================================
# ESTIMATION HELPERS
# =============================================================================


def _prepared(x: np.ndarray) -> np.ndarray:
    centred = x - x.mean()
    return centred * window("hann", x.shape)


def _spectrum_highpass(shape: Tuple[int, int]) -> np.ndarray:
    ky = np.cos(np.linspace(-math.pi / 2, math.pi / 2, shape[0]))
    kx = np.cos(np.linspace(-math.pi / 2, math.pi / 2, shape[1]))
    x = np.outer(ky, kx)
    return (1.0 - x) * (2.0 - x)


def _coarse_rotation_deg(reference: np.ndarray, target: np.ndarray) -> float:
    """Rotation in degrees from polar correlation of magnitude spectra, in (-90, 90]."""
    h, w = reference.shape
    hp = _spectrum_highpass((h, w))
    centre = (h // 2, w // 2)
    radius = min(h, w) // 2 - 1
    polars = []
    for image in (reference, target):
        spectrum = np.fft.fftshift(np.abs(np.fft.fft2(_prepared(image))))
        magnitude = np.log1p(spectrum * hp)
        polar = warp_polar(
            magnitude, center=centre, radius=radius, output_shape=(ANGULAR_BINS, radius)
        )
        # magnitude spectra are point-symmetric: half a turn is one period
        polars.append(polar[: ANGULAR_BINS // 2, 2:])
    shift = phase_cross_correlation(polars[0], polars[1], upsample_factor=20, normalization=None)[0]
    degrees = float(shift[0]) * 360.0 / ANGULAR_BINS
    degrees = (degrees + 90.0) % 180.0 - 90.0
    return degrees


def _translation(reference: np.ndarray, target: np.ndarray) -> Tuple[float, float]:
    shift = phase_cross_correlation(
        reference, target, upsample_factor=UPSAMPLE_FACTOR, normalization=None
    )[0]
    return float(shift[0]), float(shift[1])


def _rotate(x: np.ndarray, degrees: float) -> np.ndarray:
    # ImagePlane samples are read-only; skimage warps need a writable buffer
    return rotate(np.array(x, dtype=np.float64), degrees, order=1, mode="edge", preserve_range=True)


def _central_window(shape: Tuple[int, int]) -> Tuple[slice, slice]:
    h, w = shape
    half_h = max(2, int(CROP_FRACTION * h))
    half_w = max(2, int(CROP_FRACTION * w))
    cy, cx = h // 2, w // 2
    return slice(max(0, cy - half_h), cy + half_h), slice(max(0, cx - half_w), cx + half_w)


class _Mismatch:
    """MSE between the derotated target and the translated reference."""

    def __init__(self, reference: np.ndarray, target: np.ndarray):
        self.reference = reference
        self.target = target
        self.crop = _central_window(reference.shape)
        self.evaluations = 0

    def __call__(self, x: np.ndarray) -> float:
        self.evaluations += 1
        degrees, ty, tx = (float(v) for v in x)
        derotated = _rotate(self.target, -degrees) if degrees else self.target
        predicted = ndimage.shift(self.reference, (-ty, -tx), order=3, mode="grid-wrap")
        diff = derotated[self.crop] - predicted[self.crop]
        return float(np.mean(diff * diff))


# =============================================================================
# OPERATIONS
# =============================================================================


def estimate_transform(reference: ImagePlane, target: ImagePlane) -> RigidParams:
    """Rotation + translation taking ``reference`` onto ``target``.

    Returns identity parameters for identical planes. Estimation problems
    (non-finite cost, poor final fit) come back as ``valid=False`` with a
    diagnostic rather than raising.
    """
    if reference.shape != target.shape:
        raise RegistrationError(f"shape mismatch {reference.shape} vs {target.shape}")
    ref, tgt = reference.samples, target.samples
    for name, arr in (("reference", ref), ("target", tgt)):
        if np.ptp(arr) == 0.0:
            raise RegistrationError(f"{name} plane is constant")
    if np.array_equal(ref, tgt):
        return RigidParams.identity()

    cost = _Mismatch(ref, tgt)
    coarse = _coarse_rotation_deg(ref, tgt)
    starts = []
    for degrees in dict.fromkeys((0.0, coarse, -coarse)):
        derotated = _rotate(tgt, -degrees) if degrees else tgt
        ty, tx = _translation(ref, derotated)
        start = np.array([degrees, ty, tx])
        starts.append((cost(start), degrees, start))
    _, centre_deg, x0 = min(starts, key=lambda item: item[0])

    bounds = [
        (centre_deg - REFINE_SPAN_DEG, centre_deg + REFINE_SPAN_DEG),
        (x0[1] - 2.0, x0[1] + 2.0),
        (x0[2] - 2.0, x0[2] + 2.0),
    ]
    result = optimize.minimize(
        cost,
        x0,
        method="Powell",
        bounds=bounds,
        options={"xtol": 1e-5, "ftol": 1e-12, "maxfev": 4000},
    )
    degrees, ty, tx = (float(v) for v in result.x)
    residual = float(result.fun)
    scale = float(np.var(ref[cost.crop]))
    relative = residual / scale if scale > 0 else math.inf

    valid, diagnostics = True, ""
    if not (np.all(np.isfinite(result.x)) and math.isfinite(residual)):
        valid, diagnostics = False, "non-finite estimate"
        degrees, ty, tx = 0.0, 0.0, 0.0
    elif relative > MAX_RELATIVE_RESIDUAL:
        valid, diagnostics = False, f"poor fit: relative residual {relative:.3g}"
    params = RigidParams(
        rotation=math.radians(degrees),
        translation_x=tx,
        translation_y=ty,
        valid=valid,
        diagnostics=diagnostics,
    )
    log_event(
        "registration_estimated",
        rotation_deg=degrees,
        translation_x=tx,
        translation_y=ty,
        relative_residual=relative,
        evaluations=cost.evaluations,
        valid=valid,
    )
    return params


def derotate(target: ImagePlane, params: RigidParams, tolerance: float = 0.0) -> ImagePlane:
    """Rotate ``target`` back by ``params.rotation`` about its centre (bilinear).

    Translation is left in place. Rotations with magnitude at most
    ``tolerance`` radians return the input unchanged.
    """
    if abs(params.rotation) <= tolerance:
        return target
    return ImagePlane(_rotate(target.samples, -math.degrees(params.rotation)))


def propagate_params(
    params: RigidParams, volume: MultibandVolume, tolerance: float = 0.0, workers: int = 1
) -> MultibandVolume:
    """Apply one band's registration to every band of ``volume``."""
    if not params.valid:
        raise RegistrationError(f"cannot propagate invalid parameters: {params.diagnostics}")
    if abs(params.rotation) <= tolerance:
        return volume
    with ThreadPoolExecutor(max_workers=workers) as pool:
        bands = list(pool.map(lambda band: derotate(band, params, tolerance), volume.bands))
    return MultibandVolume(tuple(bands), volume.band_labels)


# =============================================================================
# COMMON COVERAGE
# =============================================================================


def common_crop_margin(params_list: Sequence[RigidParams], width: int, height: int) -> int:
    """Smallest uniform margin keeping every derotated frame's valid area.

    The margin keeps the cropped rectangle centred; both dimensions shrink by
    ``2 * margin`` so even dimensions stay even.
    """
    margin = 0
    for params in params_list:
        angle = abs(params.rotation)
        if angle == 0.0:
            continue
        cos_t, sin_t = math.cos(angle), math.sin(angle)
        for candidate in range(margin, min(width, height) // 2):
            half_w, half_h = width / 2 - candidate, height / 2 - candidate
            fits_x = half_w * cos_t + half_h * sin_t <= width / 2 + 0.5
            fits_y = half_w * sin_t + half_h * cos_t <= height / 2 + 0.5
            if fits_x and fits_y:
                margin = candidate
                break
        else:
            raise RegistrationError(f"rotation {math.degrees(angle):.2f} deg leaves no common area")
    return margin


def crop_volume(volume: MultibandVolume, margin: int) -> MultibandVolume:
    if margin == 0:
        return volume
    if 2 * margin >= min(volume.width, volume.height):
        raise RegistrationError(f"margin {margin} consumes the whole {volume.shape} frame")
    return volume.map_bands(lambda b: ImagePlane(b.samples[margin:-margin, margin:-margin]))


@dataclass(frozen=True)
class RegistrationResult:
    volumes: List[MultibandVolume]
    params: List[RigidParams]
    kept: List[int]
    margin: int


def register_volumes(
    volumes: Sequence[MultibandVolume],
    reference_index: int = 0,
    band: int = 0,
    tolerance: float = ROTATION_TOLERANCE,
    workers: int = 1,
) -> RegistrationResult:
    """Register every volume on one band, derotate all bands, crop to common area.

    Invalid frames are dropped and reported in the log; ``kept`` lists the
    indices of the volumes that survive, reference first.
    """
    if not volumes:
        raise RegistrationError("no volumes to register")
    reference = volumes[reference_index].band(band)
    params: List[Optional[RigidParams]] = []
    for index, volume in enumerate(volumes):
        if index == reference_index:
            params.append(RigidParams.identity())
            continue
        estimate = estimate_transform(reference, volume.band(band))
        if not estimate.valid:
            log_event("registration_invalid", frame=index, diagnostics=estimate.diagnostics)
        params.append(estimate)

    kept = [reference_index] + [
        i for i, p in enumerate(params) if i != reference_index and p.valid
    ]
    # rotations under the tolerance are not resampled, so they cost no margin
    applied = [
        params[i]
        if abs(params[i].rotation) > tolerance
        else params[i].model_copy(update={"rotation": 0.0})
        for i in kept
    ]
    margin = common_crop_margin(applied, reference.width, reference.height)
    registered = [
        crop_volume(propagate_params(p, volumes[i], tolerance, workers), margin)
        for i, p in zip(kept, applied)
    ]
    return RegistrationResult(
        volumes=registered, params=[params[i] for i in kept], kept=kept, margin=margin
    )
