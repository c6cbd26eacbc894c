"""
AWLP pansharpening

Injects PAN wavelet detail into each MS band in proportion to the band's
share of the total MS intensity at that pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from pansrr.core.haar import (
    SubbandSet,
    analyze_levels,
    expand_to_grid,
    require_even,
    synthesize_levels,
    upsample_array,
)
from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.errors import PansharpenError, TransformError
from pansrr.logging_utils import log_event


@dataclass(frozen=True, eq=False)
class PanDetail:
    levels: int
    per_level: Tuple[ImagePlane, ...]
    injection: ImagePlane


def infer_levels(ms: MultibandVolume, pan: ImagePlane) -> int:
    """Decomposition depth from the PAN/MS resolution ratio."""
    if pan.width % ms.width or pan.height % ms.height:
        raise PansharpenError(
            f"PAN {pan.height}x{pan.width} is not an integer multiple of MS {ms.height}x{ms.width}"
        )
    ratio_x, ratio_y = pan.width // ms.width, pan.height // ms.height
    if ratio_x != ratio_y:
        raise PansharpenError(f"anisotropic PAN/MS ratio {ratio_x}x{ratio_y}")
    levels = int(round(math.log2(ratio_x))) if ratio_x > 1 else 0
    if levels < 1 or 2**levels != ratio_x:
        raise PansharpenError(f"PAN/MS ratio {ratio_x} is not a power of two >= 2")
    return levels


def pan_detail_stack(pan: ImagePlane, levels: int) -> PanDetail:
    """Total PAN high-frequency content across ``levels`` Haar levels.

    The injection plane is PAN minus its depth-``levels`` approximation
    brought back to PAN resolution with zero detail. ``per_level`` holds the
    contribution of each level separately (finest first); they sum to the
    injection plane.
    """
    if levels < 1:
        raise PansharpenError(f"levels must be >= 1, got {levels}")
    try:
        require_even(pan.shape, levels)
    except TransformError as exc:
        raise PansharpenError(f"PAN dimensions: {exc}") from exc
    approximation, details = analyze_levels(pan, levels)
    lowpass = upsample_array(approximation.samples, levels)
    injection = ImagePlane(pan.samples - lowpass)

    zero = ImagePlane.zeros(*approximation.shape)
    per_level = []
    for keep in range(levels):
        masked = [
            d if i == keep else SubbandSet.zeros(*d.shape) for i, d in enumerate(details)
        ]
        per_level.append(synthesize_levels(zero, masked))
    return PanDetail(levels=levels, per_level=tuple(per_level), injection=injection)


def inject_proportional(upsampled: MultibandVolume, injection: ImagePlane) -> MultibandVolume:
    """``HR_i = MS_i + MS_i / sum_j MS_j * W``; zero band-sum pixels get ``W / L``."""
    if upsampled.shape != injection.shape:
        raise PansharpenError(
            f"injection plane {injection.shape} does not match bands {upsampled.shape}"
        )
    bands = upsampled.stack()
    total = bands.sum(axis=0)
    positive = total > 0
    uniform = 1.0 / upsampled.band_count
    safe_total = np.where(positive, total, 1.0)
    fused = []
    for band in bands:
        weight = np.where(positive, band / safe_total, uniform)
        fused.append(ImagePlane(band + weight * injection.samples))
    return MultibandVolume(tuple(fused), upsampled.band_labels)


def awlp_fuse(ms: MultibandVolume, pan: ImagePlane, levels: Optional[int] = None) -> MultibandVolume:
    """Fuse MS bands with PAN detail.

    Args:
        ms: multispectral volume, strictly non-negative samples.
        pan: panchromatic plane, ``2**levels`` times the MS size.
        levels: decomposition depth; inferred from the size ratio when omitted.

    Returns:
        Volume on the PAN grid with the same band count and labels as ``ms``.
    """
    inferred = infer_levels(ms, pan)
    if levels is not None and levels != inferred:
        raise PansharpenError(
            f"PAN {pan.height}x{pan.width} is not MS {ms.height}x{ms.width} times 2^{levels}"
        )
    levels = inferred
    for label, band in zip(ms.band_labels, ms.bands):
        if np.any(band.samples < 0):
            raise PansharpenError(f"band {label} has negative samples")

    detail = pan_detail_stack(pan, levels)
    upsampled = ms.map_bands(lambda band: expand_to_grid(band, levels))
    fused = inject_proportional(upsampled, detail.injection)
    log_event(
        "awlp_fused",
        bands=ms.band_count,
        levels=levels,
        injection_rms=float(np.sqrt(np.mean(detail.injection.samples**2))),
    )
    return fused
