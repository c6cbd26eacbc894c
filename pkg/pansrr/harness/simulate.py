"""
Simulated datasets: a multiband truth and its shifted, blurred, downsampled
LR observations.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np
from skimage import data
from skimage.transform import resize

from pansrr.core.haar import APPROXIMATION_GAIN, analyze_array, require_even
from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.errors import TransformError
from pansrr.models import DEFAULT_SHIFTS, ExperimentConfig, GroundTruthRecord
from pansrr.reconstruction.frames import BlurSpec, NoiseModel
from pansrr.shift.inband import DEFAULT_H_MAX, shift_plane

Shift = Tuple[float, float]


def _test_pattern(size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size] / size
    bars = 0.2 * np.sin(2 * np.pi * 4 * xx) * np.cos(2 * np.pi * 3 * yy)
    wave = 0.15 * np.cos(2 * np.pi * (5 * xx + 2 * yy))
    disc = 0.2 * (((xx - 0.5) ** 2 + (yy - 0.5) ** 2) < 0.08)
    return 0.4 + bars + wave + disc


def _natural_crop(size: int) -> np.ndarray:
    camera = data.camera().astype(np.float64) / 255.0
    crop = camera[96:352, 128:384]
    return resize(crop, (size, size), order=1, anti_aliasing=True, preserve_range=True)


def synthetic_truth(size: int = 64, bands: int = 6, seed: int = 0) -> MultibandVolume:
    """Deterministic multiband truth in [0, 1].

    Each band blends a structured pattern with a natural-image crop using
    its own weight and gain, so the bands differ spectrally but share
    geometry.
    """
    if size < 8 or size % 2:
        raise TransformError(f"synthetic size must be even and >= 8, got {size}")
    rng = np.random.default_rng(seed)
    pattern = _test_pattern(size)
    natural = _natural_crop(size)
    planes = []
    for _ in range(bands):
        weight = rng.uniform(0.3, 0.7)
        gain = rng.uniform(0.7, 1.0)
        offset = rng.uniform(0.0, 0.1)
        band = weight * pattern + (1.0 - weight) * gain * natural + offset
        planes.append(ImagePlane(np.clip(band, 0.0, 1.0)))
    return MultibandVolume(tuple(planes))


def observe_plane(
    plane: ImagePlane,
    shift: Shift,
    blur: BlurSpec,
    noise: NoiseModel,
    rng: np.random.Generator,
    h_max: int = DEFAULT_H_MAX,
) -> ImagePlane:
    """Shift, blur, take the approximation subband and return it in image scale."""
    sx, sy = shift
    shifted = shift_plane(plane, sx, sy, h_max).samples if (sx or sy) else plane.samples
    lr = analyze_array(blur.apply(shifted))[0] / APPROXIMATION_GAIN
    return ImagePlane(lr + noise.sample(lr.shape, rng))


def simulate_lr_set(
    truth: MultibandVolume,
    shifts: Optional[Sequence[Shift]] = None,
    blur_sigma: float = 0.0,
    blur_size: int = 5,
    noise_sigma: float = 0.0,
    seed: int = 0,
    h_max: int = DEFAULT_H_MAX,
) -> Tuple[List[MultibandVolume], GroundTruthRecord]:
    """LR observations of ``truth``: the reference plus one volume per shift.

    Args:
        truth: HR volume, treated as the pansharpened reference scene.
        shifts: (x, y) HR-pixel shifts of the non-reference members;
            defaults to one pixel horizontally, vertically and diagonally.
        blur_sigma: Gaussian blur applied after shifting (0 = none).
        blur_size: odd side of the sampled Gaussian kernel.
        noise_sigma: additive noise per frame, in image scale.
        seed: seeds the noise generator.

    Returns:
        ``[reference, *shifted]`` volumes at half size, and the record of
        what was applied.
    """
    try:
        require_even(truth.shape)
    except TransformError as exc:
        raise TransformError(f"truth volume: {exc}") from exc
    shifts = list(DEFAULT_SHIFTS if shifts is None else shifts)
    blur = BlurSpec.gaussian(blur_sigma, blur_size)
    noise = NoiseModel(noise_sigma)
    rng = np.random.default_rng(seed)
    members = [(0.0, 0.0)] + [(float(x), float(y)) for x, y in shifts]
    volumes = [
        truth.map_bands(lambda band, s=shift: observe_plane(band, s, blur, noise, rng, h_max))
        for shift in members
    ]
    record = GroundTruthRecord(
        shifts=members,
        blur_sigma=blur_sigma,
        blur_size=blur_size,
        noise_sigma=noise_sigma,
        seed=seed,
    )
    return volumes, record


def simulate_from_config(
    truth: MultibandVolume, config: ExperimentConfig
) -> Tuple[List[MultibandVolume], GroundTruthRecord]:
    return simulate_lr_set(
        truth,
        shifts=config.shifts,
        blur_sigma=config.blur_sigma,
        blur_size=config.blur_size,
        noise_sigma=config.noise_sigma,
        seed=config.seed,
        h_max=config.h_max,
    )
