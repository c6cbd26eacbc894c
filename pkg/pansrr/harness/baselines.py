"""
Reference methods the proposed reconstruction is compared against:
bilinear and bicubic upscaling of the reference frame, and classic
pixel-domain iterated back projection.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from skimage.transform import resize

from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.errors import DivergenceError, ReconstructionError
from pansrr.logging_utils import log_event
from pansrr.models import ConvergenceReport, IBPConfig

BASELINES = ("linear", "bicubic", "classic_ibp")
SCALE = 2

Shift = Tuple[float, float]


def upscale(plane: ImagePlane, order: int) -> ImagePlane:
    """2x spline interpolation (order 1 bilinear, order 3 bicubic)."""
    h, w = plane.shape
    out = resize(
        plane.samples,
        (SCALE * h, SCALE * w),
        order=order,
        mode="edge",
        anti_aliasing=False,
        preserve_range=True,
    )
    return ImagePlane(out)


def classic_forward(hr: np.ndarray, shift: Shift, psf_sigma: float = 0.0):
    """Shift (bilinear, wrapped), Gaussian PSF, 2x2 block mean."""
    sx, sy = shift
    moved = hr if not (sx or sy) else ndimage.shift(hr, (-sy, -sx), order=1, mode="grid-wrap")
    blurred = ndimage.gaussian_filter(moved, psf_sigma, mode="wrap") if psf_sigma else moved
    h, w = blurred.shape
    return blurred.reshape(h // SCALE, SCALE, w // SCALE, SCALE).mean(axis=(1, 3))


def _classic_back_project(residual: np.ndarray, shift: Shift, kernel: np.ndarray) -> np.ndarray:
    sx, sy = shift
    # block-mean adjoint up to the SCALE**2 factor: replicate each residual
    upsampled = np.kron(residual, np.ones((SCALE, SCALE)))
    if sx or sy:
        upsampled = ndimage.shift(upsampled, (sy, sx), order=1, mode="grid-wrap")
    return ndimage.convolve(upsampled, kernel, mode="wrap")


def classic_ibp(
    frames: Sequence[ImagePlane],
    shifts: Sequence[Shift],
    config: IBPConfig = IBPConfig(),
    psf_sigma: float = 0.0,
) -> Tuple[ImagePlane, ConvergenceReport]:
    """Pixel-domain IBP started from the bilinear upscale of frame 0."""
    if not frames:
        raise ReconstructionError("classic IBP needs at least one frame")
    if len(shifts) != len(frames):
        raise ReconstructionError(f"{len(shifts)} shifts for {len(frames)} frames")
    estimate = upscale(frames[0], order=1).samples.copy()
    kernel = config.kernel
    step = config.lam / len(frames)
    report = ConvergenceReport(method="classic_ibp", tau=config.tau)
    for iteration in range(1, config.max_iterations + 1):
        residuals = [f.samples - classic_forward(estimate, s, psf_sigma) for f, s in zip(frames, shifts)]
        mean_mse = float(np.mean([np.mean(r * r) for r in residuals]))
        if not np.isfinite(mean_mse):
            raise DivergenceError(iteration)
        report.residuals.append(mean_mse)
        log_event("classic_ibp_iteration", level=logging.DEBUG, iteration=iteration, residual=mean_mse)
        if mean_mse <= config.tau:
            report.converged = True
            break
        correction = sum(_classic_back_project(r, s, kernel) for r, s in zip(residuals, shifts))
        estimate = estimate + step * correction
    return ImagePlane(estimate), report


def run_baseline(
    name: str,
    reference_lr: MultibandVolume,
    frames: Optional[Sequence[MultibandVolume]] = None,
    shifts: Optional[Sequence[Shift]] = None,
    config: Optional[IBPConfig] = None,
    psf_sigma: float = 0.0,
    workers: int = 1,
) -> MultibandVolume:
    """Upscale ``reference_lr`` 2x with one of :data:`BASELINES`.

    ``classic_ibp`` uses every volume in ``frames`` (reference first) with
    their HR-pixel ``shifts``; without frames it degenerates to the single
    reference frame.
    """
    if name not in BASELINES:
        raise ReconstructionError(f"unknown baseline {name!r}; expected one of {BASELINES}")
    if name in ("linear", "bicubic"):
        order = 1 if name == "linear" else 3
        result = reference_lr.map_bands(lambda band: upscale(band, order))
    else:
        volumes = list(frames) if frames else [reference_lr]
        offsets = list(shifts) if shifts else [(0.0, 0.0)] * len(volumes)
        cfg = config or IBPConfig()

        def run(band: int) -> ImagePlane:
            plane, _ = classic_ibp([v.band(band) for v in volumes], offsets, cfg, psf_sigma)
            return plane

        with ThreadPoolExecutor(max_workers=workers) as pool:
            planes = list(pool.map(run, range(reference_lr.band_count)))
        result = MultibandVolume(tuple(planes), reference_lr.band_labels)
    log_event("baseline_finished", baseline=name, bands=result.band_count)
    return result
