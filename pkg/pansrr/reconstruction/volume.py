"""Per-band reconstruction of registered multiband frame sets."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

from pansrr.core.haar import APPROXIMATION_GAIN
from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.errors import ReconstructionError
from pansrr.logging_utils import log_event
from pansrr.models import ConvergenceReport, IBPConfig, LSQConfig, ResidualReport
from pansrr.reconstruction.frames import BlurSpec, ObservationFrame
from pansrr.reconstruction.ibp import reconstruct_ibp
from pansrr.reconstruction.least_squares import finalize, reconstruct_least_squares
from pansrr.shift.inband import DEFAULT_H_MAX

Method = Literal["ibp", "least_squares", "lsq"]
Report = Union[ConvergenceReport, ResidualReport]


def frames_for_band(
    volumes: Sequence[MultibandVolume],
    band: int,
    shifts: Sequence[Tuple[float, float]],
    blur: Optional[BlurSpec] = None,
) -> List[ObservationFrame]:
    """Observation frames of one band; LR samples are lifted to approximation scale."""
    blur = blur or BlurSpec.identity()
    return [
        ObservationFrame(
            approximation=ImagePlane(APPROXIMATION_GAIN * volume.band(band).samples),
            shift_x=float(sx),
            shift_y=float(sy),
            blur=blur,
        )
        for volume, (sx, sy) in zip(volumes, shifts)
    ]


def reconstruct_band(
    frames: Sequence[ObservationFrame],
    method: Method = "ibp",
    ibp_config: Optional[IBPConfig] = None,
    lsq_config: Optional[LSQConfig] = None,
    h_max: int = DEFAULT_H_MAX,
) -> Tuple[ImagePlane, Report]:
    if method == "ibp":
        return reconstruct_ibp(frames, ibp_config or IBPConfig(), h_max)
    if method in ("least_squares", "lsq"):
        details, report = reconstruct_least_squares(frames, lsq_config or LSQConfig(), h_max)
        return finalize(frames[0].approximation, details), report
    raise ReconstructionError(f"unknown reconstruction method {method!r}")


def reconstruct_volume(
    volumes: Sequence[MultibandVolume],
    shifts: Sequence[Tuple[float, float]],
    method: Method = "ibp",
    ibp_config: Optional[IBPConfig] = None,
    lsq_config: Optional[LSQConfig] = None,
    blur: Optional[BlurSpec] = None,
    h_max: int = DEFAULT_H_MAX,
    workers: int = 1,
) -> Tuple[MultibandVolume, Dict[str, Report]]:
    """Reconstruct every band with the same shifts; output is twice the input size.

    Args:
        volumes: registered LR volumes in image scale, reference first.
        shifts: (x, y) shift of each volume in HR pixels; the first is (0, 0).
        method: ``"ibp"`` or ``"least_squares"``.
        workers: thread count for band-parallel work. Results are ordered by
            band and identical for any worker count.

    Returns:
        The HR volume and a report per band label.
    """
    if not volumes:
        raise ReconstructionError("no volumes to reconstruct")
    if len(shifts) != len(volumes):
        raise ReconstructionError(f"{len(shifts)} shifts for {len(volumes)} volumes")
    reference = volumes[0]
    for index, volume in enumerate(volumes):
        if volume.band_count != reference.band_count:
            raise ReconstructionError(
                f"volume {index} has {volume.band_count} bands, reference has {reference.band_count}"
            )
        if volume.shape != reference.shape:
            raise ReconstructionError(f"volume {index} is {volume.shape}, reference is {reference.shape}")

    def run(band: int) -> Tuple[ImagePlane, Report]:
        frames = frames_for_band(volumes, band, shifts, blur)
        plane, report = reconstruct_band(frames, method, ibp_config, lsq_config, h_max)
        log_event("band_reconstructed", band=reference.band_labels[band], method=method)
        return plane, report

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, range(reference.band_count)))
    planes = tuple(plane for plane, _ in results)
    reports = {label: report for label, (_, report) in zip(reference.band_labels, results)}
    return MultibandVolume(planes, reference.band_labels), reports
