"""
Image quality metrics on [0, 1] planes.

Metrics:
- MSE: mean squared error
- PSNR: peak signal-to-noise ratio, ``inf`` for identical planes
- SSIM: structural similarity, 11x11 Gaussian window (sigma 1.5)
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np
from skimage.metrics import structural_similarity

from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.errors import MetricsError
from pansrr.models import MetricsRow

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
DATA_RANGE = 1.0

CSV_COLUMNS = ("method", "band", "psnr", "mse", "ssim")


def _same_shape(x: ImagePlane, y: ImagePlane) -> None:
    if x.shape != y.shape:
        raise MetricsError(f"shape mismatch {x.shape} vs {y.shape}")


def mse(x: ImagePlane, y: ImagePlane) -> float:
    _same_shape(x, y)
    diff = x.samples - y.samples
    return float(np.mean(diff * diff))


def psnr(x: ImagePlane, y: ImagePlane, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB.

    Returns ``math.inf`` when the planes are identical.
    """
    if not peak > 0:
        raise MetricsError(f"peak must be positive, got {peak}")
    error = mse(x, y)
    if error == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / error)


def ssim(x: ImagePlane, y: ImagePlane) -> float:
    _same_shape(x, y)
    if min(x.shape) < SSIM_WINDOW:
        raise MetricsError(f"plane {x.shape} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    value = structural_similarity(
        x.samples,
        y.samples,
        data_range=DATA_RANGE,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        K1=0.01,
        K2=0.03,
    )
    return float(value)


def volume_report(truth: MultibandVolume, estimate: MultibandVolume) -> List[MetricsRow]:
    """One row per band, labelled with the truth's band labels."""
    if truth.band_count != estimate.band_count:
        raise MetricsError(f"{truth.band_count} truth bands vs {estimate.band_count} estimated")
    if truth.shape != estimate.shape:
        raise MetricsError(f"truth is {truth.shape}, estimate is {estimate.shape}")
    return [
        MetricsRow(band=label, psnr=psnr(t, e), mse=mse(t, e), ssim=ssim(t, e))
        for label, t, e in zip(truth.band_labels, truth.bands, estimate.bands)
    ]


# =============================================================================
# REPORTING
# =============================================================================


def _mean_row(rows: Sequence[MetricsRow]) -> MetricsRow:
    return MetricsRow(
        band="mean",
        psnr=float(np.mean([r.psnr for r in rows])),
        mse=float(np.mean([r.mse for r in rows])),
        ssim=float(np.mean([r.ssim for r in rows])),
    )


def render_table(rows_by_method: Mapping[str, Sequence[MetricsRow]], header: str = "") -> str:
    """Aligned text table, one line per (method, band) plus a per-method mean."""
    lines = [header] if header else []
    lines.append(f"{'method':<14}{'band':<8}{'psnr':>10}{'mse':>14}{'ssim':>9}")
    for method, rows in rows_by_method.items():
        for row in list(rows) + ([_mean_row(rows)] if rows else []):
            lines.append(
                f"{method:<14}{row.band:<8}{row.psnr:>10.3f}{row.mse:>14.3e}{row.ssim:>9.4f}"
            )
    return "\n".join(lines) + "\n"


def write_metrics_csv(
    rows_by_method: Mapping[str, Sequence[MetricsRow]], path: Union[str, Path]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for method, rows in rows_by_method.items():
            for row in rows:
                writer.writerow([method, row.band, repr(row.psnr), repr(row.mse), repr(row.ssim)])
    return path


def read_metrics_csv(path: Union[str, Path]) -> Dict[str, List[MetricsRow]]:
    rows: Dict[str, List[MetricsRow]] = {}
    with Path(path).open(newline="", encoding="utf-8") as handle:
        for record in csv.DictReader(handle):
            rows.setdefault(record["method"], []).append(
                MetricsRow(
                    band=record["band"],
                    psnr=float(record["psnr"]),
                    mse=float(record["mse"]),
                    ssim=float(record["ssim"]),
                )
            )
    return rows
