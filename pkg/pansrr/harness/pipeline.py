"""
End-to-end runs: (AWLP fusion) -> registration and derotation -> per-band
SRR -> baselines -> metrics and artifacts.

Output layout under ``config.out``::

    truth/                 simulated mode only
    lr/frame_00 ...        simulated LR volumes, reference first
    ground_truth.json      shifts, blur and noise that were applied
    reconstructed/         proposed method
    baselines/<name>/      one bundle per enabled baseline
    convergence.txt
    metrics.csv, metrics.txt
    previews/<method>_<band>.png, previews/<method>_rgb.png (3+ bands)

Ground truth is written by the simulation stage and read back only by the
evaluation stage; reconstruction sees the LR volumes and the shifts that
registration estimates from them.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from pansrr.core.bundle import MANIFEST_NAME, load_bundle, save_bundle
from pansrr.core.raster import ImagePlane, MultibandVolume, save_composite_png, save_png
from pansrr.errors import PanSRRError, PipelineError
from pansrr.harness.baselines import run_baseline
from pansrr.harness.simulate import simulate_from_config, synthetic_truth
from pansrr.logging_utils import log_event
from pansrr.metrics.quality import render_table, volume_report, write_metrics_csv
from pansrr.models import ExperimentConfig, MetricsRow
from pansrr.pansharpen.awlp import awlp_fuse
from pansrr.reconstruction.frames import BlurSpec
from pansrr.reconstruction.volume import Report, reconstruct_volume
from pansrr.registration.service import RegistrationResult, register_volumes
from pansrr.shift.inband import lr_to_hr_shift

PROPOSED = "proposed"

Shift = Tuple[float, float]


@dataclass
class PipelineResult:
    exit_status: int = 0
    artifacts: Dict[str, Path] = field(default_factory=dict)
    failed_stage: Optional[str] = None
    message: str = ""
    metrics: Dict[str, List[MetricsRow]] = field(default_factory=dict)


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Log the stage and re-raise any package or I/O error as a PipelineError naming it."""
    log_event("stage_started", stage=name)
    try:
        yield
    except PipelineError:
        raise
    except (PanSRRError, OSError) as exc:
        log_event("stage_failed", level=logging.ERROR, stage=name, error=str(exc))
        raise PipelineError(name, str(exc)) from exc


# =============================================================================
# STAGE HELPERS
# =============================================================================


def load_truth(config: ExperimentConfig) -> MultibandVolume:
    if config.truth is not None:
        return load_bundle(config.truth)
    return synthetic_truth(config.synthetic_size, config.synthetic_bands, config.seed)


def fuse_inputs(config: ExperimentConfig) -> List[MultibandVolume]:
    """AWLP-fuse every MS bundle with its PAN bundle (first PAN band)."""
    fused = []
    for ms_path, pan_path in zip(config.ms, config.pan):
        ms = load_bundle(ms_path)
        pan = load_bundle(pan_path).band(0)
        fused.append(awlp_fuse(ms, pan))
    return fused


def load_lr_set(directory: Path) -> List[MultibandVolume]:
    frames = sorted(p for p in (directory / "lr").glob("frame_*") if (p / MANIFEST_NAME).is_file())
    if not frames:
        raise FileNotFoundError(f"no LR bundles under {directory / 'lr'}; run 'simulate' first")
    return [load_bundle(p) for p in frames]


def register(
    volumes: Sequence[MultibandVolume], config: ExperimentConfig
) -> Tuple[RegistrationResult, List[Shift]]:
    """Register on band 0; returns the result and HR-pixel shifts per kept volume."""
    result = register_volumes(volumes, workers=config.workers)
    shifts = [
        (lr_to_hr_shift(p.translation_x), lr_to_hr_shift(p.translation_y)) for p in result.params
    ]
    shifts[0] = (0.0, 0.0)
    log_event("shifts_estimated", kept=result.kept, shifts=shifts, margin=result.margin)
    return result, shifts


def known_blur_sigma(config: ExperimentConfig) -> float:
    # real scenes carry no known blur
    return config.blur_sigma if config.mode == "simulated" else 0.0


def reconstruct(
    volumes: Sequence[MultibandVolume], shifts: Sequence[Shift], config: ExperimentConfig
) -> Tuple[MultibandVolume, Dict[str, Report]]:
    method = "ibp" if config.solver == "ibp" else "least_squares"
    sigma = known_blur_sigma(config)
    blur = BlurSpec.gaussian(sigma, config.blur_size) if sigma else None
    return reconstruct_volume(
        volumes,
        shifts,
        method=method,
        ibp_config=config.ibp_config(),
        lsq_config=config.lsq_config(),
        blur=blur,
        h_max=config.h_max,
        workers=config.workers,
    )


def write_reports(reports: Dict[str, Report], path: Path) -> Path:
    sections = [f"## band {label}\n{report.to_table()}" for label, report in reports.items()]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(sections), encoding="utf-8")
    return path


def write_previews(volume: MultibandVolume, directory: Path, prefix: str) -> None:
    """One grayscale PNG per band, plus an RGB composite of the first three bands."""
    for label, band in zip(volume.band_labels, volume.bands):
        save_png(band, directory / f"{prefix}_{label}.png")
    if volume.band_count >= 3:
        save_composite_png(volume, directory / f"{prefix}_rgb.png")


def crop_to(volume: MultibandVolume, shape: Tuple[int, int]) -> MultibandVolume:
    """Centre-crop ``volume`` to ``shape`` (registration trims a uniform margin)."""
    dy = (volume.height - shape[0]) // 2
    dx = (volume.width - shape[1]) // 2
    if (dy, dx) == (0, 0):
        return volume
    h, w = shape
    return volume.map_bands(lambda b: ImagePlane(b.samples[dy : dy + h, dx : dx + w]))


def _header(config: ExperimentConfig) -> str:
    return (
        f"# solver={config.solver} blur_sigma={config.blur_sigma} "
        f"blur_size={config.blur_size} noise_sigma={config.noise_sigma} seed={config.seed}"
    )


# =============================================================================
# SUBCOMMAND STAGES
# =============================================================================


def run_simulation(config: ExperimentConfig, result: PipelineResult) -> List[MultibandVolume]:
    out = config.out
    with stage("load_truth"):
        truth = load_truth(config)
    with stage("simulate"):
        lr_set, record = simulate_from_config(truth, config)
        result.artifacts["truth"] = save_bundle(truth, out / "truth")
        for index, volume in enumerate(lr_set):
            save_bundle(volume, out / "lr" / f"frame_{index:02d}")
        record_path = out / "ground_truth.json"
        record_path.write_text(record.model_dump_json(indent=2) + "\n", encoding="utf-8")
        result.artifacts["ground_truth"] = record_path
    return lr_set


def run_reconstruction(
    config: ExperimentConfig, result: PipelineResult, volumes: Optional[Sequence[MultibandVolume]] = None
) -> Dict[str, MultibandVolume]:
    """Register, reconstruct and run baselines; ``volumes`` default to the mode's inputs."""
    out = config.out
    if volumes is None:
        if config.mode == "real":
            with stage("pansharpen"):
                volumes = fuse_inputs(config)
        else:
            with stage("load_lr"):
                volumes = load_lr_set(out)
    with stage("register"):
        registration, shifts = register(volumes, config)
    with stage("reconstruct"):
        estimate, reports = reconstruct(registration.volumes, shifts, config)
        result.artifacts["reconstructed"] = save_bundle(estimate, out / "reconstructed")
        result.artifacts["convergence"] = write_reports(reports, out / "convergence.txt")
        write_previews(estimate, out / "previews", PROPOSED)
    estimates = {PROPOSED: estimate}
    with stage("baselines"):
        for name in config.baselines:
            baseline = run_baseline(
                name,
                registration.volumes[0],
                frames=registration.volumes,
                shifts=shifts,
                config=config.ibp_config(),
                psf_sigma=known_blur_sigma(config),
                workers=config.workers,
            )
            result.artifacts[f"baseline_{name}"] = save_bundle(baseline, out / "baselines" / name)
            write_previews(baseline, out / "previews", name)
            estimates[name] = baseline
    return estimates


def run_evaluation(
    config: ExperimentConfig,
    result: PipelineResult,
    estimates: Optional[Dict[str, MultibandVolume]] = None,
) -> Dict[str, List[MetricsRow]]:
    """Score every estimate against the truth bundle written by the simulation."""
    out = config.out
    with stage("evaluate"):
        truth = load_bundle(out / "truth")
        if estimates is None:
            estimates = {PROPOSED: load_bundle(out / "reconstructed")}
            for name in config.baselines:
                estimates[name] = load_bundle(out / "baselines" / name)
        metrics = {}
        for name, estimate in estimates.items():
            metrics[name] = volume_report(crop_to(truth, estimate.shape), estimate)
        result.artifacts["metrics_csv"] = write_metrics_csv(metrics, out / "metrics.csv")
        table_path = out / "metrics.txt"
        table_path.write_text(render_table(metrics, _header(config)), encoding="utf-8")
        result.artifacts["metrics_table"] = table_path
        result.metrics = metrics
    return metrics


# =============================================================================
# ENTRY POINT
# =============================================================================

COMMANDS = ("simulate", "reconstruct", "evaluate", "full-run")


def run_pipeline(config: ExperimentConfig, command: str = "full-run") -> PipelineResult:
    """Execute one subcommand (by default the whole run) and report the outcome.

    Status 0 on success, 1 when a stage fails; the failing stage and its
    diagnostic are carried on the result.
    """
    result = PipelineResult()
    try:
        with stage("setup"):
            config.out.mkdir(parents=True, exist_ok=True)
        if command == "simulate":
            run_simulation(config, result)
        elif command == "reconstruct":
            run_reconstruction(config, result)
        elif command == "evaluate":
            run_evaluation(config, result)
        elif config.mode == "simulated":
            lr_set = run_simulation(config, result)
            estimates = run_reconstruction(config, result, lr_set)
            run_evaluation(config, result, estimates)
        else:
            run_reconstruction(config, result)
    except PipelineError as exc:
        result.exit_status = 1
        result.failed_stage = exc.stage
        result.message = str(exc)
        return result
    log_event("pipeline_finished", command=command, mode=config.mode, solver=config.solver, out=config.out)
    return result
