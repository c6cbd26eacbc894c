from pansrr.harness.baselines import BASELINES, classic_forward, classic_ibp, run_baseline, upscale
from pansrr.harness.config import load_experiment_config, parse_config_values
from pansrr.harness.pipeline import COMMANDS, PipelineResult, run_pipeline
from pansrr.harness.simulate import observe_plane, simulate_lr_set, synthetic_truth

__all__ = [
    "BASELINES",
    "COMMANDS",
    "PipelineResult",
    "classic_forward",
    "classic_ibp",
    "load_experiment_config",
    "observe_plane",
    "parse_config_values",
    "run_baseline",
    "run_pipeline",
    "simulate_lr_set",
    "synthetic_truth",
    "upscale",
]
