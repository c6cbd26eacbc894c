import json

import numpy as np
import pytest

from pansrr.core.bundle import load_bundle, save_bundle
from pansrr.core.haar import APPROXIMATION_GAIN, haar_analyze
from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.errors import ConfigError, ReconstructionError, TransformError
from pansrr.harness.baselines import classic_forward, classic_ibp, run_baseline, upscale
from pansrr.harness.config import load_experiment_config, parse_config_values
from pansrr.harness.pipeline import PROPOSED, run_pipeline, write_previews
from pansrr.harness.simulate import simulate_lr_set, synthetic_truth
from pansrr.metrics.quality import psnr, read_metrics_csv
from pansrr.models import ExperimentConfig, IBPConfig


@pytest.fixture
def truth():
    return synthetic_truth(size=32, bands=2, seed=0)


class TestConfig:
    def test_file_values_and_aliases(self, tmp_path):
        path = tmp_path / "exp.env"
        path.write_text(
            "# comment\nsolver=lsq\nlambda=0.5\nmax_iters=40\nshifts=1,0;0,1;1,1;0.5,0.5\n"
            "baselines=linear,bicubic\nsynthetic_size=32\n"
        )
        config = load_experiment_config(path)
        assert config.solver == "lsq"
        assert config.lam == 0.5
        assert config.max_iterations == 40
        assert config.shifts[-1] == (0.5, 0.5)
        assert config.baselines == ["linear", "bicubic"]

    def test_flags_win_over_file(self, tmp_path):
        path = tmp_path / "exp.env"
        path.write_text("synthetic_size=32\nseed=3\ntau=1e-4\n")
        config = load_experiment_config(path, {"seed": 9, "tau": None})
        assert config.seed == 9
        assert config.tau == 1e-4

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            parse_config_values({"colour": "blue"})

    def test_invalid_value_is_config_error(self, tmp_path):
        path = tmp_path / "exp.env"
        path.write_text("synthetic_size=32\nlambda=3\n")
        with pytest.raises(ConfigError, match="lam"):
            load_experiment_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_experiment_config(tmp_path / "nope.env")

    def test_real_mode_needs_four_pairs(self):
        with pytest.raises(ConfigError, match="at least 4"):
            load_experiment_config(None, {"mode": "real", "ms": ["a"], "pan": ["b"]})

    def test_workers_from_environment(self, monkeypatch):
        monkeypatch.setenv("PANSRR_WORKERS", "3")
        assert load_experiment_config(None, {"synthetic_size": 32}).workers == 3


class TestSimulation:
    def test_synthetic_truth_is_deterministic(self):
        a = synthetic_truth(size=32, bands=3, seed=5)
        b = synthetic_truth(size=32, bands=3, seed=5)
        assert a.band_count == 3
        for x, y in zip(a.bands, b.bands):
            assert np.array_equal(x.samples, y.samples)
            assert x.samples.min() >= 0.0 and x.samples.max() <= 1.0

    def test_bands_differ_spectrally(self):
        vol = synthetic_truth(size=32, bands=2, seed=0)
        assert not np.allclose(vol.band(0).samples, vol.band(1).samples)

    def test_outputs_are_half_size(self, truth):
        lr_set, record = simulate_lr_set(truth, blur_sigma=0.8)
        assert len(lr_set) == 4
        assert all(v.shape == (16, 16) for v in lr_set)
        assert record.shifts == [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]

    def test_reference_is_scaled_approximation(self, truth):
        lr_set, _ = simulate_lr_set(truth)
        expected = haar_analyze(truth.band(1)).A.samples / APPROXIMATION_GAIN
        assert np.allclose(lr_set[0].band(1).samples, expected, atol=1e-12)

    def test_noise_is_seeded(self, truth):
        a, _ = simulate_lr_set(truth, noise_sigma=0.01, seed=7)
        b, _ = simulate_lr_set(truth, noise_sigma=0.01, seed=7)
        c, _ = simulate_lr_set(truth, noise_sigma=0.01, seed=8)
        assert np.array_equal(a[2].band(0).samples, b[2].band(0).samples)
        assert not np.array_equal(a[2].band(0).samples, c[2].band(0).samples)

    def test_odd_truth_rejected(self):
        odd = MultibandVolume.from_arrays([np.zeros((9, 10))])
        with pytest.raises(TransformError, match="truth"):
            simulate_lr_set(odd)


class TestBaselines:
    def test_linear_on_constant_volume(self):
        vol = MultibandVolume.from_arrays([np.full((8, 8), 0.4)])
        up = run_baseline("linear", vol)
        assert up.shape == (16, 16)
        assert np.allclose(up.band(0).samples, 0.4)

    def test_bicubic_doubles_dimensions(self, truth):
        assert run_baseline("bicubic", truth).shape == (64, 64)

    def test_unknown_baseline(self, truth):
        with pytest.raises(ReconstructionError, match="unknown baseline"):
            run_baseline("lanczos", truth)

    def test_classic_ibp_is_monotone_on_consistent_frames(self, truth):
        hr = truth.band(0).samples
        shifts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        frames = [ImagePlane(classic_forward(hr, s)) for s in shifts]
        _, report = classic_ibp(frames, shifts, IBPConfig(max_iterations=10, tau=1e-15))
        assert report.iterations == 10
        residuals = report.residuals
        assert all(b <= a * (1 + 1e-12) for a, b in zip(residuals, residuals[1:]))
        assert residuals[-1] < residuals[0]

    def test_classic_forward_is_a_block_mean(self, truth):
        hr = truth.band(0).samples
        expected = hr.reshape(16, 2, 16, 2).mean(axis=(1, 3))
        assert np.allclose(classic_forward(hr, (0.0, 0.0)), expected, atol=1e-15)

    def test_classic_ibp_improves_on_its_bilinear_start(self, truth):
        hr = truth.band(0).samples
        shifts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        frames = [ImagePlane(classic_forward(hr, s, psf_sigma=0.8)) for s in shifts]
        estimate, _ = classic_ibp(frames, shifts, IBPConfig(max_iterations=20), psf_sigma=0.8)
        start = upscale(frames[0], order=1)
        assert psnr(estimate, truth.band(0)) > psnr(start, truth.band(0))


def _small_config(tmp_path, **overrides):
    values = dict(
        synthetic_size=64,
        synthetic_bands=2,
        max_iterations=30,
        out=tmp_path / "run",
        baselines=["linear", "bicubic", "classic_ibp"],
    )
    values.update(overrides)
    return ExperimentConfig(**values)


class TestPipeline:
    @pytest.mark.parametrize("solver", ["ibp", "lsq"])
    def test_full_run_writes_every_artifact(self, tmp_path, solver):
        config = _small_config(tmp_path, solver=solver)
        result = run_pipeline(config)
        assert result.exit_status == 0, result.message
        out = config.out
        for name in ["metrics.csv", "metrics.txt", "convergence.txt", "ground_truth.json"]:
            assert (out / name).is_file()
        assert load_bundle(out / "reconstructed").band_count == 2
        assert (out / "previews" / f"{PROPOSED}_b1.png").is_file()
        assert not (out / "previews" / f"{PROPOSED}_rgb.png").exists()
        metrics = read_metrics_csv(out / "metrics.csv")
        assert set(metrics) == {PROPOSED, "linear", "bicubic", "classic_ibp"}
        assert all(len(rows) == 2 for rows in metrics.values())
        record = json.loads((out / "ground_truth.json").read_text())
        assert record["blur_sigma"] == 0.8

    def test_least_squares_run_beats_bilinear(self, tmp_path):
        result = run_pipeline(_small_config(tmp_path, solver="lsq", baselines=["linear"]))
        assert result.exit_status == 0, result.message

        def mean_psnr(method):
            return float(np.mean([r.psnr for r in result.metrics[method]]))

        assert mean_psnr(PROPOSED) >= mean_psnr("linear")

    def test_three_band_previews_include_a_composite(self, tmp_path):
        write_previews(synthetic_truth(size=16, bands=3, seed=1), tmp_path, "truth")
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["truth_b1.png", "truth_b2.png", "truth_b3.png", "truth_rgb.png"]

    def test_subcommands_chain(self, tmp_path):
        config = _small_config(tmp_path, baselines=["linear"])
        for command in ["simulate", "reconstruct", "evaluate"]:
            result = run_pipeline(config, command)
            assert result.exit_status == 0, result.message
        assert set(read_metrics_csv(config.out / "metrics.csv")) == {PROPOSED, "linear"}

    def test_reconstruct_without_simulation_fails_cleanly(self, tmp_path):
        result = run_pipeline(_small_config(tmp_path), "reconstruct")
        assert result.exit_status == 1
        assert result.failed_stage == "load_lr"

    def test_missing_truth_bundle(self, tmp_path):
        config = _small_config(tmp_path, truth=tmp_path / "missing")
        result = run_pipeline(config)
        assert result.exit_status == 1
        assert result.failed_stage == "load_truth"
        assert "manifest" in result.message

    def test_truth_bundle_is_used(self, tmp_path):
        truth = synthetic_truth(size=64, bands=1, seed=2)
        save_bundle(truth, tmp_path / "truth_in", encoding="f64le-planar")
        config = _small_config(tmp_path, truth=tmp_path / "truth_in", baselines=[])
        result = run_pipeline(config)
        assert result.exit_status == 0, result.message
        assert [r.band for r in result.metrics[PROPOSED]] == ["b1"]

    def test_seeded_runs_are_bitwise_identical(self, tmp_path):
        first = _small_config(tmp_path, noise_sigma=0.005, seed=4, baselines=["linear"])
        second = first.model_copy(update={"out": tmp_path / "again"})
        assert run_pipeline(first).exit_status == 0
        assert run_pipeline(second).exit_status == 0
        for name in ["metrics.csv", "reconstructed/b1.raw", "reconstructed/b2.raw"]:
            assert (first.out / name).read_bytes() == (second.out / name).read_bytes()


@pytest.mark.slow
class TestDirectionalReproduction:
    # the least-squares system carries no blur term, so it is scored on unblurred frames
    @pytest.mark.parametrize("solver, blur_sigma", [("ibp", 0.8), ("lsq", 0.0)])
    def test_proposed_beats_classic_ibp_and_bilinear(self, tmp_path, solver, blur_sigma):
        config = ExperimentConfig(
            synthetic_size=128,
            synthetic_bands=6,
            solver=solver,
            blur_sigma=blur_sigma,
            out=tmp_path / "run",
            workers=2,
        )
        result = run_pipeline(config)
        assert result.exit_status == 0, result.message

        def mean(method, field):
            return float(np.mean([getattr(r, field) for r in result.metrics[method]]))

        assert mean(PROPOSED, "psnr") >= mean("classic_ibp", "psnr") + 1.0
        assert mean(PROPOSED, "ssim") > mean("linear", "ssim")
