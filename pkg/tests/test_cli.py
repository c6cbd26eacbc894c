import pytest

from pansrr.cli import build_parser, main


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "exp.env"
    path.write_text("synthetic_size=64\nsynthetic_bands=1\nmax_iters=10\nbaselines=linear\n")
    return path


class TestParser:
    def test_flags_map_to_config_fields(self):
        args = build_parser().parse_args(
            ["full-run", "--lambda", "0.5", "--max-iters", "7", "--blur-sigma", "1.2", "--solver", "lsq"]
        )
        assert (args.lam, args.max_iterations, args.blur_sigma, args.solver) == (0.5, 7, 1.2, "lsq")

    def test_unset_flags_are_none(self):
        args = build_parser().parse_args(["simulate"])
        assert args.seed is None and args.tau is None


class TestMain:
    def test_full_run(self, tmp_path, config_file, capsys):
        out = tmp_path / "run"
        status = main(["full-run", "--config", str(config_file), "--out", str(out), "--seed", "1"])
        assert status == 0
        assert (out / "metrics.csv").is_file()
        assert "full-run finished" in capsys.readouterr().out

    def test_invalid_flag_value_exits_2(self, tmp_path, config_file, capsys):
        status = main(["full-run", "--config", str(config_file), "--lambda", "5", "--out", str(tmp_path)])
        assert status == 2
        assert "Invalid configuration" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "none.env")]) == 2

    def test_unknown_subcommand_exits_2(self):
        assert main(["sharpen"]) == 2

    def test_missing_input_exits_1(self, tmp_path, config_file, capsys):
        status = main(
            ["full-run", "--config", str(config_file), "--truth", str(tmp_path / "absent"), "--out", str(tmp_path / "o")]
        )
        assert status == 1
        assert "load_truth" in capsys.readouterr().err
