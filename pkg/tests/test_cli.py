import json
from fractions import Fraction

import pytest

from conemet import cli, metric
from conemet.errors import InvalidConfiguration, ParseError
from conemet.gaussian import QI


CONFIG_N3 = """\
points = ["0", "1", "-1"]
angles = ["1/2", "1/2", "1/2"]

[solver]
seeds = 2
"""

CONFIG_BAD_GB = """\
points = ["0", "1", "-1"]
angles = ["1/4", "1/4", "1/4"]
"""


def write_config(tmp_path, text=CONFIG_N3):
    path = tmp_path / "job.toml"
    path.write_text(text)
    return path


def run_main(monkeypatch, argv):
    monkeypatch.setattr("sys.argv", ["conemet"] + argv)
    try:
        cli.main()
    except SystemExit as e:
        return int(e.code or 0)
    return 0


class TestParsing:
    def test_fractions(self):
        assert cli.parse_fraction("3/4") == Fraction(3, 4)
        assert cli.parse_fraction("-2") == Fraction(-2)
        assert cli.parse_fraction("0.25") == Fraction(1, 4)
        with pytest.raises(ParseError):
            cli.parse_fraction("1/0")
        with pytest.raises(ParseError):
            cli.parse_fraction("half")

    def test_points(self):
        assert cli.parse_point("3") == QI(3)
        assert cli.parse_point("-1/2") == QI(Fraction(-1, 2))
        assert cli.parse_point("0.5") == QI(Fraction(1, 2))
        assert cli.parse_point("1+2i") == QI(1, 2)
        assert cli.parse_point("1/2 - 1/3i") == \
            QI(Fraction(1, 2), Fraction(-1, 3))
        assert cli.parse_point("i") == QI(0, 1)
        assert cli.parse_point("-i") == QI(0, -1)
        assert cli.parse_point("inf") == "inf"
        assert cli.parse_point("oo") == "inf"
        for junk in ("", "1+2j+3", "z", "1..2"):
            with pytest.raises(ParseError):
                cli.parse_point(junk)

    def test_mobius_normalize(self):
        pts, c = cli.mobius_normalize([QI(0), QI(1), "inf"])
        assert c == 2
        assert pts == [QI(Fraction(-1, 2)), QI(-1), QI(0)]
        pts, c = cli.mobius_normalize([QI(0), QI(1), QI(-1)])
        assert c is None and pts == [QI(0), QI(1), QI(-1)]
        with pytest.raises(InvalidConfiguration):
            cli.mobius_normalize(["inf", "inf", QI(0)])


class TestConfig:
    def test_load_and_overrides(self, tmp_path):
        path = write_config(tmp_path)
        cfg = cli.load_config(str(path), seed=7, tol=1e-9, grid="12x8")
        assert cfg.angles == [Fraction(1, 2)] * 3
        assert cfg.seeds == 2
        assert cfg.rng_seed == 7
        assert cfg.tol == 1e-9
        assert (cfg.grid_width, cfg.grid_height) == (12, 8)

    def test_digest_stable(self, tmp_path):
        path = write_config(tmp_path)
        a = cli.load_config(str(path)).digest()
        b = cli.load_config(str(path)).digest()
        assert a == b and len(a) == 16

    def test_bad_grid_spec(self, tmp_path):
        path = write_config(tmp_path)
        with pytest.raises(ParseError):
            cli.load_config(str(path), grid="12by8")

    def test_bad_domain(self, tmp_path):
        path = write_config(tmp_path, CONFIG_N3 +
                            "[grid]\ndomain = [1.0, -1.0, 0.0, 1.0]\n")
        with pytest.raises(ParseError):
            cli.load_config(str(path))

    def test_missing_key(self, tmp_path):
        path = write_config(tmp_path, 'points = ["0", "1", "-1"]\n')
        with pytest.raises(ParseError):
            cli.load_config(str(path))


class TestCheck:
    def test_admissible_exit_zero(self, tmp_path, monkeypatch):
        path = write_config(tmp_path)
        code = run_main(monkeypatch, ["check", "--config", str(path),
                                      "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        section = report["exact"]
        assert section["admissible"]
        assert section["max_destabilizing_degree"] == "-1/4"
        assert section["parabolic_degree_total"] == "0"
        assert section["splitting_type"] == [1, 2]

    def test_inadmissible_exit_two(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, CONFIG_BAD_GB)
        code = run_main(monkeypatch, ["check", "--config", str(path),
                                      "--out", str(tmp_path)])
        assert code == 2
        report = json.loads((tmp_path / "report.json").read_text())
        assert not report["exact"]["gauss_bonnet"]

    def test_duplicate_points_exit_two(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, 'points = ["0", "0", "1"]\n'
                                      'angles = ["1/2", "1/2", "1/2"]\n')
        code = run_main(monkeypatch, ["check", "--config", str(path),
                                      "--out", str(tmp_path)])
        assert code == 2

    def test_missing_config_exit_one(self, tmp_path, monkeypatch):
        code = run_main(monkeypatch,
                        ["check", "--config", str(tmp_path / "nope.toml")])
        assert code == 1

    def test_unknown_subcommand_exit_one(self, monkeypatch):
        assert run_main(monkeypatch, ["frobnicate"]) == 1

    def test_infinity_normalized(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, 'points = ["0", "1", "inf"]\n'
                                      'angles = ["1/2", "1/2", "1/2"]\n')
        code = run_main(monkeypatch, ["check", "--config", str(path),
                                      "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["provenance"]["mobius_c"] == 2
        assert report["exact"]["points"] == [["-1/2", "0"], ["-1", "0"],
                                             ["0", "0"]]


class TestSolveAndSample:
    def test_solve_writes_artifacts(self, tmp_path, monkeypatch):
        path = write_config(tmp_path)
        code = run_main(monkeypatch, ["solve", "--config", str(path),
                                      "--out", str(tmp_path)])
        assert code == 0
        solved = json.loads((tmp_path / "solved.json").read_text())
        assert solved["delta"] < 1e-8
        beta = [complex(r, i) for r, i in solved["accessory"]]
        assert abs(beta[1] + 9 / 16) < 1e-8

    def test_sample_requires_solved(self, tmp_path, monkeypatch):
        path = write_config(tmp_path)
        code = run_main(monkeypatch, ["sample", "--config", str(path),
                                      "--out", str(tmp_path)])
        assert code == 1

    def test_sample_deterministic_bytes(self, tmp_path, monkeypatch):
        path = write_config(tmp_path)
        assert run_main(monkeypatch, ["solve", "--config", str(path),
                                      "--out", str(tmp_path)]) == 0
        args = ["sample", "--config", str(path), "--out", str(tmp_path),
                "--grid", "10x6"]
        assert run_main(monkeypatch, args) == 0
        first = (tmp_path / "grid.csv").read_bytes()
        assert run_main(monkeypatch, args) == 0
        assert (tmp_path / "grid.csv").read_bytes() == first
        header = first.decode().splitlines()[0]
        assert header == "re z,im z,lambda,chart"
        assert len(first.decode().splitlines()) == 61

    def test_verify_plumbing(self, tmp_path, monkeypatch):
        path = write_config(tmp_path)
        assert run_main(monkeypatch, ["solve", "--config", str(path),
                                      "--out", str(tmp_path)]) == 0

        def fake_verify(data, cert, **kw):
            return metric.VerificationReport(
                curvature_max_deviation=1e-7,
                cone_angle_estimates=(0.5, 0.5, 0.5),
                cone_angle_targets=(0.5, 0.5, 0.5),
                area=3.14159, area_target=3.14159,
                path_independence_residual=1e-12,
                min_lambda=0.12,
                monodromy_angle_consistency=1e-14,
                tolerances={})

        monkeypatch.setattr(cli, "verify_metric", fake_verify)
        code = run_main(monkeypatch, ["verify", "--config", str(path),
                                      "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verification"]["passed"]
        assert report["verification"]["cone_angle_estimates"] == [0.5] * 3

    def test_verify_failure_exit_four(self, tmp_path, monkeypatch):
        path = write_config(tmp_path)
        assert run_main(monkeypatch, ["solve", "--config", str(path),
                                      "--out", str(tmp_path)]) == 0

        def fake_verify(data, cert, **kw):
            return metric.VerificationReport(
                curvature_max_deviation=5.0,
                cone_angle_estimates=(0.5, 0.5, 0.5),
                cone_angle_targets=(0.5, 0.5, 0.5),
                area=3.14159, area_target=3.14159,
                path_independence_residual=1e-12,
                min_lambda=0.12,
                monodromy_angle_consistency=1e-14,
                tolerances={})

        monkeypatch.setattr(cli, "verify_metric", fake_verify)
        code = run_main(monkeypatch, ["verify", "--config", str(path),
                                      "--out", str(tmp_path)])
        assert code == 4
