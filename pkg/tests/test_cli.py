import json
import math

import pytest

from efimov.cli import _fmt, _pi_literal, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParsing:
    def test_pi_literals(self):
        assert _pi_literal("8pi") == pytest.approx(8.0 * math.pi)
        assert _pi_literal("32pi") == pytest.approx(32.0 * math.pi)
        assert _pi_literal("2.5pi") == pytest.approx(2.5 * math.pi)
        assert _pi_literal("pi") == pytest.approx(math.pi)
        assert _pi_literal("12.5") == 12.5

    def test_fmt_round_trip(self):
        x = 0.12345678901234567
        assert float(_fmt(x)) == x


class TestTwobody:
    def test_unitarity(self, capsys):
        code, out, _ = run_cli(capsys, "twobody", "--lambda", "8pi", "--beta", "1")
        assert code == 0
        assert "1/a         = 0" in out
        assert "r0          = 3" in out
        assert "dimer: none" in out

    def test_bound_dimer(self, capsys):
        code, out, _ = run_cli(capsys, "twobody", "--lambda", "32pi", "--beta", "1")
        assert code == 0
        line = next(l for l in out.splitlines() if l.startswith("dimer kappa_d"))
        assert float(line.split("=")[1]) == pytest.approx(1.0, rel=1e-10)

    def test_infeasible_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "twobody", "--inv-a", "1", "--beta", "1")
        assert code == 2
        assert "no attractive" in err


class TestSpectrum:
    def test_csv_output(self, capsys, tmp_path):
        out_file = tmp_path / "levels.csv"
        code, out, _ = run_cli(capsys, "spectrum", "--inv-a", "0", "--R0", "1",
                               "--mesh-n", "100", "--alpha-min", "0.05",
                               "--alpha-max", "1", "--max-levels", "1",
                               "--output", str(out_file))
        assert code == 0
        text = out_file.read_text()
        lines = text.split("\n")
        assert lines[0] == "level,alpha,energy,eta_residual"
        fields = lines[1].split(",")
        assert fields[0] == "0"
        assert float(fields[1]) == pytest.approx(0.1177, abs=2e-3)
        assert float(fields[2]) == pytest.approx(-float(fields[1]) ** 2, rel=1e-12)
        assert float(fields[3]) <= 1e-9

    def test_byte_identical_reruns(self, capsys, tmp_path):
        args = ("spectrum", "--inv-a", "0", "--R0", "1", "--mesh-n", "80",
                "--alpha-min", "0.05", "--alpha-max", "1", "--max-levels", "1")
        f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(capsys, *args, "--output", str(f1))[0] == 0
        assert run_cli(capsys, *args, "--output", str(f2))[0] == 0
        assert f1.read_bytes() == f2.read_bytes()

    def test_empty_spectrum_exit_zero(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--inv-a", "0", "--R0", "1",
                               "--mesh-n", "64", "--alpha-min", "0.5",
                               "--alpha-max", "5")
        assert code == 0
        assert "levels=0" in out

    def test_threshold_violation_exit_3(self, capsys):
        code, _, err = run_cli(capsys, "spectrum", "--inv-a", "1", "--R0", "0",
                               "--cutoff", "100", "--mesh-n", "64",
                               "--alpha-min", "0.5", "--alpha-max", "10")
        assert code == 3
        assert "threshold" in err

    def test_json_mirror(self, capsys, tmp_path):
        out_file = tmp_path / "levels.json"
        code, _, _ = run_cli(capsys, "spectrum", "--inv-a", "0", "--R0", "1",
                             "--mesh-n", "80", "--alpha-min", "0.05",
                             "--alpha-max", "1", "--max-levels", "1",
                             "--format", "json", "--output", str(out_file))
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert set(payload) == {"params", "mesh", "levels", "report"}
        assert payload["params"]["model"] == "short_range"
        assert payload["levels"][0]["level"] == 0
        assert payload["mesh"]["n"] == 80

    def test_finite_range_pair(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--lambda", "8pi",
                               "--beta", "1", "--mesh-n", "64",
                               "--alpha-min", "0.1", "--alpha-max", "0.6",
                               "--cutoff", "50", "--max-levels", "1")
        assert code == 0
        alpha = float(out.split("\n")[1].split(",")[1])
        assert alpha == pytest.approx(0.2488, abs=5e-3)

    def test_requires_exactly_one_pair(self, capsys):
        code, _, err = run_cli(capsys, "spectrum", "--inv-a", "0")
        assert code == 2
        assert "exactly one" in err


class TestConfigFile:
    def test_config_supplies_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda = 8pi  # unitarity coupling\nbeta = 1\nknum = 3\n")
        code, out, _ = run_cli(capsys, "twobody", "--config", str(cfg))
        assert code == 0
        assert "r0          = 3" in out

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda=8pi\nbeta=1\nknum=3\n")
        code, out, _ = run_cli(capsys, "twobody", "--config", str(cfg),
                               "--lambda", "32pi")
        assert code == 0
        assert "1/a         = 0.375" in out

    def test_malformed_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("this is not a key value line\n")
        code, _, err = run_cli(capsys, "twobody", "--config", str(cfg))
        assert code == 2
        assert "key=value" in err


class TestUniversalityCommand:
    def test_ratios_pass(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run_cli(capsys, "universality", "ratios",
                               "--mesh-n", "120")
        assert code == 0
        assert "PASS" in out
        assert (tmp_path / "universality.json").exists()
        assert (tmp_path / "universality_ratios.csv").exists()
        payload = json.loads((tmp_path / "universality.json").read_text())
        assert payload["report"]["passed"] is True

    def test_beta_monotone(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run_cli(capsys, "universality", "beta",
                               "--list", "10,100", "--mesh-n", "100",
                               "--output", "beta_run")
        assert code == 0
        assert "monotone convergence: PASS" in out
        assert (tmp_path / "beta_run_beta.csv").exists()
