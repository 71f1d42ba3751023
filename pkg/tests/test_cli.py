import json
import math

import pytest

from gausslab.cli import main
from gausslab.constraints import load_spec, save_spec, scenario_one
from gausslab.entropy import entropy_single


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestVerifyCommand:
    def test_analytic_suite_passes(self, tmp_path, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "analytic", "--out", str(tmp_path))
        assert code == 0
        assert "[pass] analytic/entropy_from_renyi_derivative" in out
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["passed"] is True
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert str(tmp_path / "verify_report.json") in manifest["outputs"]

    def test_corrupted_tolerance_fails(self, tmp_path, capsys):
        code, out, _ = run_cli(
            capsys,
            "verify",
            "--suite",
            "analytic",
            "--override",
            "entropy_from_renyi_derivative=1e-15",
            "--out",
            str(tmp_path),
        )
        assert code == 1
        assert "[FAIL] analytic/entropy_from_renyi_derivative" in out

    def test_unknown_suite_is_usage_error(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "verify", "--suite", "nope", "--out", str(tmp_path))
        assert code == 2
        assert "unknown suite" in err

    def test_bad_override_is_usage_error(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "verify", "--override", "notakeyvalue", "--out", str(tmp_path)
        )
        assert code == 2


class TestSampleCommand:
    def _write_spec(self, tmp_path):
        path = tmp_path / "spec.json"
        save_spec(scenario_one([2.0, 2.0, 2.0]), path)
        return path

    def test_end_to_end(self, tmp_path, capsys):
        spec_path = self._write_spec(tmp_path)
        out_dir = tmp_path / "run"
        code, out, _ = run_cli(
            capsys,
            "sample",
            str(spec_path),
            "--out",
            str(out_dir),
            "--n-samples",
            "40",
            "--burn-in",
            "40",
            "--thinning",
            "2",
            "--n-chains",
            "2",
            "--seed",
            "3",
        )
        assert code == 0
        stats = (out_dir / "statistics.csv").read_text().strip().split("\n")
        assert stats[0] == "observable,x,mean,stderr,ess,n"
        renyi_rows = [line for line in stats if line.startswith("renyi,2")]
        assert len(renyi_rows) == 1
        fields = renyi_rows[0].split(",")
        assert float(fields[2]) == pytest.approx(0.5, abs=1e-6)
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["command"] == "sample"
        assert any(p.endswith("batch_samples.npy") for p in manifest["outputs"])

    def test_reproducible_outputs(self, tmp_path, capsys):
        spec_path = self._write_spec(tmp_path)
        args = [
            "sample",
            str(spec_path),
            "--n-samples",
            "30",
            "--burn-in",
            "30",
            "--thinning",
            "2",
            "--n-chains",
            "2",
            "--seed",
            "5",
        ]
        code1, _, _ = run_cli(capsys, *args, "--out", str(tmp_path / "r1"))
        code2, _, _ = run_cli(capsys, *args, "--out", str(tmp_path / "r2"))
        assert code1 == code2 == 0
        for name in ("batch_samples.npy", "batch_meta.json", "batch_residuals.csv", "statistics.csv"):
            b1 = (tmp_path / "r1" / name).read_bytes()
            b2 = (tmp_path / "r2" / name).read_bytes()
            assert b1 == b2, name

    def test_missing_config(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "sample", str(tmp_path / "nope.json"), "--out", str(tmp_path))
        assert code == 2
        assert "not found" in err

    def test_infeasible_spec_rejected_before_sampling(self, tmp_path, capsys):
        path = tmp_path / "pure.json"
        save_spec(scenario_one([1.0, 2.0]), path)
        code, _, err = run_cli(capsys, "sample", str(path), "--out", str(tmp_path / "o"))
        assert code == 2
        assert "invalid configuration" in err

    def test_ambient_method(self, tmp_path, capsys):
        spec_path = tmp_path / "spec2.json"
        save_spec(scenario_one([2.0, 2.0]), spec_path)
        out_dir = tmp_path / "amb"
        code, out, _ = run_cli(
            capsys,
            "sample",
            str(spec_path),
            "--out",
            str(out_dir),
            "--method",
            "ambient-soft",
            "--n-samples",
            "30",
            "--burn-in",
            "300",
            "--thinning",
            "4",
            "--n-chains",
            "4",
            "--epsilon-schedule",
            "0.4,0.25",
        )
        assert code == 0
        assert (out_dir / "per_epsilon.json").exists()
        assert (out_dir / "batch_eps1_samples.npy").exists()


class TestPageSlopeCommand:
    def test_uniform_lambda_linear(self, tmp_path, capsys):
        spec_path = tmp_path / "spec.json"
        save_spec(scenario_one([2.0] * 5), spec_path)
        code, _, _ = run_cli(capsys, "page-slope", str(spec_path), "--out", str(tmp_path))
        assert code == 0
        lines = (tmp_path / "page_slope.csv").read_text().strip().split("\n")[1:]
        vals = [float(line.split(",")[1]) for line in lines]
        steps = [b - a for a, b in zip(vals, vals[1:])]
        for step in steps:
            assert step == pytest.approx(entropy_single(2.0), rel=1e-9)

    def test_toy_hawking_staircase(self, tmp_path, capsys):
        out_dir = tmp_path / "hk"
        code, _, _ = run_cli(
            capsys,
            "hawking",
            "--mass-planck",
            "3.0",
            "--windows",
            "2",
            "--out",
            str(out_dir),
        )
        assert code == 0
        code, _, _ = run_cli(
            capsys, "page-slope", str(out_dir / "hawking_spec.json"), "--out", str(out_dir)
        )
        assert code == 0
        lines = (out_dir / "page_slope.csv").read_text().strip().split("\n")[1:]
        vals = [float(line.split(",")[1]) for line in lines]
        spec = load_spec(out_dir / "hawking_spec.json")
        increments = [b - a for a, b in zip(vals, vals[1:])]
        expected = [entropy_single(lam) for lam in spec.lambdas]
        assert increments == pytest.approx(expected, rel=1e-9)

    def test_missing_spec(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "page-slope", str(tmp_path / "nope.json"), "--out", str(tmp_path))
        assert code == 2

    def test_invalid_spec(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run_cli(capsys, "page-slope", str(bad), "--out", str(tmp_path))
        assert code == 2


class TestHawkingCommand:
    def test_solar_mass_count(self, tmp_path, capsys):
        code, out, _ = run_cli(
            capsys, "hawking", "--mass-solar", "1.0", "--count-only", "--out", str(tmp_path)
        )
        assert code == 0
        count = float(out.split("total excited modes over the lifetime:")[1].split()[0])
        assert 75.0 <= math.log10(count) <= 77.0

    def test_toy_mass_writes_spec(self, tmp_path, capsys):
        code, out, _ = run_cli(
            capsys,
            "hawking",
            "--mass-planck",
            "3.0",
            "--windows",
            "2",
            "--out",
            str(tmp_path),
        )
        assert code == 0
        spec = load_spec(tmp_path / "hawking_spec.json")
        assert spec.n_modes == 5
        assert spec.scenario == "II"

    def test_doubling_k_halves_count(self, tmp_path, capsys):
        counts = []
        for k in ("1.0", "2.0"):
            _, out, _ = run_cli(
                capsys,
                "hawking",
                "--mass-planck",
                "100.0",
                "--k",
                k,
                "--count-only",
                "--out",
                str(tmp_path),
            )
            counts.append(float(out.split("lifetime:")[1].split()[0]))
        assert counts[0] == pytest.approx(2 * counts[1])

    def test_cap_exceeded_is_usage_error(self, tmp_path, capsys):
        code, out, err = run_cli(
            capsys, "hawking", "--mass-solar", "1.0", "--out", str(tmp_path)
        )
        assert code == 2
        assert "exceeds the cap" in err
        assert "total excited modes" in out

    def test_requires_exactly_one_mass(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "hawking", "--out", str(tmp_path))
        assert code == 2
        code, _, err = run_cli(
            capsys,
            "hawking",
            "--mass-solar",
            "1.0",
            "--mass-planck",
            "2.0",
            "--out",
            str(tmp_path),
        )
        assert code == 2
