import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from telesim import kernel
from telesim.cli import main, parse_complex, parse_input
from telesim.harness import (
    OUTPUT_DIR_ENV,
    SCHEMA,
    ConfigError,
    RunConfig,
    binomial_stderr,
    dumps,
    run_experiment,
    run_verification_suite,
    simulate,
    theoretical_success,
)
from telesim.protocols import ChannelSpec
from telesim.qcore import ket


def load(path):
    return json.loads(path.read_text())


class TestParsing:
    @pytest.mark.parametrize(
        "text,want",
        [("0.6", 0.6), ("0.8I", 0.8j), ("0.6+0.8I", 0.6 + 0.8j), ("-0.5-0.1i", -0.5 - 0.1j), ("I", 1j), ("-I", -1j), ("0.3j", 0.3j)],
    )
    def test_complex(self, text, want):
        assert parse_complex(text) == want

    def test_pair(self):
        assert parse_input("0.6, 0.8I") == (0.6, 0.8j)
        with pytest.raises(ValueError):
            parse_input("0.6")


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs,field",
        [
            ({"protocol": "quantum"}, "protocol"),
            ({"protocol": "standard", "alpha2": 1.5}, "alpha2"),
            ({"protocol": "standard", "trials": 0}, "trials"),
            ({"protocol": "standard", "seed": -1}, "seed"),
            ({"protocol": "standard", "input_mode": "fixed"}, "fixed_input"),
            ({"protocol": "standard", "input_mode": "fixed", "fixed_input": (1, 1)}, "fixed_input"),
            ({"protocol": "standard", "output_format": "xml"}, "output_format"),
            ({"protocol": "standard", "workers": 0}, "workers"),
            ({"protocol": "conclusive", "alpha2": 1.0}, "alpha2"),
        ],
    )
    def test_rejected(self, kwargs, field):
        with pytest.raises(ConfigError) as err:
            RunConfig(**kwargs).validate()
        assert err.value.field == field

    def test_theory(self):
        ch = ChannelSpec.from_alpha2(0.8)
        assert theoretical_success("conclusive", ch, None) == pytest.approx(0.4)
        assert theoretical_success("conclusive-singlet-only", ch, None) == pytest.approx(0.1)
        assert theoretical_success("singlet-only", ChannelSpec.maximal(), None) == 0.25
        assert theoretical_success("singlet-only", ch, ket(1, 0)) == pytest.approx(0.1)

    def test_stderr(self):
        assert binomial_stderr(40, 100) == pytest.approx(math.sqrt(0.4 * 0.6 / 100))


class TestRunExperiment:
    def test_schema(self):
        rep, code = run_experiment(RunConfig("conclusive", alpha2=0.8, trials=5000, seed=3), write=False)
        assert code == 0
        assert rep["schema"] == SCHEMA == 1
        for key in ("generator", "timestamp", "config", "rng", "results", "theory", "checks"):
            assert key in rep
        assert rep["config"]["alpha"] == pytest.approx(math.sqrt(0.8))
        res = rep["results"]
        assert res["wrong_conclusive_count"] == 0
        assert res["success_rate_stderr"] == pytest.approx(binomial_stderr(res["conclusive_count"], 5000))
        assert rep["theory"]["usd_overlap"] == pytest.approx(0.6)

    def test_not_exact_has_no_wrong_count(self):
        rep, code = run_experiment(RunConfig("standard", alpha2=0.8, trials=2000), write=False)
        assert code == 0
        assert rep["results"]["wrong_conclusive_count"] is None
        assert rep["results"]["mean_fidelity"] < 1

    def test_enumerate(self):
        rep, code = run_experiment(RunConfig("conclusive", alpha2=0.8, trials=50, input_mode="enumerate-branches"), write=False)
        assert code == 0
        assert rep["results"]["success_probability"] == pytest.approx(0.4, abs=1e-12)

    def test_json_roundtrip_exact(self, tmp_path):
        out = tmp_path / "r.json"
        rep, _ = run_experiment(RunConfig("conclusive", alpha2=0.8, trials=3000, seed=5, output_path=str(out)))
        back = load(out)
        assert back["results"]["mean_fidelity_success"] == rep["results"]["mean_fidelity_success"]
        assert back["results"]["success_rate"] == rep["results"]["success_rate"]

    def test_nan_becomes_null(self):
        assert json.loads(dumps({"x": float("nan"), "checks": []}))["x"] is None

    def test_replay_identical(self, tmp_path):
        out = tmp_path / "a.json"
        texts = []
        for _ in range(2):
            run_experiment(RunConfig("conclusive", alpha2=0.7, trials=4000, seed=77, output_path=str(out)))
            texts.append([ln for ln in out.read_text().splitlines() if '"timestamp"' not in ln])
        assert texts[0] == texts[1]

    def test_workers_identical(self):
        base = dict(protocol="conclusive", alpha2=0.75, trials=6001, seed=12)
        one = simulate(RunConfig(**base, workers=1))
        two = simulate(RunConfig(**base, workers=2))
        for k in one:
            np.testing.assert_array_equal(one[k], two[k])

    @pytest.mark.parametrize("backend", kernel.available_backends())
    def test_backend_choice_same_report(self, backend):
        rep, _ = run_experiment(RunConfig("conclusive", alpha2=0.8, trials=3000, seed=2, backend=backend), write=False)
        ref, _ = run_experiment(RunConfig("conclusive", alpha2=0.8, trials=3000, seed=2, backend="python"), write=False)
        assert rep["results"]["conclusive_count"] == ref["results"]["conclusive_count"]

    def test_csv(self, tmp_path):
        out = tmp_path / "r.csv"
        run_experiment(RunConfig("conclusive", alpha2=0.8, trials=200, seed=1, output_format="csv", output_path=str(out)))
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["trial", "step1", "step2", "conclusive", "fidelity", "bits_sent"]
        assert len(rows) == 201
        assert {r[1] for r in rows[1:]} <= {"parallel", "antiparallel"}
        assert all(r[5] == "3" for r in rows[1:])
        for r in rows[1:]:
            assert (r[4] == "") == (r[3] == "0")

    def test_csv_enumerate(self, tmp_path):
        out = tmp_path / "e.csv"
        run_experiment(
            RunConfig("standard", trials=3, input_mode="enumerate-branches", output_format="csv", output_path=str(out))
        )
        rows = list(csv.reader(out.open()))
        assert rows[0][:4] == ["input", "step1", "step2", "probability"]
        assert len(rows) == 1 + 3 * 4

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        run_experiment(RunConfig("standard", trials=100, seed=4))
        assert (tmp_path / "standard-seed4.json").exists()

    def test_unwritable(self, tmp_path):
        with pytest.raises(ConfigError):
            run_experiment(RunConfig("standard", trials=10, output_path=str(tmp_path / "missing" / "x.json")))

    def test_telepovm_and_ensemble(self):
        rep, code = run_experiment(RunConfig("verify-telepovm", theta=0.4), write=False)
        assert code == 0 and rep["results"]["points"] == 1
        rep, code = run_experiment(RunConfig("ensemble-demo", alpha2=0.8), write=False)
        assert code == 0
        json.loads(dumps(rep))


class TestVerificationSuite:
    def test_passes(self):
        rep, code = run_verification_suite(seed=1, mc_samples=20_000)
        assert code == 0
        assert len(rep["checks"]) >= 15

    def test_inject_fault(self):
        rep, code = run_verification_suite(seed=1, inject_fault=True, mc_samples=2000)
        assert code == 1
        failed = [c["name"] for c in rep["checks"] if not c["passed"]]
        assert failed == ["POVM validity sweep (100 angles)"]

    def test_seed_only_moves_monte_carlo_lines(self):
        a, _ = run_verification_suite(seed=1, mc_samples=2000)
        b, _ = run_verification_suite(seed=2, mc_samples=2000)
        for x, y in zip(a["checks"], b["checks"]):
            assert x["name"] == y["name"]
            if not x["monte_carlo"]:
                assert x == y


class TestCli:
    def test_conclusive_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "c.json"
        assert main(["conclusive", "--alpha2", "0.8", "--trials", "2000", "--seed", "42", "--out", str(out)]) == 0
        assert load(out)["config"]["protocol"] == "conclusive"
        assert "PASS" in capsys.readouterr().out

    def test_one_bit_flag(self, tmp_path):
        out = tmp_path / "o.json"
        assert main(["teleport", "--one-bit", "--trials", "2000", "--out", str(out)]) == 0
        assert load(out)["results"]["classical_bits_per_trial"] == 1

    def test_fixed_input(self, tmp_path):
        out = tmp_path / "f.json"
        assert main(["teleport", "--input", "0.6,0.8I", "--trials", "500", "--out", str(out)]) == 0
        rep = load(out)
        assert rep["config"]["fixed_input"] == [[0.6, 0.0], [0.0, 0.8]]
        assert rep["results"]["min_success_fidelity"] == pytest.approx(1)

    @pytest.mark.parametrize(
        "argv",
        [
            ["teleport", "--alpha2", "2"],
            ["teleport", "--input", "1,1"],
            ["teleport", "--input", "abc"],
            ["conclusive", "--alpha2", "1.0"],
            ["teleport", "--trials", "0"],
        ],
    )
    def test_config_errors_exit_two(self, argv, capsys):
        assert main(argv) == 2
        assert "config error" in capsys.readouterr().err

    def test_verify_fault_exit_one(self, capsys):
        assert main(["verify", "--inject-fault", "--samples", "1000"]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_verify_writes(self, tmp_path):
        out = tmp_path / "v.json"
        assert main(["verify", "--samples", "2000", "--out", str(out)]) == 0
        assert load(out)["schema"] == 1

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "telesim", "telepovm", "--theta", "0.5"], capture_output=True, text=True, check=False
        )
        assert proc.returncode == 0, proc.stderr
        assert "PASS" in proc.stdout
