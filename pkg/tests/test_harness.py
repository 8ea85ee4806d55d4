"""Experiment configs, generators, artifact bundles, and the CLI."""

import hashlib
import json
import math

import numpy as np
import pytest

from regretlab.cli import main as cli_main
from regretlab.errors import ConfigError
from regretlab.harness import ExperimentConfig, generate_sequence, run_experiment
from regretlab.verify import CheckResult, run_suite

EXPERTS_FAMILY = {
    "variant": "finite_table",
    "covariate_ids": ["a", "b"],
    "values": [[0.5, -0.5], [-0.25, 0.75], [0.0, 0.0]],
}


def experts_config(tmp_path, horizon=50, seed=7, generator=None, formats=None):
    return ExperimentConfig.from_dict(
        {
            "seed": seed,
            "loss": {"name": "square", "B": 1.0},
            "family": EXPERTS_FAMILY,
            "forecaster": {"kind": "experts", "B": 1.0},
            "generator": generator or {"kind": "iid_noise", "expert": 0, "noise": 0.2},
            "horizon": horizon,
            "output": {"directory": str(tmp_path), "formats": formats or ["jsonl", "csv", "svg"]},
        }
    )


class TestGenerators:
    def test_iid_noise_zero_reproduces_expert(self, tmp_path):
        cfg = experts_config(tmp_path, generator={"kind": "iid_noise", "expert": 1, "noise": 0.0})
        seq = generate_sequence(cfg)
        fam = cfg.build_family()
        assert all(y == fam.evaluate(1, x) for x, y in seq)

    def test_iid_outputs_clipped_to_outcome_range(self, tmp_path):
        cfg = experts_config(tmp_path, generator={"kind": "iid_noise", "expert": 0, "noise": 3.0})
        assert all(-1.0 <= y <= 1.0 for _, y in generate_sequence(cfg))

    def test_replay_round_trips(self, tmp_path):
        path = tmp_path / "seq.jsonl"
        rows = [{"x": "a", "y": 0.5}, {"x": "b", "y": -1.0}]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        cfg = experts_config(tmp_path, horizon=2, generator={"kind": "replay", "path": str(path)})
        assert generate_sequence(cfg) == [("a", 0.5), ("b", -1.0)]

    def test_adversarial_oracle_tiles_the_trace(self, tmp_path):
        game = {
            "family": {
                "variant": "finite_table",
                "covariate_ids": ["a"],
                "values": [[1.0], [-1.0]],
            },
            "loss": {"name": "square", "B": 1.0},
            "horizon": 2,
            "covariate_set": ["a"],
            "outcome_grid": [-1.0, 1.0],
            "prediction_grid": [-1.0, 0.0, 1.0],
        }
        cfg = experts_config(
            tmp_path, horizon=7, generator={"kind": "adversarial_oracle", "game": game}
        )
        seq = generate_sequence(cfg)
        assert len(seq) == 7
        assert seq[:2] == seq[2:4]  # period two

    def test_shattering_adversary_emits_witness_outcomes(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            {
                "seed": 3,
                "loss": {"name": "square", "B": 2.0},
                "family": {
                    "variant": "finite_table",
                    "covariate_ids": ["a"],
                    "values": [[1.0], [-1.0]],
                },
                "forecaster": {"kind": "experts", "B": 2.0},
                "generator": {"kind": "shattering_adversary", "beta": 2.0},
                "horizon": 9,
                "output": {"directory": str(tmp_path)},
            }
        )
        seq = generate_sequence(cfg)
        assert len(seq) == 9
        assert all(x == "a" for x, _ in seq)
        assert set(y for _, y in seq) <= {-2.0, 2.0}

    def test_shattering_adversary_requires_certificate(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            {
                "seed": 3,
                "loss": {"name": "square", "B": 1.0},
                "family": {
                    "variant": "finite_table",
                    "covariate_ids": ["a"],
                    "values": [[0.5]],
                },
                "forecaster": {"kind": "experts", "B": 1.0},
                "generator": {"kind": "shattering_adversary", "beta": 0.5},
                "horizon": 4,
                "output": {"directory": str(tmp_path)},
            }
        )
        with pytest.raises(ConfigError):
            generate_sequence(cfg)

    def test_unknown_generator(self, tmp_path):
        cfg = experts_config(tmp_path, generator={"kind": "mystery"})
        with pytest.raises(ConfigError):
            generate_sequence(cfg)


class TestRunExperiment:
    def test_bundle_contents_and_consistency(self, tmp_path):
        cfg = experts_config(tmp_path)
        summary = run_experiment(cfg)
        assert (tmp_path / "rounds.jsonl").exists()
        assert (tmp_path / "regret.csv").exists()
        assert (tmp_path / "regret.svg").exists()
        assert (tmp_path / "summary.json").exists()
        lines = (tmp_path / "rounds.jsonl").read_text().splitlines()
        assert len(lines) == 50
        last = json.loads(lines[-1])
        assert summary["final_regret"] == pytest.approx(last["cumulative_regret"])
        assert summary["bound"] == pytest.approx(2.0 * math.log(3))
        assert summary["bound_satisfied"] is True
        assert summary["rng"] == {"algorithm": "PCG64", "seed": 7}

    def test_determinism_byte_identical_logs(self, tmp_path):
        s1 = run_experiment(experts_config(tmp_path / "one"), out_dir=tmp_path / "one")
        s2 = run_experiment(experts_config(tmp_path / "two"), out_dir=tmp_path / "two")
        h1 = hashlib.sha256((tmp_path / "one" / "rounds.jsonl").read_bytes()).hexdigest()
        h2 = hashlib.sha256((tmp_path / "two" / "rounds.jsonl").read_bytes()).hexdigest()
        assert h1 == h2 == s1["log_sha256"] == s2["log_sha256"]

    def test_zero_horizon(self, tmp_path):
        cfg = experts_config(tmp_path, horizon=0)
        summary = run_experiment(cfg)
        assert summary["final_regret"] == 0.0
        assert (tmp_path / "rounds.jsonl").read_text() == ""

    def test_vaw_experiment(self, tmp_path):
        path = tmp_path / "seq.jsonl"
        rng = np.random.default_rng(0)
        with path.open("w") as fh:
            for _ in range(30):
                x = rng.uniform(-1, 1, size=2) / math.sqrt(2)
                y = float(np.clip(x[0], -1, 1))
                fh.write(json.dumps({"x": list(x), "y": y}) + "\n")
        cfg = ExperimentConfig.from_dict(
            {
                "seed": 1,
                "loss": {"name": "square", "B": 1.0},
                "family": {"variant": "linear", "dimension": 2},
                "forecaster": {"kind": "vaw", "lambda": 1.0, "B": 1.0},
                "generator": {"kind": "replay", "path": str(path)},
                "horizon": 30,
                "output": {"directory": str(tmp_path)},
            }
        )
        summary = run_experiment(cfg)
        assert summary["bound_satisfied"] is True

    def test_missing_field_raises_config_error(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"seed": 0})


class TestSuitePlumbing:
    def test_passing_subset_exits_zero(self):
        results, status = run_suite(level="fast", names=["khinchine_inequality"])
        assert status == 0 and results[0].passed

    def test_injected_broken_check_fails_the_suite(self):
        def broken() -> CheckResult:
            return CheckResult("injected_broken_relaxation", False, -1.0, "", 0.0)

        results, status = run_suite(
            level="fast", names=["khinchine_inequality"], extra_checks=[broken]
        )
        assert status == 1
        assert [r.name for r in results if not r.passed] == ["injected_broken_relaxation"]


class TestCLI:
    def test_khinchine_verb(self, tmp_path, capsys):
        cfg = tmp_path / "k.json"
        cfg.write_text(json.dumps({"k": 4}))
        assert cli_main(["complexity", "khinchine", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["mean_abs_sum"] == 1.5 and out["holds"]

    def test_minimax_verb(self, tmp_path, capsys):
        cfg = tmp_path / "game.json"
        cfg.write_text(
            json.dumps(
                {
                    "family": {
                        "variant": "finite_table",
                        "covariate_ids": ["x0"],
                        "values": [[1.0], [-1.0]],
                    },
                    "loss": {"name": "absolute", "B": 1.0},
                    "horizon": 1,
                    "covariate_set": ["x0"],
                    "outcome_grid": [-1.0, 1.0],
                    "prediction_grid": [-1.0, 0.0, 1.0],
                }
            )
        )
        assert cli_main(["minimax", "--config", str(cfg), "--strategy"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["value"] == pytest.approx(1.0)
        assert out["optimal_replay"]["regret"] == pytest.approx(1.0)

    def test_run_verb(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(
            json.dumps(
                {
                    "seed": 5,
                    "loss": {"name": "square", "B": 1.0},
                    "family": EXPERTS_FAMILY,
                    "forecaster": {"kind": "experts", "B": 1.0},
                    "generator": {"kind": "iid_noise", "expert": 0, "noise": 0.1},
                    "horizon": 20,
                }
            )
        )
        assert cli_main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "out")]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["bound_satisfied"] is True

    def test_cover_verb(self, tmp_path, capsys):
        cfg = tmp_path / "cover.json"
        cfg.write_text(
            json.dumps(
                {
                    "family": {
                        "variant": "finite_table",
                        "covariate_ids": ["x0"],
                        "values": [[1.0], [-1.0]],
                    },
                    "tree": {"levels": [["x0"], ["x0", "x0"]]},
                    "beta": 0.5,
                    "norm": "linf",
                }
            )
        )
        assert cli_main(["complexity", "cover", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["size"] == 2

    def test_fat_verb_emits_certificate(self, tmp_path, capsys):
        cfg = tmp_path / "fat.json"
        cfg.write_text(
            json.dumps(
                {
                    "family": {
                        "variant": "finite_table",
                        "covariate_ids": ["x0"],
                        "values": [[1.0], [-1.0]],
                    },
                    "beta": 2.0,
                    "max_depth": 3,
                }
            )
        )
        assert cli_main(["complexity", "fat", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["fat"] == 1
        assert out["certificate"]["witness"] == [[0.0]]

    def test_offset_verb(self, tmp_path, capsys):
        cfg = tmp_path / "off.json"
        cfg.write_text(
            json.dumps(
                {
                    "family": {
                        "variant": "finite_table",
                        "covariate_ids": ["x0"],
                        "values": [[1.0], [-1.0]],
                    },
                    "tree": {"levels": [["x0"], ["x0", "x0"]]},
                    "mu_tree": {"levels": [[0.0], [0.0, 0.0]]},
                    "C": 0.5,
                    "offset": {"kind": "power", "K": 1.0, "r": 2.0},
                }
            )
        )
        assert cli_main(["complexity", "offset", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["offset_rademacher"] == pytest.approx(-1.0)

    def test_dudley_verb(self, tmp_path, capsys):
        cfg = tmp_path / "d.json"
        cfg.write_text(
            json.dumps(
                {"log_cover": {"kind": "power", "coef": 1.0, "power": 1.0},
                 "n": 100, "rho": 0.01, "gamma": 1.0}
            )
        )
        assert cli_main(["complexity", "dudley", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["dudley_bound"] == pytest.approx(220.0, abs=1e-4)

    def test_admissibility_verb(self, tmp_path, capsys):
        cfg = tmp_path / "adm.json"
        cfg.write_text(
            json.dumps(
                {
                    "relaxation": "experts",
                    "loss": {"name": "square", "B": 1.0},
                    "family": EXPERTS_FAMILY,
                    "horizon": 3,
                    "histories": 4,
                    "seed": 0,
                }
            )
        )
        assert cli_main(["admissibility", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["passed"] is True

    def test_usage_error_exit_code(self, tmp_path):
        assert cli_main(["run", "--config", str(tmp_path / "missing.json")]) == 2

    def test_bad_verb_exits_two(self, capsys):
        assert cli_main(["frobnicate"]) == 2
