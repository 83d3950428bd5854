import json

import numpy as np
import pytest

from battbank import features
from battbank.cli import (EXIT_IO, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION,
                          main)
from battbank.core import config_to_dict, load_config

from conftest import make_bank, make_chain

from pathlib import Path

TOY_CONFIG = str(Path(__file__).resolve().parent.parent
                 / "configs" / "toy_bank.json")


def write_config(tmp_path, name="cfg.json", **overrides):
    doc = config_to_dict(make_bank(**{k: v for k, v in overrides.items()
                                      if k != "doc_edit"}), make_chain())
    edit = overrides.get("doc_edit")
    if edit:
        edit(doc)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestValidate:
    def test_shipped_config_passes(self, capsys):
        assert main(["validate", TOY_CONFIG]) == EXIT_OK
        assert "config OK" in capsys.readouterr().out

    def test_malformed_file_io_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["validate", str(bad)]) == EXIT_IO
        assert "cannot read config" in capsys.readouterr().err

    def test_missing_file_io_exit(self, tmp_path):
        assert main(["validate", str(tmp_path / "absent.json")]) == EXIT_IO

    def test_invalid_config_validation_exit(self, tmp_path, capsys):
        def break_row(doc):
            doc["chain"]["transition"][1][0] = 0.4  # row now sums to 0.9
        path = write_config(tmp_path, doc_edit=break_row)
        assert main(["validate", path]) == EXIT_VALIDATION
        assert "transition[1]" in capsys.readouterr().out

    def test_infeasible_occupancy_validation_exit(self, tmp_path):
        path = write_config(tmp_path, occupancy=(1, 9))
        assert main(["validate", path]) == EXIT_VALIDATION


class TestTrain:
    def test_zero_steps_writes_zero_weights(self, tmp_path, capsys):
        out = tmp_path / "w.json"
        assert main(["train", TOY_CONFIG, "--out", str(out),
                     "--steps", "0"]) == EXIT_OK
        bank, chain = load_config(TOY_CONFIG)
        w = features.load_weights(out, bank, chain)
        assert not w.any()
        assert "0 steps" in capsys.readouterr().out

    def test_seed_determinism_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "w1.json", tmp_path / "w2.json"
        for out in (out1, out2):
            assert main(["train", TOY_CONFIG, "--out", str(out),
                         "--steps", "3000", "--seed", "7"]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_log_written(self, tmp_path):
        out = tmp_path / "w.json"
        log = tmp_path / "log.csv"
        assert main(["train", TOY_CONFIG, "--out", str(out), "--log",
                     str(log), "--steps", "2000"]) == EXIT_OK
        lines = log.read_text().splitlines()
        assert lines[0].startswith("step,")
        assert len(lines) == 3  # header + one row per 1000 steps

    def test_invalid_config_blocks_training(self, tmp_path):
        path = write_config(tmp_path, gamma=1.5)
        assert main(["train", path, "--out",
                     str(tmp_path / "w.json")]) == EXIT_VALIDATION


class TestCompare:
    def test_small_table_and_csv(self, tmp_path, capsys):
        out = tmp_path / "table.csv"
        rc = main(["compare", TOY_CONFIG, "--sizes", "2,3", "--seeds", "0",
                   "--steps", "1000", "--eval-steps", "500",
                   "--out", str(out)])
        assert rc == EXIT_OK
        text = capsys.readouterr().out
        for name in ("greedy", "naive", "rl"):
            assert name in text
        assert out.exists()
        assert len(out.read_text().splitlines()) == 4

    def test_size_syntax_with_x(self, capsys):
        rc = main(["compare", TOY_CONFIG, "--sizes", "2x3", "--seeds", "0",
                   "--steps", "500", "--eval-steps", "200"])
        assert rc == EXIT_OK

    def test_bad_size_reports_failure(self, capsys):
        rc = main(["compare", TOY_CONFIG, "--sizes", "2,3,4", "--seeds", "0",
                   "--steps", "200", "--eval-steps", "100"])
        assert rc == EXIT_RUNTIME
        assert "FAILED" in capsys.readouterr().out


class TestSolveExact:
    def test_optimality_premises_met_pass(self, capsys):
        # shipped instance: lossless, ramps dominate capacity
        assert main(["solve-exact", TOY_CONFIG]) == EXIT_OK
        out = capsys.readouterr().out
        assert "PASS" in out
        assert "greedy-optimality gap" in out

    def test_premises_unmet_no_claim(self, tmp_path, capsys):
        path = write_config(tmp_path, ramps=(2, 2))
        assert main(["solve-exact", path]) == EXIT_OK
        out = capsys.readouterr().out
        assert "no optimality claim" in out
        assert "PASS" not in out

    def test_oversized_instance_refused(self, tmp_path, capsys):
        path = write_config(tmp_path, capacities=(200, 200, 200),
                            ramps=(2, 2, 2), weights=(1.0, 1.0, 1.0))
        assert main(["solve-exact", path]) == EXIT_RUNTIME
        err = capsys.readouterr().err
        assert "exceeding the cap" in err

    def test_solution_csv(self, tmp_path):
        out = tmp_path / "sol.csv"
        assert main(["solve-exact", TOY_CONFIG, "--out", str(out)]) == EXIT_OK
        assert len(out.read_text().splitlines()) == 49


def test_weights_round_trip_preserves_policy(tmp_path):
    # train briefly, persist, reload: identical q_hat on every (s, a)
    from battbank.features import feature_vector, q_hat, load_weights
    from battbank.learner import LearnSchedule, train
    from battbank.env import feasible_actions
    from battbank.oracle import enumerate_states

    bank, chain = load_config(TOY_CONFIG)
    w, _ = train(bank, chain, LearnSchedule(t_train=2000, seed=3))
    path = tmp_path / "w.json"
    features.save_weights(path, w, bank, chain)
    w2 = load_weights(path, bank, chain)
    for s in enumerate_states(bank, chain):
        for a in feasible_actions(bank, chain, s):
            phi = feature_vector(bank, chain, s, a)
            assert q_hat(phi, w) == q_hat(phi, w2)
