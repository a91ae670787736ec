import json
import subprocess
import sys

import numpy as np
import pytest

from hystdyn import __version__
from hystdyn.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def data_csv(workdir):
    path = workdir / "babble.csv"
    code = main(["babble", "--duration-s", "60", "--seed", "0", "--out", str(path)])
    assert code == 0
    return path


@pytest.fixture(scope="module")
def uni_csv(workdir):
    path = workdir / "uni.csv"
    assert main(["babble", "--duration-s", "30", "--seed", "1", "--single-sided",
                 "--out", str(path)]) == 0
    return path


def tiny_train(data, out_dir, *extra):
    return main([
        "train", "--data", str(data), "--k", "3", "--out-dir", str(out_dir),
        "--epochs", "2", "--hidden-size", "4", "--dense-size", "4", "--seed", "0",
        *extra,
    ])


class TestBabble:
    def test_writes_csv_and_manifest(self, data_csv):
        assert data_csv.exists()
        manifest = json.loads((data_csv.parent / "babble.csv.manifest.json").read_text())
        assert manifest["command"] == "babble"
        assert manifest["seed"] == 0
        assert manifest["package_version"] == __version__
        assert manifest["outputs"] == ["babble.csv"]

    def test_reruns_byte_identical(self, workdir):
        a, b = workdir / "rep_a.csv", workdir / "rep_b.csv"
        for path in (a, b):
            assert main(["babble", "--duration-s", "20", "--seed", "4",
                         "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_env_seed_matches_flag(self, workdir, monkeypatch):
        via_flag = workdir / "flag.csv"
        via_env = workdir / "env.csv"
        monkeypatch.delenv("HYSTDYN_SEED", raising=False)
        assert main(["babble", "--duration-s", "10", "--seed", "77",
                     "--out", str(via_flag)]) == 0
        monkeypatch.setenv("HYSTDYN_SEED", "77")
        assert main(["babble", "--duration-s", "10", "--out", str(via_env)]) == 0
        assert via_flag.read_bytes() == via_env.read_bytes()

    def test_flag_beats_env(self, workdir, monkeypatch):
        plain = workdir / "plain77.csv"
        override = workdir / "override.csv"
        monkeypatch.delenv("HYSTDYN_SEED", raising=False)
        assert main(["babble", "--duration-s", "10", "--seed", "77",
                     "--out", str(plain)]) == 0
        monkeypatch.setenv("HYSTDYN_SEED", "1")
        assert main(["babble", "--duration-s", "10", "--seed", "77",
                     "--out", str(override)]) == 0
        assert override.read_bytes() == plain.read_bytes()

    def test_bad_env_seed_is_usage_error(self, workdir, monkeypatch, capsys):
        monkeypatch.setenv("HYSTDYN_SEED", "not-a-number")
        code = main(["babble", "--duration-s", "10", "--out", str(workdir / "x.csv")])
        assert code == 1
        assert "HYSTDYN_SEED" in capsys.readouterr().err


class TestTrain:
    def test_writes_artifacts(self, data_csv, workdir, capsys):
        out_dir = workdir / "train_a"
        assert tiny_train(data_csv, out_dir) == 0
        text = capsys.readouterr().out
        assert "epoch   1" in text
        assert "best epoch" in text
        assert (out_dir / "model.json").exists()
        history = (out_dir / "history.csv").read_text().splitlines()
        assert history[0] == "epoch,train_mse,val_mse,val_rmse_deg"
        assert len(history) == 3
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert str(data_csv) in manifest["inputs"]
        assert len(manifest["inputs"][str(data_csv)]) == 64  # sha256 hex

    def test_reruns_byte_identical(self, data_csv, workdir):
        out_a, out_b = workdir / "det_a", workdir / "det_b"
        assert tiny_train(data_csv, out_a) == 0
        assert tiny_train(data_csv, out_b) == 0
        assert (out_a / "model.json").read_bytes() == (out_b / "model.json").read_bytes()
        assert (out_a / "history.csv").read_bytes() == (out_b / "history.csv").read_bytes()

    def test_k_needing_wire_b_rejects_single_sided_data(self, uni_csv, workdir, capsys):
        code = tiny_train(uni_csv, workdir / "t_uni")
        assert code == 2
        assert "wire B" in capsys.readouterr().err

    def test_missing_data_file(self, workdir):
        assert tiny_train(workdir / "absent.csv", workdir / "t_gone") == 2

    def test_divergence_exit_code(self, data_csv, workdir):
        with np.errstate(over="ignore", invalid="ignore"):
            code = tiny_train(data_csv, workdir / "t_div", "--learning-rate", "1e160",
                              "--epochs", "1")
        assert code == 3


class TestBaselineCommand:
    def test_report_contents(self, data_csv, workdir):
        out_dir = workdir / "base"
        assert main(["baseline", "--data", str(data_csv), "--k", "3",
                     "--out-dir", str(out_dir)]) == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["model_type"] == "linear"
        assert report["k"] == 3
        assert report["val_rmse_deg"] < 2.0
        assert report["normal_residual"] < 1e-6
        assert report["rank_deficient"] is False


@pytest.fixture(scope="module")
def model_path(data_csv, workdir):
    out_dir = workdir / "train_for_eval"
    assert tiny_train(data_csv, out_dir) == 0
    return out_dir / "model.json"


class TestEval:
    @staticmethod
    def eval_args(model_path, data_csv, out_dir, *extra):
        return ["eval", "--model", str(model_path), "--data", str(data_csv),
                "--out-dir", str(out_dir), "--t0-s", "2.0",
                "--drift-window-s", "1.0", *extra]

    def test_both_modes_write_reports(self, model_path, data_csv, workdir):
        out_dir = workdir / "eval_a"
        assert main(self.eval_args(model_path, data_csv, out_dir)) == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["split"] == "val"
        assert report["one_step"]["rmse_deg"] >= 0.0
        assert report["rollout"]["n_steps"] > 0
        assert report["rollout"]["drift_ratio"] > 0.0
        assert (out_dir / "one_step.csv").exists()
        assert (out_dir / "rollout.csv").exists()

    def test_csvs_byte_identical_across_runs(self, model_path, data_csv, workdir):
        out_a, out_b = workdir / "eval_det_a", workdir / "eval_det_b"
        for out_dir in (out_a, out_b):
            assert main(self.eval_args(model_path, data_csv, out_dir)) == 0
        for name in ("one_step.csv", "rollout.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_one_step_only_on_train_split(self, model_path, data_csv, workdir):
        out_dir = workdir / "eval_train"
        assert main(self.eval_args(model_path, data_csv, out_dir,
                                   "--split", "train", "--mode", "one-step")) == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["split"] == "train"
        assert "rollout" not in report
        assert not (out_dir / "rollout.csv").exists()

    def test_linear_checkpoint_evaluates_too(self, data_csv, workdir):
        base_dir = workdir / "base_for_eval"
        assert main(["baseline", "--data", str(data_csv), "--k", "1",
                     "--out-dir", str(base_dir)]) == 0
        out_dir = workdir / "eval_linear"
        assert main(self.eval_args(base_dir / "model.json", data_csv, out_dir)) == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["model_type"] == "linear"

    def test_corrupt_checkpoint(self, data_csv, workdir):
        bad = workdir / "bad_model.json"
        bad.write_text("{}")
        code = main(self.eval_args(bad, data_csv, workdir / "eval_bad"))
        assert code == 2


class TestCompare:
    def test_report_ratio(self, data_csv, workdir):
        out_dir = workdir / "cmp"
        assert main(["compare", "--data", str(data_csv), "--k", "1",
                     "--out-dir", str(out_dir), "--epochs", "1",
                     "--hidden-size", "4", "--dense-size", "4", "--seed", "0"]) == 0
        report = json.loads((out_dir / "compare.json").read_text())
        assert report["rmse_ratio"] == pytest.approx(
            report["lstm_val_rmse_deg"] / report["linear_val_rmse_deg"]
        )
        assert (out_dir / "lstm.json").exists()
        assert (out_dir / "linear.json").exists()


class TestParsing:
    def test_no_subcommand_is_usage_error(self):
        assert main([]) == 1

    def test_unknown_flag(self):
        assert main(["babble", "--frequency", "3"]) == 1

    def test_k_out_of_range(self, data_csv, workdir):
        assert main(["train", "--data", str(data_csv), "--k", "9",
                     "--out-dir", str(workdir / "k9")]) == 1

    def test_version_exits_clean(self, capsys):
        assert main(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "hystdyn", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert __version__ in proc.stdout
