import json
import hashlib

import numpy as np
import pytest

from taxelkit import cli
from taxelkit.core import load_dataset
from taxelkit.learn import load_model


@pytest.fixture(scope="module")
def small_dataset_dir(tmp_path_factory):
    """A reduced synthetic dataset written via the synth command."""
    out = tmp_path_factory.mktemp("synth")
    code = cli.main(
        [
            "synth", "--seed", "0", "--out", str(out),
            "--train-participants", "3", "--test-participants", "2",
        ]
    )
    assert code == 0
    return out


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestSynth:
    def test_outputs_and_manifest(self, small_dataset_dir):
        data = small_dataset_dir / "dataset.jsonl"
        manifest = small_dataset_dir / "dataset.manifest.json"
        run = small_dataset_dir / "run_manifest.json"
        assert data.exists() and manifest.exists() and run.exists()
        doc = json.loads(run.read_text())
        assert doc["command"] == "synth"
        assert doc["outputs"][str(data)] == sha256(data)

    def test_dataset_loads(self, small_dataset_dir):
        ds = load_dataset(small_dataset_dir / "dataset.jsonl")
        assert len(ds.train_recordings()) == 3 * 6 * 15
        assert len(ds.test_recordings()) == 2 * 6 * 5

    def test_missing_seed_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as err:
            cli.main(["synth", "--out", str(tmp_path)])
        assert err.value.code == cli.EXIT_USAGE

    def test_unknown_flag_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            cli.main(["synth", "--seed", "0", "--frobnicate"])
        assert err.value.code == cli.EXIT_USAGE


@pytest.fixture(scope="module")
def trained_dir(small_dataset_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    code = cli.main(
        [
            "train", "--data", str(small_dataset_dir / "dataset.jsonl"),
            "--model", "mlp", "--feature", "activated-count",
            "--seed", "0", "--out", str(out), "--max-epochs", "40",
        ]
    )
    assert code == 0
    return out


class TestTrainEvalChain:
    def test_model_and_history_written(self, trained_dir):
        assert (trained_dir / "model.json").exists()
        assert (trained_dir / "history.json").exists()
        model = load_model(trained_dir / "model.json")
        assert model.kind == "mlp"
        assert model.feature_kind.value == "activated_count"

    def test_manifests_chain_by_hash(self, small_dataset_dir, trained_dir):
        synth_manifest = json.loads((small_dataset_dir / "run_manifest.json").read_text())
        train_manifest = json.loads((trained_dir / "run_manifest.json").read_text())
        data_path = str(small_dataset_dir / "dataset.jsonl")
        assert train_manifest["inputs"][data_path] == synth_manifest["outputs"][data_path]

    def test_eval_writes_report(self, small_dataset_dir, trained_dir, tmp_path):
        out = tmp_path / "eval"
        code = cli.main(
            [
                "eval", "--data", str(small_dataset_dir / "dataset.jsonl"),
                "--model-file", str(trained_dir / "model.json"),
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert 0.0 <= report["accuracy"] <= 1.0
        confusion = np.array(report["confusion"])
        assert confusion.sum() == 2 * 6 * 5
        assert (out / "report.txt").read_text().startswith("accuracy")

    def test_eval_kind_mismatch_exit_code(self, small_dataset_dir, trained_dir, tmp_path, capsys):
        code = cli.main(
            [
                "eval", "--data", str(small_dataset_dir / "dataset.jsonl"),
                "--model-file", str(trained_dir / "model.json"),
                "--feature", "taxel-mean", "--out", str(tmp_path / "eval"),
            ]
        )
        assert code == cli.EXIT_KIND_MISMATCH
        err = capsys.readouterr().err
        doc = json.loads(err.strip().splitlines()[-1])
        assert doc["error"]["exit_code"] == cli.EXIT_KIND_MISMATCH

    def test_missing_file_exit_code(self, tmp_path, capsys):
        code = cli.main(
            [
                "eval", "--data", str(tmp_path / "nope.jsonl"),
                "--model-file", str(tmp_path / "nope.json"),
                "--out", str(tmp_path / "out"),
            ]
        )
        assert code == cli.EXIT_MISSING_FILE
        doc = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert doc["error"]["type"] == "FileNotFoundError"


class TestRFTrain:
    def test_rf_via_cli(self, small_dataset_dir, tmp_path):
        out = tmp_path / "rf"
        code = cli.main(
            [
                "train", "--data", str(small_dataset_dir / "dataset.jsonl"),
                "--model", "rf", "--seed", "1", "--out", str(out),
                "--n-estimators", "10",
            ]
        )
        assert code == 0
        model = load_model(out / "model.json")
        assert model.kind == "rf"
        assert model.config.n_estimators == 10
        assert not (out / "history.json").exists()


class TestCharacterize:
    def test_outputs(self, tmp_path):
        out = tmp_path / "char"
        code = cli.main(["characterize", "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "characterization.json").read_text())
        assert len(summary["taxels"]) == 8
        for taxel in summary["taxels"]:
            assert taxel["min_detect_not_reached"] == 0
        assert (out / "characterization.csv").exists()


class TestHelp:
    def test_defaults_documented(self, capsys):
        for argv, needles in [
            (["train", "--help"], ["10", "150", "3", "50", "0.00025", "60"]),
            (["serve", "--help"], ["50"]),
        ]:
            with pytest.raises(SystemExit) as err:
                cli.main(argv)
            assert err.value.code == 0
            text = capsys.readouterr().out
            for needle in needles:
                assert needle in text, (argv, needle)


class TestConfigFile:
    def test_file_values_applied_flags_win(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"train-participants": 2, "test-participants": 1}))
        out = tmp_path / "synth"
        code = cli.main(
            [
                "synth", "--seed", "0", "--out", str(out), "--config", str(cfg),
                "--test-participants", "2",  # flag beats file
            ]
        )
        assert code == 0
        ds = load_dataset(out / "dataset.jsonl")
        assert len(ds.train_recordings()) == 2 * 6 * 15
        assert len(ds.test_recordings()) == 2 * 6 * 5

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        code = cli.main(["synth", "--seed", "0", "--out", str(tmp_path / "o"),
                         "--config", str(cfg)])
        assert code == cli.EXIT_CONFIG


class TestServeListen:
    def test_listen_writes_event_lines(self, small_dataset_dir, trained_dir, tmp_path):
        from taxelkit.core import load_dataset
        from taxelkit.stream import FrameServer, ReplaySource

        ds = load_dataset(small_dataset_dir / "dataset.jsonl")
        recs = ds.test_recordings()[:3]
        server = FrameServer(ReplaySource(recs), rate_hz=2000.0).start()
        events_path = tmp_path / "events.jsonl"
        try:
            code = cli.main(
                [
                    "listen", "--host", "127.0.0.1", "--port", str(server.port),
                    "--model-file", str(trained_dir / "model.json"),
                    "--out-file", str(events_path), "--max-events", "3",
                ]
            )
        finally:
            server.stop()
        assert code == 0
        lines = [json.loads(l) for l in events_path.read_text().splitlines()]
        assert len(lines) == 3
        for event in lines:
            assert event["event"] == "classification"
            assert len(event["probabilities"]) == 6

    def test_serve_replay_requires_data(self, capsys):
        code = cli.main(["serve", "--source", "replay"])
        assert code == cli.EXIT_CONFIG

    def test_gesture_params_override(self, tmp_path):
        params = tmp_path / "gestures.json"
        params.write_text(json.dumps({"tap": {"repetitions": [4, 4]}}))
        out = tmp_path / "synth"
        code = cli.main(
            [
                "synth", "--seed", "3", "--out", str(out),
                "--train-participants", "1", "--test-participants", "1",
                "--gesture-params", str(params), "--noise-std", "0",
            ]
        )
        assert code == 0


class TestReproducibility:
    def test_same_inputs_byte_identical_outputs(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            code = cli.main(
                [
                    "synth", "--seed", "5", "--out", str(out),
                    "--train-participants", "2", "--test-participants", "1",
                ]
            )
            assert code == 0
            outs.append(out)
        a, b = outs
        assert (a / "dataset.jsonl").read_bytes() == (b / "dataset.jsonl").read_bytes()
        # manifests differ only in paths; dataset manifests are identical
        assert (a / "dataset.manifest.json").read_bytes() == (b / "dataset.manifest.json").read_bytes()
