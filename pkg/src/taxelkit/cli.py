"""Command-line entry point covering the full workflow.

Subcommands: synth, train, eval, ablate, characterize, serve, listen.
Every run writes its artifacts under --out together with a run manifest
(command, effective config, seed, sha256 of inputs and outputs) so chained
runs can be audited end to end.  Failures print a one-line JSON error to
stderr and exit with a code specific to the error family.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import core, pipeline, sensorsim
from .learn import (
    CNN1DConfig,
    DivergenceError,
    KindMismatchError,
    LSTMConfig,
    MLPConfig,
    RFConfig,
    ablation_run,
    evaluate,
    load_model,
    render_ablation_table,
    save_model,
    train_cnn1d,
    train_lstm,
    train_mlp,
    train_rf,
)
from .pipeline import FeatureKind, NoContactError, PipelineConfig
from .stream import FrameServer, ProtocolError, ReplaySource, SynthSource, classify_live

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_KIND_MISMATCH = 4
EXIT_CONFIG = 5
EXIT_NO_CONTACT = 6
EXIT_DIVERGENCE = 7
EXIT_PROTOCOL = 8

_EXIT_BY_ERROR = (
    (KindMismatchError, EXIT_KIND_MISMATCH),
    (FileNotFoundError, EXIT_MISSING_FILE),
    (NoContactError, EXIT_NO_CONTACT),
    (DivergenceError, EXIT_DIVERGENCE),
    (ProtocolError, EXIT_PROTOCOL),
    (core.ConfigurationError, EXIT_CONFIG),
    (ValueError, EXIT_CONFIG),
)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, params: dict, inputs: list[Path], outputs: list[Path]):
    manifest = {
        "command": command,
        "parameters": params,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    path = out_dir / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {p}")
    return p


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        activation_threshold=args.threshold,
        target_frames=args.target_frames,
        smoothing_window=args.smoothing_window,
        sample_rate_hz=args.rate,
    )


def _load_json_config(path: str | None) -> dict:
    if not path:
        return {}
    doc = json.loads(_require_file(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise core.ConfigurationError("config file must hold a JSON object")
    return doc


def _apply_file_defaults(args: argparse.Namespace, parser_defaults: dict):
    """Config-file values fill in anything the command line left at default."""
    file_cfg = _load_json_config(getattr(args, "config", None))
    for key, value in file_cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise core.ConfigurationError(f"unknown config key {key!r}")
        if getattr(args, attr) == parser_defaults.get(attr):
            setattr(args, attr, value)


# --- subcommands -------------------------------------------------------------


def _cmd_synth(args) -> int:
    out = _out_dir(args)
    profiles = (
        sensorsim.profiles_from_json(_require_file(args.gesture_params))
        if args.gesture_params
        else None
    )
    dataset = sensorsim.synthesize_dataset(
        profiles=profiles,
        n_train_participants=args.train_participants,
        n_test_participants=args.test_participants,
        seed=args.seed,
        noise_std=args.noise_std,
    )
    data_path = out / "dataset.jsonl"
    manifest_path = out / "dataset.manifest.json"
    core.save_dataset(dataset, data_path, manifest_path)
    summary = core.split_summary(dataset)
    print(json.dumps(summary, indent=2, sort_keys=True))
    _write_manifest(out, "synth", _params(args), [], [data_path, manifest_path])
    return EXIT_OK


def _params(args) -> dict:
    skip = {"func", "config"}
    return {
        k: v for k, v in sorted(vars(args).items()) if k not in skip and not callable(v)
    }


def _extract_sets(args, pcfg):
    dataset = core.load_dataset(_require_file(args.data))
    kind = FeatureKind.from_name(args.feature)
    train_recs = dataset.train_recordings()
    test_recs = dataset.test_recordings()
    fit_recs, val_recs = core.train_val_split(train_recs, args.val_fraction, args.seed)
    mode = args.on_no_contact
    fm_fit = pipeline.extract_matrix(fit_recs, kind, pcfg, on_no_contact=mode)
    fm_val = pipeline.extract_matrix(val_recs, kind, pcfg, on_no_contact=mode)
    fm_test = pipeline.extract_matrix(test_recs, kind, pcfg, on_no_contact=mode)
    return kind, fm_fit, fm_val, fm_test


def _cmd_train(args) -> int:
    out = _out_dir(args)
    pcfg = _pipeline_config(args)
    kind, fm_fit, fm_val, fm_test = _extract_sets(args, pcfg)
    common = dict(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.seed,
    )
    input_len = fm_fit.X.shape[1]
    if args.model == "mlp":
        lr = args.lr if args.lr is not None else 0.00025
        model = train_mlp(
            fm_fit.X, fm_fit.y,
            MLPConfig(input_dim=input_len, **{**common, "learning_rate": lr}),
            val=(fm_val.X, fm_val.y), feature_kind=kind,
        )
    elif args.model == "cnn1d":
        lr = args.lr if args.lr is not None else 0.001
        model = train_cnn1d(
            fm_fit.X, fm_fit.y,
            CNN1DConfig(input_len=input_len, **{**common, "learning_rate": lr}),
            val=(fm_val.X, fm_val.y), feature_kind=kind,
        )
    elif args.model == "lstm":
        lr = args.lr if args.lr is not None else 0.0001
        model = train_lstm(
            fm_fit.X, fm_fit.y,
            LSTMConfig(input_len=input_len, **{**common, "learning_rate": lr}),
            val=(fm_val.X, fm_val.y), feature_kind=kind,
        )
    elif args.model == "rf":
        model = train_rf(
            np.vstack([fm_fit.X, fm_val.X]),
            np.concatenate([fm_fit.y, fm_val.y]),
            RFConfig(n_estimators=args.n_estimators, seed=args.seed),
            feature_kind=kind,
        )
    else:  # pragma: no cover - argparse limits choices
        raise core.ConfigurationError(f"unknown model {args.model!r}")
    model_path = out / "model.json"
    save_model(model, model_path)
    outputs = [model_path]
    if model.history is not None:
        history_path = out / "history.json"
        history_path.write_text(
            json.dumps(model.history.to_dict()) + "\n", encoding="utf-8"
        )
        outputs.append(history_path)
        print(f"best val accuracy: {max(model.history.val_acc):.4f}")
    report = evaluate(model, fm_test.X, fm_test.y, feature_kind=kind)
    print(f"test accuracy: {report.accuracy:.4f}")
    _write_manifest(out, "train", _params(args), [Path(args.data)], outputs)
    return EXIT_OK


def _cmd_eval(args) -> int:
    out = _out_dir(args)
    pcfg = _pipeline_config(args)
    model = load_model(_require_file(args.model_file))
    if args.feature:
        requested = FeatureKind.from_name(args.feature)
        if model.feature_kind is not None and requested != model.feature_kind:
            raise KindMismatchError(
                f"model expects {model.feature_kind.value}, --feature is {requested.value}"
            )
    dataset = core.load_dataset(_require_file(args.data))
    recs = dataset.test_recordings() if args.split == "test" else dataset.train_recordings()
    fm = pipeline.extract_matrix(recs, model.feature_kind, pcfg, on_no_contact=args.on_no_contact)
    report = evaluate(model, fm.X, fm.y, feature_kind=fm.kind)
    report_path = out / "report.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    text_path = out / "report.txt"
    text_path.write_text(report.render_text() + "\n", encoding="utf-8")
    outputs = [report_path, text_path]
    if args.plot:
        plot_path = out / "confusion.png"
        report.plot_confusion(plot_path)
        outputs.append(plot_path)
    print(report.render_text())
    _write_manifest(out, "eval", _params(args), [Path(args.data), Path(args.model_file)], outputs)
    return EXIT_OK


def _cmd_ablate(args) -> int:
    out = _out_dir(args)
    pcfg = _pipeline_config(args)
    dataset = core.load_dataset(_require_file(args.data))
    base = MLPConfig(
        learning_rate=args.lr if args.lr is not None else 0.00025,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.seed,
    )
    results = ablation_run(dataset, pipeline.DEFAULT_FEATURE_ORDER, pcfg, base)
    table = render_ablation_table(results)
    print(table)
    json_path = out / "ablation.json"
    json_path.write_text(
        json.dumps({k.value: r.to_dict() for k, r in results.items()}, indent=2) + "\n",
        encoding="utf-8",
    )
    text_path = out / "ablation.txt"
    text_path.write_text(table + "\n", encoding="utf-8")
    _write_manifest(out, "ablate", _params(args), [Path(args.data)], [json_path, text_path])
    return EXIT_OK


def _cmd_characterize(args) -> int:
    out = _out_dir(args)
    if args.skin == "nominal":
        skin = sensorsim.nominal_skin_model(noise_std=args.noise_std)
    else:
        skin = sensorsim.default_skin_model(seed=args.seed, noise_std=args.noise_std)
    rng = np.random.default_rng(args.seed) if args.noise_std > 0 else None
    report = sensorsim.run_characterization(skin, rng=rng)
    json_path = out / "characterization.json"
    csv_path = out / "characterization.csv"
    report.to_json(json_path)
    report.samples_to_csv(csv_path)
    print(json.dumps(report.summary(), indent=2))
    _write_manifest(out, "characterize", _params(args), [], [json_path, csv_path])
    return EXIT_OK


def _cmd_serve(args) -> int:
    if args.source == "replay":
        dataset = core.load_dataset(_require_file(args.data))
        recordings = dataset.recordings if not dataset.split_assignment else dataset.test_recordings()
        source = ReplaySource(recordings, gap_frames=args.gap_frames, loop=args.loop)
    else:
        source = SynthSource(seed=args.seed, gap_frames=args.gap_frames)
    server = FrameServer(source, host=args.host, port=args.port, rate_hz=args.rate)
    print(f"serving {args.source} frames on {args.host}:{server.port} at {args.rate} Hz")
    server.serve_forever()
    return EXIT_OK


def _cmd_listen(args) -> int:
    model = load_model(_require_file(args.model_file))
    pcfg = _pipeline_config(args)
    sink = sys.stdout if args.out_file is None else Path(args.out_file).open("w", encoding="utf-8")
    try:
        for event in classify_live(
            args.host,
            args.port,
            model,
            pcfg,
            max_events=args.max_events,
            reconnect_attempts=args.reconnect_attempts,
        ):
            sink.write(json.dumps(event) + "\n")
            sink.flush()
    finally:
        if sink is not sys.stdout:
            sink.close()
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def _add_pipeline_flags(p: argparse.ArgumentParser):
    p.add_argument("--threshold", type=int, default=10,
                   help="activation threshold in ADC counts (default 10)")
    p.add_argument("--target-frames", type=int, default=150,
                   help="frames per sample after clipping/padding (default 150)")
    p.add_argument("--smoothing-window", type=int, default=3,
                   help="moving-average window for smoothed features (default 3)")
    p.add_argument("--rate", type=float, default=50.0,
                   help="nominal sample rate in Hz (default 50)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxelkit",
        description="Taxel-grid gesture toolkit: simulate, featurize, train, evaluate, stream.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    p.add_argument("--seed", type=int, required=True, help="generation seed (required)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--train-participants", type=int, default=10)
    p.add_argument("--test-participants", type=int, default=6)
    p.add_argument("--noise-std", type=float, default=1.5,
                   help="sensor noise in ADC counts (default 1.5)")
    p.add_argument("--gesture-params", default=None,
                   help="JSON file overriding per-gesture synthesis ranges")
    p.add_argument("--config", default=None, help="JSON config file (flags win)")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a classifier on extracted features")
    p.add_argument("--data", required=True, help="dataset .jsonl path")
    p.add_argument("--model", choices=["mlp", "lstm", "rf", "cnn1d"], default="mlp")
    p.add_argument("--feature", default="activated-count",
                   help="feature kind (default activated-count)")
    p.add_argument("--seed", type=int, required=True, help="training seed (required)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--lr", type=float, default=None,
                   help="learning rate (defaults: mlp 0.00025, lstm 0.0001, cnn1d 0.001)")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-epochs", type=int, default=300)
    p.add_argument("--patience", type=int, default=20,
                   help="early-stopping patience in epochs (default 20)")
    p.add_argument("--n-estimators", type=int, default=60,
                   help="random-forest tree count (default 60)")
    p.add_argument("--val-fraction", type=float, default=0.8,
                   help="train share of the train/validation split (default 0.8)")
    p.add_argument("--on-no-contact", choices=["raise", "drop"], default="drop")
    p.add_argument("--config", default=None, help="JSON config file (flags win)")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a dataset split")
    p.add_argument("--data", required=True)
    p.add_argument("--model-file", required=True)
    p.add_argument("--feature", default=None,
                   help="optional feature kind; must match the model's tag")
    p.add_argument("--split", choices=["test", "train"], default="test")
    p.add_argument("--out", default="out")
    p.add_argument("--plot", action="store_true", help="also write confusion.png")
    p.add_argument("--on-no-contact", choices=["raise", "drop"], default="drop")
    p.add_argument("--config", default=None, help="JSON config file (flags win)")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("ablate", help="train one MLP per feature kind and compare")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--lr", type=float, default=None, help="MLP learning rate (default 0.00025)")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-epochs", type=int, default=300)
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--config", default=None, help="JSON config file (flags win)")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("characterize", help="simulate the indentation force-range protocol")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.add_argument("--noise-std", type=float, default=0.0,
                   help="sensor noise during characterization (default 0: noise-free)")
    p.add_argument("--skin", choices=["nominal", "jittered"], default="nominal")
    p.add_argument("--config", default=None, help="JSON config file (flags win)")
    p.set_defaults(func=_cmd_characterize)

    p = sub.add_parser("serve", help="stream frames over TCP")
    p.add_argument("--source", choices=["replay", "synth"], default="synth")
    p.add_argument("--data", default=None, help="dataset .jsonl for replay")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7763)
    p.add_argument("--rate", type=float, default=50.0, help="frame rate in Hz (default 50)")
    p.add_argument("--seed", type=int, default=0, help="seed for the synth source")
    p.add_argument("--gap-frames", type=int, default=30,
                   help="idle frames between replayed recordings (default 30)")
    p.add_argument("--loop", action="store_true", help="loop the replay source")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("listen", help="classify a live frame stream")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7763)
    p.add_argument("--model-file", required=True)
    p.add_argument("--out-file", default=None, help="write events here instead of stdout")
    p.add_argument("--max-events", type=int, default=None)
    p.add_argument("--reconnect-attempts", type=int, default=0)
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_listen)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    defaults = {
        a.dest: a.default
        for a in parser._subparsers._group_actions[0].choices[args.command]._actions
    }
    try:
        if hasattr(args, "config"):
            _apply_file_defaults(args, defaults)
        if args.command == "serve" and args.source == "replay" and not args.data:
            raise core.ConfigurationError("replay source needs --data")
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting funnel
        for err_type, code in _EXIT_BY_ERROR:
            if isinstance(exc, err_type):
                _report_error(exc, code)
                return code
        _report_error(exc, EXIT_ERROR)
        return EXIT_ERROR


def _report_error(exc: Exception, code: int) -> None:
    doc = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    print(json.dumps(doc), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
