"""Versioned JSON model files: config + base64 parameter arrays.

Arrays are dumped as raw little-endian bytes so a save/load round trip is
bit-exact and two identical training runs produce byte-identical files
(zip-based containers would embed timestamps).
"""

from __future__ import annotations

import base64
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..pipeline import FeatureKind
from .forest import RandomForest, RFConfig
from .nets import (
    CNN1DConfig,
    CNN1DNet,
    LSTMConfig,
    LSTMNet,
    MLPConfig,
    MLPNet,
    TrainedModel,
    TrainingHistory,
)

FORMAT_NAME = "taxelkit-model"
FORMAT_VERSION = 1

_CONFIG_TYPES = {"mlp": MLPConfig, "cnn1d": CNN1DConfig, "lstm": LSTMConfig, "rf": RFConfig}
_NET_TYPES = {"mlp": MLPNet, "cnn1d": CNN1DNet, "lstm": LSTMNet}


def _encode_array(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr)
    return {
        "dtype": arr.dtype.str,
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def _decode_array(doc: dict) -> np.ndarray:
    raw = base64.b64decode(doc["data"])
    return np.frombuffer(raw, dtype=np.dtype(doc["dtype"])).reshape(doc["shape"]).copy()


def _config_to_dict(config) -> dict:
    doc = asdict(config)
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in doc.items()}


def _config_from_dict(kind: str, doc: dict):
    cls = _CONFIG_TYPES[kind]
    fields = {f: doc[f] for f in doc}
    for key, value in fields.items():
        if isinstance(value, list):
            fields[key] = tuple(value)
    return cls(**fields)


def save_model(model: TrainedModel, path: Path | str) -> None:
    arrays = model.net.state_arrays()
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": model.kind,
        "feature_kind": model.feature_kind.value if model.feature_kind else None,
        "config": _config_to_dict(model.config),
        "history": model.history.to_dict() if model.history else None,
        "n_classes": model.n_classes,
        "arrays": {name: _encode_array(arr) for name, arr in sorted(arrays.items())},
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")


def load_model(path: Path | str) -> TrainedModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"{path} is not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')}")
    kind = doc["kind"]
    config = _config_from_dict(kind, doc["config"])
    arrays = {name: _decode_array(a) for name, a in doc["arrays"].items()}
    if kind == "rf":
        net = RandomForest(config, n_classes=int(doc["n_classes"]))
        net.load_state_arrays(arrays)
    else:
        net = _NET_TYPES[kind](config, np.random.default_rng(0))
        net.load_state_arrays(arrays)
    history = TrainingHistory.from_dict(doc["history"]) if doc.get("history") else None
    feature_kind = (
        FeatureKind.from_name(doc["feature_kind"]) if doc.get("feature_kind") else None
    )
    return TrainedModel(kind, feature_kind, net, config, history)
