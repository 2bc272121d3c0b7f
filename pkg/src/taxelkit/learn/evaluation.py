"""Confusion-matrix evaluation and the per-feature ablation protocol."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..core import Dataset, GestureClass, train_val_split
from ..pipeline import (
    DEFAULT_FEATURE_ORDER,
    DEFAULT_PIPELINE_CONFIG,
    FeatureKind,
    PipelineConfig,
    extract_matrix,
    feature_length,
)
from .nets import MLPConfig, TrainedModel, train_mlp

logger = logging.getLogger(__name__)


class KindMismatchError(ValueError):
    """Model and features disagree on the feature kind."""


class AblationError(RuntimeError):
    def __init__(self, feature_kind: FeatureKind, message: str):
        super().__init__(message)
        self.feature_kind = feature_kind


@dataclass(eq=False)
class EvalReport:
    """Accuracy, 6x6 confusion counts (rows true / cols predicted), per-class P/R."""

    accuracy: float
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "n_samples": self.n_samples,
            "confusion": self.confusion.astype(int).tolist(),
            "precision": [float(v) for v in self.precision],
            "recall": [float(v) for v in self.recall],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        return cls(
            accuracy=float(doc["accuracy"]),
            confusion=np.asarray(doc["confusion"], dtype=np.int64),
            precision=np.asarray(doc["precision"], dtype=np.float64),
            recall=np.asarray(doc["recall"], dtype=np.float64),
            n_samples=int(doc["n_samples"]),
        )

    def render_text(self, class_names: Sequence[str] | None = None) -> str:
        n = self.confusion.shape[0]
        names = list(class_names) if class_names else [c.label for c in GestureClass][:n]
        width = max(7, max(len(s) for s in names) + 1)
        lines = [f"accuracy: {self.accuracy:.4f} ({self.n_samples} samples)"]
        header = " " * width + "".join(f"{s:>{width}}" for s in names)
        lines.append(header + f"{'recall':>{width}}")
        for i, name in enumerate(names):
            row = "".join(f"{int(v):>{width}}" for v in self.confusion[i])
            lines.append(f"{name:<{width}}" + row + f"{self.recall[i]:>{width}.3f}")
        prec = "".join(f"{v:>{width}.3f}" for v in self.precision)
        lines.append(f"{'precision':<{width}}" + prec)
        return "\n".join(lines)

    def plot_confusion(self, path: Path | str, class_names: Sequence[str] | None = None) -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        n = self.confusion.shape[0]
        names = list(class_names) if class_names else [c.label for c in GestureClass][:n]
        fig, ax = plt.subplots(figsize=(5.2, 4.6))
        im = ax.imshow(self.confusion, cmap="Blues")
        ax.set_xticks(range(n), names, rotation=45, ha="right")
        ax.set_yticks(range(n), names)
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        for i in range(n):
            for j in range(n):
                ax.text(j, i, str(int(self.confusion[i, j])), ha="center", va="center",
                        color="white" if self.confusion[i, j] > self.confusion.max() / 2 else "black")
        fig.colorbar(im)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)


def evaluate(
    model: TrainedModel,
    X: np.ndarray,
    y: np.ndarray,
    feature_kind: FeatureKind | None = None,
) -> EvalReport:
    """Score predictions against labels; accuracy is exactly trace/total."""
    if (
        feature_kind is not None
        and model.feature_kind is not None
        and feature_kind != model.feature_kind
    ):
        raise KindMismatchError(
            f"model expects {model.feature_kind.value}, features are {feature_kind.value}"
        )
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n_classes = model.n_classes
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError(f"labels outside [0, {n_classes})")
    preds = model.predict(X)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (y, preds), 1)
    total = int(confusion.sum())
    accuracy = float(np.trace(confusion)) / total
    col = confusion.sum(axis=0)
    row = confusion.sum(axis=1)
    diag = np.diag(confusion)
    precision = np.divide(diag, col, out=np.zeros(n_classes), where=col > 0)
    recall = np.divide(diag, row, out=np.zeros(n_classes), where=row > 0)
    return EvalReport(accuracy, confusion, precision, recall, total)


def ablation_run(
    dataset: Dataset,
    feature_kinds: Sequence[FeatureKind] = DEFAULT_FEATURE_ORDER,
    pipeline_config: PipelineConfig = DEFAULT_PIPELINE_CONFIG,
    base_config: MLPConfig | None = None,
    val_fraction: float = 0.8,
) -> dict[FeatureKind, EvalReport]:
    """Train one MLP per feature kind under an identical protocol and compare.

    The split, seed and hyperparameters are shared across kinds; only the
    input width follows the feature length.  Training failures propagate
    tagged with the offending kind.
    """
    base = base_config or MLPConfig()
    train_recs = dataset.train_recordings()
    test_recs = dataset.test_recordings()
    fit_recs, val_recs = train_val_split(train_recs, val_fraction, base.seed)
    results: dict[FeatureKind, EvalReport] = {}
    for kind in feature_kinds:
        try:
            fm_fit = extract_matrix(fit_recs, kind, pipeline_config)
            fm_val = extract_matrix(val_recs, kind, pipeline_config)
            fm_test = extract_matrix(test_recs, kind, pipeline_config)
            config = replace(base, input_dim=feature_length(kind, pipeline_config))
            model = train_mlp(
                fm_fit.X, fm_fit.y, config, val=(fm_val.X, fm_val.y), feature_kind=kind
            )
            results[kind] = evaluate(model, fm_test.X, fm_test.y, feature_kind=kind)
        except Exception as exc:
            raise AblationError(kind, f"run failed for feature '{kind.value}': {exc}") from exc
        logger.info("ablation %s: accuracy %.4f", kind.value, results[kind].accuracy)
    return results


def render_ablation_table(results: dict[FeatureKind, EvalReport]) -> str:
    lines = [f"{'feature':<24}{'accuracy':>10}"]
    for kind, report in results.items():
        lines.append(f"{kind.value:<24}{report.accuracy:>10.4f}")
    return "\n".join(lines)
