"""Preprocessing chain and feature extractors for taxel-grid recordings.

The preprocessing order is fixed: trim frames before first contact, then
normalize to a fixed frame count (clip the tail / zero-pad), then, for the
per-taxel statistics, smooth each taxel series with a centered moving
average.  The activated-count feature intentionally skips smoothing and
works on raw counts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import N_TAXELS, GestureRecording, TaxelFrame


class NoContactError(RuntimeError):
    """No frame in the recording ever exceeds the activation threshold."""


class FeatureKind(Enum):
    ACTIVATED_COUNT = "activated_count"
    MAX_TAXEL_TRACE = "max_taxel_trace"
    PRINCIPAL_FREQUENCY = "principal_frequency"
    TAXEL_MEAN = "taxel_mean"
    TAXEL_STD = "taxel_std"

    @classmethod
    def from_name(cls, name: str) -> "FeatureKind":
        key = name.strip().lower().replace("-", "_")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown feature kind {name!r}")


# order used for ablation comparisons: main feature first, then the four extras
DEFAULT_FEATURE_ORDER = (
    FeatureKind.ACTIVATED_COUNT,
    FeatureKind.MAX_TAXEL_TRACE,
    FeatureKind.PRINCIPAL_FREQUENCY,
    FeatureKind.TAXEL_MEAN,
    FeatureKind.TAXEL_STD,
)

_TEMPORAL_KINDS = {FeatureKind.ACTIVATED_COUNT, FeatureKind.MAX_TAXEL_TRACE}


@dataclass(frozen=True)
class PipelineConfig:
    activation_threshold: int = 10
    target_frames: int = 150
    smoothing_window: int = 3
    sample_rate_hz: float = 50.0

    def __post_init__(self):
        if self.activation_threshold < 0:
            raise ValueError("activation_threshold must be >= 0")
        if self.target_frames < 1:
            raise ValueError("target_frames must be >= 1")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ValueError("smoothing_window must be odd and >= 1")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")


DEFAULT_PIPELINE_CONFIG = PipelineConfig()


def feature_length(kind: FeatureKind, config: PipelineConfig = DEFAULT_PIPELINE_CONFIG) -> int:
    """150 values for the temporal features, 63 for the per-taxel ones."""
    return config.target_frames if kind in _TEMPORAL_KINDS else N_TAXELS


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """A tagged fixed-length numeric vector produced by one extractor."""

    kind: FeatureKind
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("feature values must be 1-D")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature values must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Batch of feature vectors with labels and participant tags."""

    kind: FeatureKind
    X: np.ndarray
    y: np.ndarray | None
    participants: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be 2-D")
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = np.asarray(self.y, dtype=np.int64)
            if y.shape[0] != X.shape[0]:
                raise ValueError("labels do not match sample count")
            object.__setattr__(self, "y", y)
        if len(self.participants) != X.shape[0]:
            raise ValueError("participant tags do not match sample count")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]


# --- preprocessing ----------------------------------------------------------


def trim_precontact(
    recording: GestureRecording, config: PipelineConfig = DEFAULT_PIPELINE_CONFIG
) -> GestureRecording:
    """Drop frames recorded before the first contact.

    Contact means at least one taxel reading strictly above the activation
    threshold.  Raises NoContactError when nothing ever crosses it.
    """
    mat = recording.readings_matrix()
    active = np.flatnonzero((mat > config.activation_threshold).any(axis=1))
    if active.size == 0:
        raise NoContactError(
            f"no reading above {config.activation_threshold} in "
            f"{recording.n_frames} frames"
        )
    start = int(active[0])
    if start == 0:
        return recording
    return recording.with_frames(recording.frames[start:])


def smooth_taxel(series: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window shrinks near the ends."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be odd and >= 1")
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    return _smooth_columns(x.reshape(-1, 1), window)[:, 0]


def _smooth_columns(mat: np.ndarray, window: int) -> np.ndarray:
    """Moving average down axis 0 for every column, shrinking at the edges."""
    n = mat.shape[0]
    half = window // 2
    csum = np.vstack([np.zeros((1, mat.shape[1])), np.cumsum(mat, axis=0)])
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)[:, None]


def fix_length(
    recording: GestureRecording, config: PipelineConfig = DEFAULT_PIPELINE_CONFIG
) -> GestureRecording:
    """Clip or zero-pad the recording to exactly `target_frames` frames.

    Long recordings keep their first frames (the gesture onset carries the
    signature).  Padding frames are all-zero with timestamps continuing at
    the recording's nominal sample period.
    """
    target = config.target_frames
    frames = recording.frames
    if len(frames) == target:
        return recording
    if len(frames) > target:
        return recording.with_frames(frames[:target])
    period = 1.0 / recording.sample_rate_hz
    last_ts = frames[-1].timestamp
    zeros = np.zeros(N_TAXELS, dtype=np.int16)
    pad = [
        TaxelFrame(last_ts + period * (k + 1), zeros)
        for k in range(target - len(frames))
    ]
    return recording.with_frames(list(frames) + pad)


def _prepared_matrix(
    recording: GestureRecording, config: PipelineConfig, smooth: bool
) -> np.ndarray:
    """trim -> fix_length -> float matrix, optionally smoothed per taxel."""
    fixed = fix_length(trim_precontact(recording, config), config)
    mat = fixed.readings_matrix().astype(np.float64)
    if smooth:
        mat = _smooth_columns(mat, config.smoothing_window)
    return mat


# --- extractors -------------------------------------------------------------


def feature_activated_count(
    recording: GestureRecording, config: PipelineConfig = DEFAULT_PIPELINE_CONFIG
) -> FeatureVector:
    """Per-frame count of taxels reading strictly above the threshold."""
    mat = _prepared_matrix(recording, config, smooth=False)
    counts = (mat > config.activation_threshold).sum(axis=1)
    return FeatureVector(FeatureKind.ACTIVATED_COUNT, counts.astype(np.float64))


def feature_max_taxel_trace(
    recording: GestureRecording, config: PipelineConfig = DEFAULT_PIPELINE_CONFIG
) -> FeatureVector:
    """Smoothed per-frame trace of the taxel with the highest mean reading.

    The taxel is chosen on the trimmed recording before length normalization;
    ties go to the lowest flat index.
    """
    trimmed = trim_precontact(recording, config)
    means = trimmed.readings_matrix().astype(np.float64).mean(axis=0)
    taxel = int(np.argmax(means))
    fixed = fix_length(trimmed, config)
    series = fixed.readings_matrix()[:, taxel].astype(np.float64)
    return FeatureVector(
        FeatureKind.MAX_TAXEL_TRACE, smooth_taxel(series, config.smoothing_window)
    )


def feature_principal_frequency(
    recording: GestureRecording, config: PipelineConfig = DEFAULT_PIPELINE_CONFIG
) -> FeatureVector:
    """Dominant non-DC frequency (Hz) of each taxel's min-subtracted series.

    The spectrum is the exact-length DFT of the prepared series, searched
    over the one-sided bins excluding DC and Nyquist; ties go to the lowest
    bin.  A constant taxel reports 0 Hz.
    """
    mat = _prepared_matrix(recording, config, smooth=True)
    n = mat.shape[0]
    rate = recording.sample_rate_hz
    shifted = mat - mat.min(axis=0, keepdims=True)
    mags = np.abs(np.fft.rfft(shifted, axis=0))
    hi = (n + 1) // 2  # last bin before Nyquist for even n, before wrap for odd
    search = mags[1:hi]
    bins = np.argmax(search, axis=0) + 1
    freqs = bins * (rate / n)
    constant = np.ptp(mat, axis=0) == 0
    freqs = np.where(constant, 0.0, freqs)
    return FeatureVector(FeatureKind.PRINCIPAL_FREQUENCY, freqs)


def feature_taxel_mean(
    recording: GestureRecording, config: PipelineConfig = DEFAULT_PIPELINE_CONFIG
) -> FeatureVector:
    mat = _prepared_matrix(recording, config, smooth=True)
    return FeatureVector(FeatureKind.TAXEL_MEAN, mat.mean(axis=0))


def feature_taxel_std(
    recording: GestureRecording, config: PipelineConfig = DEFAULT_PIPELINE_CONFIG
) -> FeatureVector:
    # population std (divisor N)
    mat = _prepared_matrix(recording, config, smooth=True)
    return FeatureVector(FeatureKind.TAXEL_STD, mat.std(axis=0))


_EXTRACTORS: dict[FeatureKind, Callable[[GestureRecording, PipelineConfig], FeatureVector]] = {
    FeatureKind.ACTIVATED_COUNT: feature_activated_count,
    FeatureKind.MAX_TAXEL_TRACE: feature_max_taxel_trace,
    FeatureKind.PRINCIPAL_FREQUENCY: feature_principal_frequency,
    FeatureKind.TAXEL_MEAN: feature_taxel_mean,
    FeatureKind.TAXEL_STD: feature_taxel_std,
}


def extract_feature(
    recording: GestureRecording,
    kind: FeatureKind,
    config: PipelineConfig = DEFAULT_PIPELINE_CONFIG,
) -> FeatureVector:
    return _EXTRACTORS[kind](recording, config)


def extract_matrix(
    recordings: Sequence[GestureRecording],
    kind: FeatureKind,
    config: PipelineConfig = DEFAULT_PIPELINE_CONFIG,
    on_no_contact: str = "raise",
) -> FeatureMatrix:
    """Extract one feature kind for a batch of recordings.

    `on_no_contact` is either "raise" or "drop"; dropped recordings are
    silently excluded (the caller can compare sample counts).
    """
    if on_no_contact not in ("raise", "drop"):
        raise ValueError("on_no_contact must be 'raise' or 'drop'")
    rows, labels, participants = [], [], []
    for rec in recordings:
        try:
            vec = extract_feature(rec, kind, config)
        except NoContactError:
            if on_no_contact == "drop":
                continue
            raise
        rows.append(vec.values)
        labels.append(int(rec.label) if rec.label is not None else -1)
        participants.append(rec.participant_id)
    if not rows:
        raise NoContactError("no recordings with contact to extract from")
    y = np.array(labels)
    return FeatureMatrix(
        kind=kind,
        X=np.stack(rows),
        y=None if (y < 0).any() else y,
        participants=tuple(participants),
    )


def features_to_csv(matrix: FeatureMatrix, path: Path | str) -> None:
    """One row per sample: participant, label, kind, then the values."""
    from .core import GestureClass

    path = Path(path)
    width = matrix.X.shape[1]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["participant", "label", "kind"] + [f"v{i:03d}" for i in range(width)]
        )
        for i in range(matrix.n_samples):
            label = (
                GestureClass(int(matrix.y[i])).label if matrix.y is not None else ""
            )
            writer.writerow(
                [matrix.participants[i], label, matrix.kind.value]
                + [repr(float(v)) for v in matrix.X[i]]
            )
