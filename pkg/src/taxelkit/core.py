"""Domain types for a two-section taxel-grid skin and its gesture datasets.

The skin has an upper-arm section (7 rows x 5 cols) and a lower-arm section
(7 rows x 4 cols), 63 taxels total.  Taxels flatten row-major within a
section, upper section first, so flat indices 0..34 are upper and 35..62
are lower.  Readings are 10-bit ADC counts in [0, 1023].
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

ADC_MAX = 1023


class ConfigurationError(ValueError):
    """Requested counts, fractions or options cannot be satisfied."""


class GestureClass(IntEnum):
    """The six touch gestures the skin is trained to recognize."""

    HIT = 0
    POKE = 1
    GRAB = 2
    RUB = 3
    SHAKE = 4
    TAP = 5

    @classmethod
    def from_label(cls, label: str) -> "GestureClass":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown gesture label {label!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class GridSection:
    section_id: str
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"section {self.section_id!r} needs positive dimensions")

    @property
    def n_taxels(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class SensorLayout:
    """Ordered grid sections plus the row-major flattening rule."""

    sections: tuple[GridSection, ...]

    def __post_init__(self):
        ids = [s.section_id for s in self.sections]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate section ids in layout")

    @classmethod
    def default(cls) -> "SensorLayout":
        return cls((GridSection("upper", 7, 5), GridSection("lower", 7, 4)))

    @property
    def n_taxels(self) -> int:
        return sum(s.n_taxels for s in self.sections)

    @property
    def section_ids(self) -> tuple[str, ...]:
        return tuple(s.section_id for s in self.sections)

    def section(self, section_id: str) -> GridSection:
        for s in self.sections:
            if s.section_id == section_id:
                return s
        raise KeyError(f"no section {section_id!r} in layout (have {self.section_ids})")

    def section_index(self, section_id: str) -> int:
        for i, s in enumerate(self.sections):
            if s.section_id == section_id:
                return i
        raise KeyError(f"no section {section_id!r} in layout (have {self.section_ids})")

    def section_offset(self, section_id: str) -> int:
        off = 0
        for s in self.sections:
            if s.section_id == section_id:
                return off
            off += s.n_taxels
        raise KeyError(f"no section {section_id!r} in layout (have {self.section_ids})")

    def section_slice(self, section_id: str) -> slice:
        off = self.section_offset(section_id)
        return slice(off, off + self.section(section_id).n_taxels)

    def flatten_index(self, section_id: str, row: int, col: int) -> int:
        """Flat taxel index for a (section, row, col) cell, row-major per section."""
        sec = self.section(section_id)
        if not 0 <= row < sec.rows:
            raise IndexError(
                f"row {row} out of range for section {section_id!r} ({sec.rows} rows)"
            )
        if not 0 <= col < sec.cols:
            raise IndexError(
                f"col {col} out of range for section {section_id!r} ({sec.cols} cols)"
            )
        return self.section_offset(section_id) + row * sec.cols + col


DEFAULT_LAYOUT = SensorLayout.default()
N_TAXELS = DEFAULT_LAYOUT.n_taxels  # 63


@dataclass(frozen=True, eq=False)
class TaxelFrame:
    """One time-stamped snapshot of all 63 taxel ADC readings."""

    timestamp: float
    readings: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.readings)
        if arr.ndim != 1 or arr.shape[0] != N_TAXELS:
            raise ValueError(f"expected {N_TAXELS} readings, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.rint(arr)):
                raise ValueError("readings must be integers")
        if arr.size and (arr.min() < 0 or arr.max() > ADC_MAX):
            raise ValueError(f"readings outside [0, {ADC_MAX}]")
        arr = arr.astype(np.int16, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "readings", arr)


@dataclass(frozen=True, eq=False)
class GestureRecording:
    """Ordered frame sequence with label, participant and trial metadata."""

    frames: tuple[TaxelFrame, ...]
    label: GestureClass | None
    participant_id: str
    arm_section: str
    trial_index: int
    sample_rate_hz: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise ValueError("recording has no frames")
        ts = np.array([f.timestamp for f in self.frames])
        if np.any(np.diff(ts) <= 0):
            raise ValueError("frame timestamps must be strictly increasing")
        if self.arm_section not in DEFAULT_LAYOUT.section_ids:
            raise ValueError(
                f"arm_section {self.arm_section!r} not in {DEFAULT_LAYOUT.section_ids}"
            )
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    def timestamps(self) -> np.ndarray:
        return np.array([f.timestamp for f in self.frames])

    def readings_matrix(self) -> np.ndarray:
        """Stack readings as an (n_frames, 63) int16 matrix."""
        return np.stack([f.readings for f in self.frames])

    def with_frames(self, frames: Iterable[TaxelFrame]) -> "GestureRecording":
        return replace(self, frames=tuple(frames))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Recordings plus a participant-wise train/test assignment.

    The assignment may be empty (not yet split).  Once present it must cover
    every participant in the recordings and map each to exactly one side.
    """

    recordings: tuple[GestureRecording, ...]
    split_assignment: dict[str, str]

    def __post_init__(self):
        object.__setattr__(self, "recordings", tuple(self.recordings))
        bad = set(self.split_assignment.values()) - {"train", "test"}
        if bad:
            raise ValueError(f"split values must be 'train' or 'test', got {bad}")
        if self.split_assignment:
            missing = self.participants - set(self.split_assignment)
            if missing:
                raise ValueError(f"participants missing from split: {sorted(missing)}")

    @property
    def participants(self) -> set[str]:
        return {r.participant_id for r in self.recordings}

    def _side(self, side: str) -> tuple[GestureRecording, ...]:
        if not self.split_assignment:
            raise ConfigurationError("dataset has no split assignment yet")
        return tuple(
            r for r in self.recordings if self.split_assignment[r.participant_id] == side
        )

    def train_recordings(self) -> tuple[GestureRecording, ...]:
        return self._side("train")

    def test_recordings(self) -> tuple[GestureRecording, ...]:
        return self._side("test")


def split_by_participant(
    dataset: Dataset, train_participants: int, test_participants: int, seed: int
) -> Dataset:
    """Assign whole participants to train or test, deterministically per seed.

    Participants not drawn into either side (when train+test is less than the
    number of distinct participants) are dropped from the returned dataset so
    the assignment always covers every remaining recording.
    """
    participants = sorted(dataset.participants)
    if train_participants + test_participants > len(participants):
        raise ConfigurationError(
            f"need {train_participants + test_participants} participants, "
            f"dataset has {len(participants)}"
        )
    if train_participants < 1 or test_participants < 1:
        raise ConfigurationError("both splits need at least one participant")
    rng = np.random.default_rng(seed)
    order = [participants[i] for i in rng.permutation(len(participants))]
    assignment = {p: "train" for p in order[:train_participants]}
    assignment.update(
        {p: "test" for p in order[train_participants : train_participants + test_participants]}
    )
    kept = tuple(r for r in dataset.recordings if r.participant_id in assignment)
    result = Dataset(kept, assignment)
    for side, count in sorted(split_summary(result).items()):
        logger.info("split %s: %s", side, count)
    return result


def split_summary(dataset: Dataset) -> dict[str, dict[str, int]]:
    """Per-split, per-class recording counts."""
    out: dict[str, dict[str, int]] = {}
    for rec in dataset.recordings:
        side = dataset.split_assignment.get(rec.participant_id, "unassigned")
        label = rec.label.label if rec.label is not None else "unlabeled"
        out.setdefault(side, {}).setdefault(label, 0)
        out[side][label] += 1
    return out


def stratified_split_indices(
    labels: np.ndarray, fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Split index range stratified by label; first side gets `fraction`.

    Every class keeps at least one sample on each side.  Classes with fewer
    than two samples cannot be stratified.
    """
    if not 0.0 < fraction < 1.0:
        raise ConfigurationError(f"fraction must be in (0, 1), got {fraction}")
    labels = np.asarray(labels)
    first, second = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < 2:
            raise ConfigurationError(
                f"class {cls} has {idx.size} sample(s); stratified split needs >= 2"
            )
        # half-up rounding, clamped so both sides stay non-empty
        n_first = int(np.floor(fraction * idx.size + 0.5))
        n_first = min(max(n_first, 1), idx.size - 1)
        shuffled = idx[rng.permutation(idx.size)]
        first.append(shuffled[:n_first])
        second.append(shuffled[n_first:])
    return (
        np.sort(np.concatenate(first)),
        np.sort(np.concatenate(second)),
    )


def train_val_split(
    recordings: Sequence[GestureRecording], fraction: float, seed: int
) -> tuple[tuple[GestureRecording, ...], tuple[GestureRecording, ...]]:
    """Stratified split of labeled recordings into (train, validation)."""
    if any(r.label is None for r in recordings):
        raise ConfigurationError("cannot stratify unlabeled recordings")
    labels = np.array([int(r.label) for r in recordings])
    rng = np.random.default_rng(seed)
    tr_idx, val_idx = stratified_split_indices(labels, fraction, rng)
    return (
        tuple(recordings[i] for i in tr_idx),
        tuple(recordings[i] for i in val_idx),
    )


# --- line-delimited JSON dataset files -------------------------------------


def recording_to_dict(rec: GestureRecording) -> dict:
    return {
        "label": rec.label.label if rec.label is not None else None,
        "participant_id": rec.participant_id,
        "arm_section": rec.arm_section,
        "trial_index": int(rec.trial_index),
        "sample_rate_hz": float(rec.sample_rate_hz),
        "frames": [
            {"timestamp": float(f.timestamp), "readings": [int(v) for v in f.readings]}
            for f in rec.frames
        ],
    }


def recording_from_dict(doc: dict) -> GestureRecording:
    frames = tuple(
        TaxelFrame(float(f["timestamp"]), np.array(f["readings"], dtype=np.int16))
        for f in doc["frames"]
    )
    label = doc.get("label")
    return GestureRecording(
        frames=frames,
        label=GestureClass.from_label(label) if label is not None else None,
        participant_id=doc["participant_id"],
        arm_section=doc["arm_section"],
        trial_index=int(doc["trial_index"]),
        sample_rate_hz=float(doc.get("sample_rate_hz", 50.0)),
    )


def default_manifest_path(recordings_path: Path | str) -> Path:
    p = Path(recordings_path)
    return p.with_name(p.stem + ".manifest.json")


def save_dataset(
    dataset: Dataset,
    recordings_path: Path | str,
    manifest_path: Path | str | None = None,
) -> None:
    """Write recordings as line-delimited JSON plus a participant-split manifest."""
    recordings_path = Path(recordings_path)
    with recordings_path.open("w", encoding="utf-8") as fh:
        for rec in dataset.recordings:
            fh.write(json.dumps(recording_to_dict(rec), separators=(",", ":")))
            fh.write("\n")
    if dataset.split_assignment:
        mpath = Path(manifest_path) if manifest_path else default_manifest_path(recordings_path)
        mpath.write_text(
            json.dumps(dict(sorted(dataset.split_assignment.items())), indent=2) + "\n",
            encoding="utf-8",
        )


def load_dataset(
    recordings_path: Path | str, manifest_path: Path | str | None = None
) -> Dataset:
    """Read a line-delimited JSON dataset; split manifest is optional."""
    recordings_path = Path(recordings_path)
    recordings = []
    with recordings_path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                recordings.append(recording_from_dict(json.loads(line)))
    mpath = Path(manifest_path) if manifest_path else default_manifest_path(recordings_path)
    assignment: dict[str, str] = {}
    if mpath.exists():
        assignment = json.loads(mpath.read_text(encoding="utf-8"))
    return Dataset(tuple(recordings), assignment)
