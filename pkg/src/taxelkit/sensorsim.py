"""Resistive taxel physics, six-gesture synthesis, dataset builder, and the
indentation characterization harness.

The force response of a taxel is a thresholded sub-linear rise to a plateau:
reading = clamp(gain * (force - min_force)^nonlinearity, 0, plateau), with
optional additive Gaussian noise, clamped to the 10-bit ADC range.  Section
nominals put the upper-arm detection floor at 1.15 N and the lower-arm floor
at 1.975 N with saturation near 13.95 N; per-taxel jitter models the
response inconsistency of knitted sensors.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import (
    ADC_MAX,
    DEFAULT_LAYOUT,
    Dataset,
    GestureClass,
    GestureRecording,
    SensorLayout,
    TaxelFrame,
)

logger = logging.getLogger(__name__)

SECTION_MIN_FORCE = {"upper": 1.15, "lower": 1.975}
SECTION_SAT_FORCE = {"upper": 13.95, "lower": 13.95}
NOMINAL_GAIN = 95.0
NOMINAL_NONLINEARITY = 0.8
FORCE_CAP = 2.0 * max(SECTION_SAT_FORCE.values())


@dataclass(frozen=True)
class TaxelModel:
    """Force-to-reading response parameters for one taxel."""

    min_force: float
    sat_force: float
    gain: float
    noise_std: float
    nonlinearity: float

    def __post_init__(self):
        if not 0 < self.min_force < self.sat_force:
            raise ValueError("need 0 < min_force < sat_force")
        if self.gain <= 0 or self.nonlinearity <= 0 or self.noise_std < 0:
            raise ValueError("gain/nonlinearity must be positive, noise_std >= 0")

    @property
    def plateau(self) -> float:
        level = self.gain * (self.sat_force - self.min_force) ** self.nonlinearity
        return min(level, float(ADC_MAX))

    def detection_force(self, threshold: int = 10) -> float:
        """Smallest force whose noise-free reading exceeds `threshold` counts.

        Readings are rounded to integer counts, so the level must reach
        threshold + 0.5 before the reported reading crosses the threshold.
        """
        return self.min_force + ((threshold + 0.5) / self.gain) ** (1.0 / self.nonlinearity)


def reading_from_force(
    model: TaxelModel, force: float, rng: np.random.Generator | None = None
) -> int:
    """ADC count for one applied force; noise only when an rng is given."""
    if force < 0:
        raise ValueError("force must be >= 0")
    if force <= model.min_force:
        level = 0.0
    else:
        level = min(
            model.gain * (force - model.min_force) ** model.nonlinearity, model.plateau
        )
    if rng is not None and model.noise_std > 0:
        level += rng.normal(0.0, model.noise_std)
    return int(np.clip(np.rint(level), 0, ADC_MAX))


def readings_from_forces(
    model: TaxelModel, forces: np.ndarray, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Vectorized reading_from_force for one taxel over a force array."""
    forces = np.asarray(forces, dtype=np.float64)
    over = np.maximum(forces - model.min_force, 0.0)
    level = np.minimum(model.gain * over**model.nonlinearity, model.plateau)
    level[forces <= model.min_force] = 0.0
    if rng is not None and model.noise_std > 0:
        level = level + rng.normal(0.0, model.noise_std, forces.shape)
    return np.clip(np.rint(level), 0, ADC_MAX).astype(np.int16)


class SkinModel:
    """Per-taxel response models for a whole layout, vector-ready."""

    def __init__(self, layout: SensorLayout, taxels: Sequence[TaxelModel]):
        if len(taxels) != layout.n_taxels:
            raise ValueError(f"need {layout.n_taxels} taxel models, got {len(taxels)}")
        self.layout = layout
        self.taxels = tuple(taxels)
        self._min = np.array([t.min_force for t in taxels])
        self._gain = np.array([t.gain for t in taxels])
        self._nl = np.array([t.nonlinearity for t in taxels])
        self._plateau = np.array([t.plateau for t in taxels])
        self._noise = np.array([t.noise_std for t in taxels])

    def readings(self, forces: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        """Convert an (..., n_taxels) force array to int16 ADC counts."""
        forces = np.asarray(forces, dtype=np.float64)
        over = np.maximum(forces - self._min, 0.0)
        level = np.minimum(self._gain * over**self._nl, self._plateau)
        level[forces <= self._min] = 0.0
        if rng is not None and self._noise.any():
            level = level + rng.normal(0.0, 1.0, forces.shape) * self._noise
        return np.clip(np.rint(level), 0, ADC_MAX).astype(np.int16)


def nominal_skin_model(
    layout: SensorLayout = DEFAULT_LAYOUT, noise_std: float = 0.0
) -> SkinModel:
    """Uniform skin with exact section nominals; handy for calibration tests."""
    taxels = []
    for section in layout.sections:
        model = TaxelModel(
            min_force=SECTION_MIN_FORCE[section.section_id],
            sat_force=SECTION_SAT_FORCE[section.section_id],
            gain=NOMINAL_GAIN,
            noise_std=noise_std,
            nonlinearity=NOMINAL_NONLINEARITY,
        )
        taxels.extend([model] * section.n_taxels)
    return SkinModel(layout, taxels)


def default_skin_model(
    layout: SensorLayout = DEFAULT_LAYOUT,
    seed: int | np.random.SeedSequence = 0,
    noise_std: float = 1.5,
) -> SkinModel:
    """Jittered skin: per-taxel spread around the section nominals.

    min_force stays below 2.3 N and gain within +-30% of nominal so every
    default gesture remains detectable on its weakest taxel.
    """
    rng = np.random.default_rng(seed)
    taxels = []
    for section in layout.sections:
        base_min = SECTION_MIN_FORCE[section.section_id]
        base_sat = SECTION_SAT_FORCE[section.section_id]
        for _ in range(section.n_taxels):
            taxels.append(
                TaxelModel(
                    min_force=float(np.clip(rng.normal(base_min, 0.15), 0.5, 2.3)),
                    sat_force=float(np.clip(rng.normal(base_sat, 0.8), 11.0, 16.0)),
                    gain=float(NOMINAL_GAIN * rng.uniform(0.7, 1.3)),
                    noise_std=noise_std,
                    nonlinearity=float(rng.uniform(0.7, 0.9)),
                )
            )
    return SkinModel(layout, taxels)


# --- gesture synthesis -------------------------------------------------------


@dataclass(frozen=True)
class GestureProfile:
    """Sampling ranges for one gesture class.

    motion: "static" footprint, "oscillating" force on a static footprint,
    or "translating" footprint sweeping across columns.  Multi-burst
    gestures repeat `repetitions` strikes separated by `gap_range` idle time.
    """

    duration_range: tuple[float, float]
    footprint_range: tuple[int, int]
    peak_force_range: tuple[float, float]
    repetitions: tuple[int, int] = (1, 1)
    motion: str = "static"
    burst_duration_range: tuple[float, float] | None = None
    gap_range: tuple[float, float] = (0.15, 0.35)
    attack_frames: int = 1
    oscillation_hz_range: tuple[float, float] | None = None
    row_elongated: bool = False

    def __post_init__(self):
        if self.duration_range[0] <= 0:
            raise ValueError("durations must be positive")
        lo, hi = self.footprint_range
        if not 1 <= lo <= hi <= 63:
            raise ValueError("footprint sizes must lie in [1, 63]")
        flo, fhi = self.peak_force_range
        if not 0 <= flo <= fhi <= FORCE_CAP:
            raise ValueError(f"peak forces must lie in [0, {FORCE_CAP}]")
        if self.motion not in ("static", "oscillating", "translating"):
            raise ValueError(f"unknown motion model {self.motion!r}")

    def scaled(self, force_scale: float, tempo_scale: float) -> "GestureProfile":
        """Participant style: multiply forces and stretch durations."""
        flo, fhi = self.peak_force_range
        dlo, dhi = self.duration_range
        burst = self.burst_duration_range
        return replace(
            self,
            peak_force_range=(min(flo * force_scale, FORCE_CAP), min(fhi * force_scale, FORCE_CAP)),
            duration_range=(dlo * tempo_scale, dhi * tempo_scale),
            burst_duration_range=(
                (burst[0] * tempo_scale, burst[1] * tempo_scale) if burst else None
            ),
        )


DEFAULT_GESTURE_PROFILES: dict[GestureClass, GestureProfile] = {
    GestureClass.HIT: GestureProfile(
        duration_range=(0.16, 0.4),
        footprint_range=(4, 9),
        peak_force_range=(8.0, 14.0),
    ),
    GestureClass.POKE: GestureProfile(
        duration_range=(0.14, 0.5),
        footprint_range=(1, 2),
        peak_force_range=(3.2, 6.0),
    ),
    GestureClass.GRAB: GestureProfile(
        duration_range=(1.5, 3.0),
        footprint_range=(8, 16),
        peak_force_range=(4.5, 9.0),
        attack_frames=7,
        row_elongated=True,
    ),
    GestureClass.RUB: GestureProfile(
        duration_range=(4.4, 6.0),
        footprint_range=(3, 6),
        peak_force_range=(3.5, 7.0),
        motion="translating",
        attack_frames=5,
    ),
    GestureClass.SHAKE: GestureProfile(
        duration_range=(1.0, 3.0),
        footprint_range=(8, 16),
        peak_force_range=(4.5, 10.0),
        motion="oscillating",
        attack_frames=5,
        oscillation_hz_range=(3.0, 6.0),
        row_elongated=True,
    ),
    GestureClass.TAP: GestureProfile(
        duration_range=(0.1, 0.2),  # per burst
        footprint_range=(1, 4),
        peak_force_range=(3.4, 4.6),
        repetitions=(2, 5),
    ),
}


def profiles_from_json(source: Path | str | dict) -> dict[GestureClass, GestureProfile]:
    """Merge per-class overrides (JSON file or dict) into the defaults."""
    if isinstance(source, (str, Path)):
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        doc = source
    profiles = dict(DEFAULT_GESTURE_PROFILES)
    for label, fields in doc.items():
        gesture = GestureClass.from_label(label)
        clean = {
            k: tuple(v) if isinstance(v, list) else v for k, v in fields.items()
        }
        profiles[gesture] = replace(profiles[gesture], **clean)
    return profiles


def _trapezoid(n: int, attack: int) -> np.ndarray:
    """Envelope rising over `attack` frames, holding at 1, mirrored decay."""
    i = np.arange(n, dtype=np.float64)
    ramp_up = (i + 1.0) / (attack + 1.0)
    ramp_down = (n - i) / (attack + 1.0)
    return np.minimum(1.0, np.minimum(ramp_up, ramp_down))


def _footprint_cells(
    rng: np.random.Generator, rows: int, cols: int, size: int, row_elongated: bool,
    center: tuple[int, int] | None = None,
) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Contiguous blob of `size` cells around a (possibly random) center.

    Cells are ranked by a chebyshev-style distance; stretching the column
    term makes the blob span rows first, like a hand wrapping the arm.
    """
    size = min(size, rows * cols)
    if center is None:
        center = (int(rng.integers(0, rows)), int(rng.integers(0, cols)))
    r0, c0 = center
    col_weight = 1.9 if row_elongated else 1.0
    ranked = sorted(
        ((max(abs(r - r0), col_weight * abs(c - c0)), r, c)
         for r in range(rows) for c in range(cols)),
        key=lambda t: (t[0], t[1], t[2]),
    )
    cells = [(r, c) for _, r, c in ranked[:size]]
    dist = np.array([max(abs(r - r0), abs(c - c0)) for r, c in cells], dtype=np.float64)
    weights = 1.0 / (1.0 + dist)
    return cells, weights


def _paint(
    forces: np.ndarray,
    layout: SensorLayout,
    section_id: str,
    cells: Iterable[tuple[int, int]],
    weights: np.ndarray,
    envelope: np.ndarray,
    start: int,
) -> None:
    idx = [layout.flatten_index(section_id, r, c) for r, c in cells]
    span = slice(start, start + envelope.shape[0])
    forces[span, idx] = np.maximum(
        forces[span, idx], envelope[:, None] * weights[None, :]
    )


def synthesize_gesture(
    gesture: GestureClass,
    layout: SensorLayout = DEFAULT_LAYOUT,
    profile: GestureProfile | None = None,
    arm_section: str = "upper",
    seed: int | np.random.SeedSequence = 0,
    skin: SkinModel | None = None,
    participant_id: str = "sim",
    trial_index: int = 0,
) -> GestureRecording:
    """Generate one labeled recording at 50 Hz, deterministic per seed.

    The default skin is the noise-free nominal model; pass a jittered/noisy
    skin for dataset-grade data.  Frames before and after the contact are
    idle, mimicking a recorder that starts early and stops late.
    """
    rate = 50.0
    profile = profile or DEFAULT_GESTURE_PROFILES[gesture]
    skin = skin or nominal_skin_model(layout)
    rng = np.random.default_rng(seed)
    section = layout.section(arm_section)

    lead = int(rng.integers(5, 31))
    trail = int(rng.integers(5, 16))
    reps_lo, reps_hi = profile.repetitions
    reps = int(rng.integers(reps_lo, reps_hi + 1))

    bursts = []  # (start_frame, envelope) with shared footprint
    cursor = lead
    for k in range(reps):
        dur = rng.uniform(*profile.duration_range)
        n = max(2, int(round(dur * rate)))
        env = _trapezoid(n, profile.attack_frames)
        env = env / env.max()
        bursts.append((cursor, env))
        cursor += n
        if k < reps - 1:
            gap = rng.uniform(*profile.gap_range)
            cursor += max(1, int(round(gap * rate)))
    n_frames = cursor + trail

    forces = np.zeros((n_frames, layout.n_taxels))
    size = int(rng.integers(profile.footprint_range[0], profile.footprint_range[1] + 1))
    peak = rng.uniform(*profile.peak_force_range)

    if profile.motion == "translating":
        # footprint center sweeps back and forth across the columns
        r0 = int(rng.integers(0, section.rows))
        sweeps = float(rng.uniform(1.5, 3.5))
        start, env = bursts[0]
        phase = np.arange(env.shape[0]) / max(env.shape[0] - 1, 1) * sweeps
        tri = np.abs(2.0 * (phase - np.floor(phase + 0.5)))  # 0..1 triangle wave
        centers = np.rint(tri * (section.cols - 1)).astype(int)
        for t in range(env.shape[0]):
            cells, weights = _footprint_cells(
                rng, section.rows, section.cols, size, False, center=(r0, int(centers[t]))
            )
            _paint(forces, layout, arm_section, cells, weights,
                   np.array([env[t] * peak]), start + t)
    else:
        cells, weights = _footprint_cells(
            rng, section.rows, section.cols, size, profile.row_elongated
        )
        for start, env in bursts:
            wave = env * peak
            if profile.motion == "oscillating":
                hz = rng.uniform(*profile.oscillation_hz_range)
                t = np.arange(env.shape[0]) / rate
                wave = env * peak * (0.55 + 0.45 * np.sin(2.0 * np.pi * hz * t))
            _paint(forces, layout, arm_section, cells, weights, wave, start)

    noise_rng = rng if any(t.noise_std > 0 for t in skin.taxels) else None
    readings = skin.readings(forces, noise_rng)
    timestamps = np.arange(n_frames) / rate
    frames = tuple(TaxelFrame(float(timestamps[i]), readings[i]) for i in range(n_frames))
    return GestureRecording(
        frames=frames,
        label=gesture,
        participant_id=participant_id,
        arm_section=arm_section,
        trial_index=trial_index,
        sample_rate_hz=rate,
    )


TRAIN_TRIALS = {"upper": 9, "lower": 6}
TEST_TRIALS = {"upper": 3, "lower": 2}


def synthesize_dataset(
    layout: SensorLayout = DEFAULT_LAYOUT,
    profiles: dict[GestureClass, GestureProfile] | None = None,
    n_train_participants: int = 10,
    n_test_participants: int = 6,
    seed: int = 0,
    noise_std: float = 1.5,
    skin: SkinModel | None = None,
) -> Dataset:
    """Build the full labeled dataset with participant-wise split assignment.

    Train participants contribute 15 trials per gesture (9 upper arm, 6
    lower), test participants 5 (3 upper, 2 lower): 900 + 180 recordings at
    the default counts.  Per-participant force/tempo style factors mimic how
    differently people perform the same gesture.
    """
    profiles = profiles or DEFAULT_GESTURE_PROFILES
    root = np.random.SeedSequence(seed)
    skin_ss, *participant_ss = root.spawn(1 + n_train_participants + n_test_participants)
    skin = skin or default_skin_model(layout, seed=skin_ss, noise_std=noise_std)

    recordings = []
    assignment: dict[str, str] = {}
    for p_idx, p_ss in enumerate(participant_ss):
        side = "train" if p_idx < n_train_participants else "test"
        participant = f"p{p_idx:02d}"
        assignment[participant] = side
        style_rng = np.random.default_rng(p_ss)
        force_scale = float(style_rng.uniform(0.85, 1.2))
        tempo_scale = float(style_rng.uniform(0.85, 1.2))
        trials_per_section = TRAIN_TRIALS if side == "train" else TEST_TRIALS
        n_trials = sum(trials_per_section.values())
        trial_ss = p_ss.spawn(len(profiles) * n_trials)
        k = 0
        for gesture in sorted(profiles):
            profile = profiles[gesture].scaled(force_scale, tempo_scale)
            trial = 0
            for section_id in layout.section_ids:
                for _ in range(trials_per_section[section_id]):
                    recordings.append(
                        synthesize_gesture(
                            gesture,
                            layout,
                            profile,
                            arm_section=section_id,
                            seed=trial_ss[k],
                            skin=skin,
                            participant_id=participant,
                            trial_index=trial,
                        )
                    )
                    trial += 1
                    k += 1
    dataset = Dataset(tuple(recordings), assignment)
    logger.info(
        "synthesized %d recordings (%d train / %d test participants)",
        len(recordings),
        n_train_participants,
        n_test_participants,
    )
    return dataset


# --- indentation characterization -------------------------------------------


@dataclass(frozen=True)
class IndentationProtocol:
    """Probe trajectory and targets for the force-range measurement."""

    taxels: tuple[int, ...]
    start_height_mm: float = 60.0
    approach_speed_mm_s: float = 17.0
    press_depth_mm: float = 4.0
    repetitions: int = 10
    stiffness_n_per_mm: float = 3.5
    sample_rate_hz: float = 4000.0
    detection_threshold: int = 10

    def __post_init__(self):
        if min(
            self.start_height_mm,
            self.approach_speed_mm_s,
            self.press_depth_mm,
            self.repetitions,
            self.sample_rate_hz,
        ) <= 0:
            raise ValueError("protocol quantities must be positive")
        if self.stiffness_n_per_mm < 0:
            raise ValueError("stiffness must be >= 0")

    @property
    def force_step(self) -> float:
        """Force resolution of one sample during the press phase."""
        return self.stiffness_n_per_mm * self.approach_speed_mm_s / self.sample_rate_hz


def default_protocol(layout: SensorLayout = DEFAULT_LAYOUT) -> IndentationProtocol:
    """Eight spread-out taxels, four per section."""
    targets = [
        layout.flatten_index("upper", 1, 1),
        layout.flatten_index("upper", 1, 3),
        layout.flatten_index("upper", 5, 1),
        layout.flatten_index("upper", 5, 3),
        layout.flatten_index("lower", 1, 1),
        layout.flatten_index("lower", 1, 2),
        layout.flatten_index("lower", 5, 1),
        layout.flatten_index("lower", 5, 2),
    ]
    return IndentationProtocol(taxels=tuple(targets))


@dataclass(eq=False)
class TaxelCharacterization:
    taxel: int
    press_forces: list[np.ndarray]  # per repetition, ascending press phase
    press_readings: list[np.ndarray]
    min_detect: list[float | None]
    max_sat: list[float | None]

    def _agg(self, values: list[float | None]):
        ok = [v for v in values if v is not None]
        if not ok:
            return None, None, len(values)
        arr = np.array(ok)
        return float(arr.mean()), float(arr.std()), len(values) - len(ok)

    def summary(self) -> dict:
        min_mean, min_std, min_missed = self._agg(self.min_detect)
        sat_mean, sat_std, sat_missed = self._agg(self.max_sat)
        return {
            "taxel": self.taxel,
            "repetitions": len(self.press_forces),
            "min_detect_mean_n": min_mean,
            "min_detect_std_n": min_std,
            "min_detect_not_reached": min_missed,
            "max_sat_mean_n": sat_mean,
            "max_sat_std_n": sat_std,
            "max_sat_not_reached": sat_missed,
        }


@dataclass(eq=False)
class CharacterizationReport:
    protocol: IndentationProtocol
    taxels: list[TaxelCharacterization]

    def summary(self) -> dict:
        return {
            "force_step_n": self.protocol.force_step,
            "taxels": [t.summary() for t in self.taxels],
        }

    def to_json(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2) + "\n", encoding="utf-8")

    def samples_to_csv(self, path: Path | str) -> None:
        """Press-phase (force, reading) pairs, one row per sample."""
        import csv

        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["taxel", "repetition", "force_n", "reading"])
            for tc in self.taxels:
                for rep, (forces, readings) in enumerate(
                    zip(tc.press_forces, tc.press_readings)
                ):
                    for f, r in zip(forces, readings):
                        writer.writerow([tc.taxel, rep, repr(float(f)), int(r)])


def _press_sweep(
    protocol: IndentationProtocol, phase_offset: float
) -> np.ndarray:
    """Ascending press-phase forces for one repetition.

    The probe travels start_height + press_depth at constant speed; only the
    in-contact part produces force (depth * stiffness).  phase_offset shifts
    the sample grid by a fraction of one step, like re-homing jitter.
    """
    speed = protocol.approach_speed_mm_s
    dt = 1.0 / protocol.sample_rate_hz
    total_travel = protocol.start_height_mm + protocol.press_depth_mm
    t_end = total_travel / speed
    times = np.arange(phase_offset, t_end + dt, dt)
    depth = np.maximum(times * speed - protocol.start_height_mm, 0.0)
    depth = np.minimum(depth, protocol.press_depth_mm)
    return depth * protocol.stiffness_n_per_mm


def run_characterization(
    skin: SkinModel,
    protocol: IndentationProtocol | None = None,
    rng: np.random.Generator | None = None,
) -> CharacterizationReport:
    """Simulate the indentation protocol and recover each taxel's force range.

    min_detect is the first press force whose reading exceeds the detection
    threshold; max_sat the first force reaching 99% of the observed plateau.
    Either is None ("not reached") when the press never gets there.
    """
    protocol = protocol or default_protocol(skin.layout)
    results = []
    for taxel in protocol.taxels:
        if not 0 <= taxel < skin.layout.n_taxels:
            raise ValueError(f"protocol taxel {taxel} outside layout")
        model = skin.taxels[taxel]
        tc = TaxelCharacterization(taxel, [], [], [], [])
        for _ in range(protocol.repetitions):
            offset = (
                float(rng.uniform(0.0, 1.0 / protocol.sample_rate_hz))
                if rng is not None
                else 0.0
            )
            forces = _press_sweep(protocol, offset)
            readings = readings_from_forces(model, forces, rng)
            contact = forces > 0
            tc.press_forces.append(forces[contact])
            tc.press_readings.append(readings[contact])
            above = np.flatnonzero(readings > protocol.detection_threshold)
            tc.min_detect.append(float(forces[above[0]]) if above.size else None)
            plateau_est = float(readings.max())
            if plateau_est > protocol.detection_threshold:
                sat_idx = np.flatnonzero(readings >= 0.99 * plateau_est)
                tc.max_sat.append(float(forces[sat_idx[0]]) if sat_idx.size else None)
            else:
                tc.max_sat.append(None)
        results.append(tc)
    return CharacterizationReport(protocol, results)
