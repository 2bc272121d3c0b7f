"""Online contact segmentation: debounced onset, inactivity-window offset.

A segment opens once `onset_frames` consecutive frames show any activated
taxel (those frames are included retroactively), absorbs inactive gaps
shorter than `offset_frames`, and closes when the inactivity run reaches
`offset_frames` -- the trailing inactive run is excluded from the segment.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..core import GestureRecording, TaxelFrame

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmenterConfig:
    onset_frames: int = 2
    offset_frames: int = 25  # 0.5 s at 50 Hz
    min_segment_frames: int = 5
    activation_threshold: int = 10

    def __post_init__(self):
        if self.onset_frames < 1:
            raise ValueError("onset_frames must be >= 1")
        if self.offset_frames < 1 or self.min_segment_frames < 1:
            raise ValueError("offset/min segment frame counts must be >= 1")


class OnlineSegmenter:
    """Feed frames in timestamp order; closed segments come back as recordings."""

    def __init__(self, config: SegmenterConfig | None = None, sample_rate_hz: float = 50.0):
        self.config = config or SegmenterConfig()
        self.sample_rate_hz = sample_rate_hz
        self._pending: list[tuple[TaxelFrame, str]] = []
        self._segment: list[tuple[TaxelFrame, str]] = []
        self._inactive_run = 0
        self._last_timestamp: float | None = None
        self.dropped_out_of_order = 0
        self.dropped_short = 0
        self.segments_emitted = 0

    @property
    def phase(self) -> str:
        return "active" if self._segment else "idle"

    def _is_active(self, frame: TaxelFrame) -> bool:
        return bool((frame.readings > self.config.activation_threshold).any())

    def push(self, frame: TaxelFrame, arm_section: str) -> list[GestureRecording]:
        if self._last_timestamp is not None and frame.timestamp <= self._last_timestamp:
            self.dropped_out_of_order += 1
            logger.warning(
                "dropped out-of-order frame (%d so far): %.6f after %.6f",
                self.dropped_out_of_order,
                frame.timestamp,
                self._last_timestamp,
            )
            return []
        self._last_timestamp = frame.timestamp
        active = self._is_active(frame)

        if not self._segment:  # idle: debounce the onset
            if active:
                self._pending.append((frame, arm_section))
                if len(self._pending) >= self.config.onset_frames:
                    self._segment = self._pending
                    self._pending = []
                    self._inactive_run = 0
            else:
                self._pending.clear()
            return []

        self._segment.append((frame, arm_section))
        if active:
            self._inactive_run = 0
            return []
        self._inactive_run += 1
        if self._inactive_run >= self.config.offset_frames:
            return self._close()
        return []

    def _close(self) -> list[GestureRecording]:
        frames = self._segment[: len(self._segment) - self._inactive_run]
        self._segment = []
        self._inactive_run = 0
        if len(frames) < self.config.min_segment_frames:
            self.dropped_short += 1
            return []
        self.segments_emitted += 1
        recording = GestureRecording(
            frames=tuple(f for f, _ in frames),
            label=None,
            participant_id="live",
            arm_section=frames[0][1],
            trial_index=self.segments_emitted - 1,
            sample_rate_hz=self.sample_rate_hz,
        )
        return [recording]

    def flush(self) -> list[GestureRecording]:
        """Close any open segment at end of stream."""
        if not self._segment:
            self._pending.clear()
            return []
        return self._close()
