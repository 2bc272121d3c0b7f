"""Live classification client: receive frames, segment, run the offline pipeline.

Classification of a closed segment goes through exactly the same code path
as offline classification of a stored recording, so a replayed recording
yields the same prediction live as it does offline.
"""

from __future__ import annotations

import logging
import socket
import time
from typing import Iterator

from ..core import DEFAULT_LAYOUT, GestureClass, GestureRecording, SensorLayout
from ..learn.evaluation import KindMismatchError
from ..learn.nets import TrainedModel
from ..pipeline import DEFAULT_PIPELINE_CONFIG, PipelineConfig, extract_feature
from .protocol import FrameDecoder, frame_from_message
from .segment import OnlineSegmenter, SegmenterConfig

logger = logging.getLogger(__name__)


def classify_recording(
    recording: GestureRecording,
    model: TrainedModel,
    pipeline_config: PipelineConfig = DEFAULT_PIPELINE_CONFIG,
) -> dict:
    """Classify one recording; the shared path for offline and live use."""
    if model.feature_kind is None:
        raise KindMismatchError("model carries no feature kind tag")
    vec = extract_feature(recording, model.feature_kind, pipeline_config)
    probs = model.predict_proba(vec.values[None, :])[0]
    code = int(probs.argmax())
    return {
        "event": "classification",
        "timestamp": float(recording.frames[-1].timestamp),
        "label": GestureClass(code).label,
        "label_code": code,
        "probabilities": [float(p) for p in probs],
        "segment_frames": recording.n_frames,
    }


def classify_live(
    host: str,
    port: int,
    model: TrainedModel,
    pipeline_config: PipelineConfig = DEFAULT_PIPELINE_CONFIG,
    segmenter_config: SegmenterConfig | None = None,
    layout: SensorLayout = DEFAULT_LAYOUT,
    max_events: int | None = None,
    reconnect_attempts: int = 0,
    backoff_s: float = 0.5,
) -> Iterator[dict]:
    """Yield classification events for each gesture segment on the stream.

    The segmenter inherits the pipeline's activation threshold so online
    segment boundaries line up with offline pre-contact trimming.  On
    connection loss a gap event is emitted and, if attempts remain, the
    client reconnects with linear backoff.
    """
    seg_config = segmenter_config or SegmenterConfig(
        activation_threshold=pipeline_config.activation_threshold
    )
    emitted = 0
    attempts_left = reconnect_attempts
    while True:
        segmenter = OnlineSegmenter(seg_config, pipeline_config.sample_rate_hz)
        decoder = FrameDecoder()
        try:
            with socket.create_connection((host, port), timeout=10.0) as sock:
                sock.settimeout(10.0)
                while True:
                    data = sock.recv(65536)
                    if not data:
                        break
                    for msg in decoder.feed(data):
                        frame, section = frame_from_message(msg, layout)
                        for segment in segmenter.push(frame, section):
                            yield classify_recording(segment, model, pipeline_config)
                            emitted += 1
                            if max_events is not None and emitted >= max_events:
                                return
        except (ConnectionError, socket.timeout, OSError) as exc:
            logger.warning("stream connection lost: %s", exc)
            if attempts_left > 0:
                attempts_left -= 1
                delay = backoff_s * (reconnect_attempts - attempts_left)
                yield {"event": "gap", "reason": str(exc), "retry_in_s": delay}
                time.sleep(delay)
                continue
            yield {"event": "gap", "reason": str(exc), "retry_in_s": None}
            return
        # clean end of stream: close any open segment and finish
        for segment in segmenter.flush():
            yield classify_recording(segment, model, pipeline_config)
            emitted += 1
            if max_events is not None and emitted >= max_events:
                return
        return
