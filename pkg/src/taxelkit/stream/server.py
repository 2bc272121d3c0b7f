"""TCP frame server: replays recordings or synthesizes gestures endlessly.

Each accepted connection gets its own writer thread and a fresh playback of
the source.  Emission is paced against a monotonic deadline schedule so the
average rate stays within a percent of the requested one.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from typing import Iterable, Iterator, Sequence

import numpy as np

from ..core import DEFAULT_LAYOUT, GestureClass, GestureRecording, SensorLayout, TaxelFrame
from ..sensorsim import (
    DEFAULT_GESTURE_PROFILES,
    SkinModel,
    default_skin_model,
    synthesize_gesture,
)
from .protocol import FrameMessage, encode_frame, message_from_frame

logger = logging.getLogger(__name__)


class ReplaySource:
    """Streams recordings in order with idle gaps between them.

    Schedule times preserve each recording's own timestamp spacing; gap
    frames tick at the recording's nominal rate so segment offsets close.
    """

    def __init__(
        self,
        recordings: Sequence[GestureRecording],
        layout: SensorLayout = DEFAULT_LAYOUT,
        gap_frames: int = 30,
        loop: bool = False,
    ):
        self.recordings = tuple(recordings)
        if not self.recordings:
            raise ValueError("nothing to replay")
        self.layout = layout
        self.gap_frames = gap_frames
        self.loop = loop
        self.nominal_rate_hz = self.recordings[0].sample_rate_hz

    def __iter__(self) -> Iterator[tuple[float, FrameMessage]]:
        cursor = 0.0
        zeros = np.zeros(self.layout.n_taxels, dtype=np.int16)
        while True:
            for rec in self.recordings:
                period = 1.0 / rec.sample_rate_hz
                t0 = rec.frames[0].timestamp
                for frame in rec.frames:
                    sched = cursor + (frame.timestamp - t0)
                    shifted = TaxelFrame(sched, frame.readings)
                    yield sched, message_from_frame(shifted, self.layout, rec.arm_section)
                cursor += rec.frames[-1].timestamp - t0 + period
                for _ in range(self.gap_frames):
                    frame = TaxelFrame(cursor, zeros)
                    yield cursor, message_from_frame(frame, self.layout, rec.arm_section)
                    cursor += period
            if not self.loop:
                return


class SynthSource:
    """Endless stream of random gestures with idle gaps, deterministic per seed."""

    def __init__(
        self,
        layout: SensorLayout = DEFAULT_LAYOUT,
        skin: SkinModel | None = None,
        seed: int = 0,
        gap_frames: int = 40,
    ):
        self.layout = layout
        self.skin = skin or default_skin_model(layout, seed=seed)
        self.seed = seed
        self.gap_frames = gap_frames
        self.nominal_rate_hz = 50.0

    def __iter__(self) -> Iterator[tuple[float, FrameMessage]]:
        rng = np.random.default_rng(self.seed)
        period = 1.0 / self.nominal_rate_hz
        cursor = 0.0
        zeros = np.zeros(self.layout.n_taxels, dtype=np.int16)
        while True:
            gesture = GestureClass(int(rng.integers(0, len(GestureClass))))
            section = self.layout.section_ids[int(rng.integers(0, len(self.layout.sections)))]
            rec = synthesize_gesture(
                gesture,
                self.layout,
                DEFAULT_GESTURE_PROFILES[gesture],
                arm_section=section,
                seed=int(rng.integers(0, 2**63 - 1)),
                skin=self.skin,
            )
            t0 = rec.frames[0].timestamp
            for frame in rec.frames:
                sched = cursor + (frame.timestamp - t0)
                yield sched, message_from_frame(
                    TaxelFrame(sched, frame.readings), self.layout, section
                )
            cursor += rec.frames[-1].timestamp - t0 + period
            for _ in range(self.gap_frames):
                yield cursor, message_from_frame(TaxelFrame(cursor, zeros), self.layout, section)
                cursor += period


class FrameServer:
    """Serves one frame stream per connection over TCP."""

    def __init__(
        self,
        source: Iterable[tuple[float, FrameMessage]],
        host: str = "127.0.0.1",
        port: int = 0,
        rate_hz: float = 50.0,
    ):
        if rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        self.source = source
        self.rate_hz = rate_hz
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        try:
            self._listener = socket.create_server((host, port))
        except OSError as exc:
            raise OSError(f"cannot bind {host}:{port}: {exc}") from exc
        self._listener.settimeout(0.2)
        self._accept_thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._listener.getsockname()[1]

    def start(self) -> "FrameServer":
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        return self

    def _accept_loop(self):
        while not self._stop.is_set():
            try:
                conn, addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            logger.info("client connected: %s", addr)
            t = threading.Thread(target=self._write_loop, args=(conn,), daemon=True)
            t.start()
            self._threads.append(t)

    def _write_loop(self, conn: socket.socket):
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        scale = self._nominal_rate() / self.rate_hz
        start = time.monotonic()
        sent = 0
        try:
            for sched, msg in iter(self.source):
                if self._stop.is_set():
                    break
                deadline = start + sched * scale
                delay = deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                conn.sendall(encode_frame(msg))
                sent += 1
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            conn.close()
            logger.info("connection closed after %d frames", sent)

    def _nominal_rate(self) -> float:
        return getattr(self.source, "nominal_rate_hz", 50.0)

    def stop(self):
        self._stop.set()
        self._listener.close()
        if self._accept_thread:
            self._accept_thread.join(timeout=2.0)
        for t in self._threads:
            t.join(timeout=2.0)

    def serve_forever(self):
        """Block until interrupted; for CLI use."""
        self.start()
        try:
            while True:
                time.sleep(0.5)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()
