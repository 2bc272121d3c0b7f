"""Binary wire format for taxel frames.

Message layout (little-endian):
    magic   4 bytes  b"TXL1"
    version u8
    section u8       index of the grid section in the layout
    rows    u8
    cols    u8
    time    u64      timestamp in microseconds
    data    rows*cols u16 readings, row-major

Total length is 16 + 2*rows*cols bytes.  A stream reader resynchronizes on
the next magic after corrupted bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..core import ADC_MAX, SensorLayout, TaxelFrame

MAGIC = b"TXL1"
PROTOCOL_VERSION = 1
_HEADER = struct.Struct("<4sBBBBQ")
HEADER_SIZE = _HEADER.size  # 16
_MAX_DIM = 32  # sanity bound on rows/cols when scanning a byte stream


class ProtocolError(ValueError):
    """Malformed message: bad magic, version, dimensions or reading range."""


class FramingError(ValueError):
    """Byte buffer is truncated or has the wrong length for its header."""


@dataclass(frozen=True, eq=False)
class FrameMessage:
    section_id: int
    rows: int
    cols: int
    timestamp_us: int
    readings: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.readings, dtype=np.uint16)
        if arr.shape != (self.rows * self.cols,):
            raise ValueError(
                f"expected {self.rows * self.cols} readings, got shape {arr.shape}"
            )
        if arr.size and arr.max() > ADC_MAX:
            raise ValueError(f"readings exceed {ADC_MAX}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "readings", arr)

    @property
    def wire_length(self) -> int:
        return HEADER_SIZE + 2 * self.rows * self.cols


def encode_frame(msg: FrameMessage) -> bytes:
    header = _HEADER.pack(
        MAGIC, PROTOCOL_VERSION, msg.section_id, msg.rows, msg.cols, msg.timestamp_us
    )
    return header + msg.readings.astype("<u2").tobytes()


def decode_frame(data: bytes) -> FrameMessage:
    """Decode exactly one message; the buffer must hold exactly one frame."""
    if len(data) < HEADER_SIZE:
        raise FramingError(f"buffer of {len(data)} bytes is shorter than the header")
    magic, version, section_id, rows, cols, ts = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if version != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {version}")
    if not (1 <= rows <= _MAX_DIM and 1 <= cols <= _MAX_DIM):
        raise ProtocolError(f"implausible grid {rows}x{cols}")
    expected = HEADER_SIZE + 2 * rows * cols
    if len(data) < expected:
        raise FramingError(f"need {expected} bytes, have {len(data)}")
    if len(data) > expected:
        raise FramingError(f"trailing {len(data) - expected} bytes after frame")
    readings = np.frombuffer(data, dtype="<u2", count=rows * cols, offset=HEADER_SIZE)
    if readings.size and readings.max() > ADC_MAX:
        raise ProtocolError(f"reading exceeds {ADC_MAX}")
    return FrameMessage(section_id, rows, cols, ts, readings.astype(np.uint16))


class FrameDecoder:
    """Incremental decoder over a byte stream with resync on magic."""

    def __init__(self):
        self._buf = bytearray()
        self.resync_count = 0

    def feed(self, data: bytes) -> list[FrameMessage]:
        self._buf.extend(data)
        out = []
        while True:
            if not self._resync():
                break
            if len(self._buf) < HEADER_SIZE:
                break
            _, version, section_id, rows, cols, ts = _HEADER.unpack_from(self._buf)
            if version != PROTOCOL_VERSION or not (
                1 <= rows <= _MAX_DIM and 1 <= cols <= _MAX_DIM
            ):
                # header lies; skip this magic and rescan
                del self._buf[:1]
                self.resync_count += 1
                continue
            needed = HEADER_SIZE + 2 * rows * cols
            if len(self._buf) < needed:
                break
            try:
                msg = decode_frame(bytes(self._buf[:needed]))
            except (ProtocolError, FramingError):
                del self._buf[:1]
                self.resync_count += 1
                continue
            del self._buf[:needed]
            out.append(msg)
        return out

    def _resync(self) -> bool:
        """Drop bytes until the buffer starts with magic; False if none yet."""
        if self._buf.startswith(MAGIC):
            return True
        idx = self._buf.find(MAGIC)
        if idx < 0:
            # keep a tail shorter than the magic in case it is a prefix
            if len(self._buf) >= len(MAGIC):
                del self._buf[: len(self._buf) - len(MAGIC) + 1]
                self.resync_count += 1
            return False
        del self._buf[:idx]
        self.resync_count += 1
        return True


def message_from_frame(
    frame: TaxelFrame, layout: SensorLayout, arm_section: str
) -> FrameMessage:
    """Pack one section's readings out of a full 63-taxel frame."""
    section = layout.section(arm_section)
    values = frame.readings[layout.section_slice(arm_section)]
    return FrameMessage(
        section_id=layout.section_index(arm_section),
        rows=section.rows,
        cols=section.cols,
        timestamp_us=int(round(frame.timestamp * 1e6)),
        readings=values.astype(np.uint16),
    )


def frame_from_message(msg: FrameMessage, layout: SensorLayout) -> tuple[TaxelFrame, str]:
    """Rebuild a full-width frame (other sections zero) plus the section id."""
    if msg.section_id >= len(layout.sections):
        raise ProtocolError(f"section index {msg.section_id} outside layout")
    section = layout.sections[msg.section_id]
    if (section.rows, section.cols) != (msg.rows, msg.cols):
        raise ProtocolError(
            f"message grid {msg.rows}x{msg.cols} does not match section "
            f"{section.section_id!r} ({section.rows}x{section.cols})"
        )
    readings = np.zeros(layout.n_taxels, dtype=np.int16)
    readings[layout.section_slice(section.section_id)] = msg.readings.astype(np.int16)
    return TaxelFrame(msg.timestamp_us / 1e6, readings), section.section_id
