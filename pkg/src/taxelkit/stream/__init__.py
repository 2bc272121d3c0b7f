"""Binary frame streaming: wire protocol, servers, segmentation, live client."""

from .client import classify_live, classify_recording
from .protocol import (
    HEADER_SIZE,
    MAGIC,
    PROTOCOL_VERSION,
    FrameDecoder,
    FrameMessage,
    FramingError,
    ProtocolError,
    decode_frame,
    encode_frame,
    frame_from_message,
    message_from_frame,
)
from .segment import OnlineSegmenter, SegmenterConfig
from .server import FrameServer, ReplaySource, SynthSource

__all__ = [
    "FrameDecoder",
    "FrameMessage",
    "FrameServer",
    "FramingError",
    "HEADER_SIZE",
    "MAGIC",
    "OnlineSegmenter",
    "PROTOCOL_VERSION",
    "ProtocolError",
    "ReplaySource",
    "SegmenterConfig",
    "SynthSource",
    "classify_live",
    "classify_recording",
    "decode_frame",
    "encode_frame",
    "frame_from_message",
    "message_from_frame",
]
