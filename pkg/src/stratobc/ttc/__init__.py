"""Telemetry/telecommand link: frame codec, link FSM, tasks and ground harness."""

from stratobc.ttc.frames import (
    Frame,
    FrameDecoder,
    FrameType,
    decode_frame,
    encode_frame,
    json_payload,
    make_json_frame,
)
from stratobc.ttc.link import BandwidthMeter, LinkMonitor, LinkState, LoopTransport, TcpListenerTransport

__all__ = [
    "BandwidthMeter",
    "Frame",
    "FrameDecoder",
    "FrameType",
    "LinkMonitor",
    "LinkState",
    "LoopTransport",
    "TcpListenerTransport",
    "decode_frame",
    "encode_frame",
    "json_payload",
    "make_json_frame",
]
