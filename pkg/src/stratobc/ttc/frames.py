"""Bit-exact wire framing for the gondola-to-ground link.

Layout (big-endian throughout):

  offset  size  field
  0       2     magic 0x5C 0xA7
  2       1     version (0x01)
  3       1     type
  4       4     seq (unsigned)
  8       8     timestamp, ms since mission epoch (unsigned)
  16      2     payload length
  18      n     payload (JSON document, schema per type)
  18+n    4     CRC-32 (IEEE) over version..payload

The decoder is incremental: partial reads accumulate, garbage is skipped
until the next magic (counted), and frames failing the CRC or carrying an
unknown version are dropped and counted rather than surfaced.
"""

from __future__ import annotations

import enum
import json
import struct
import zlib
from dataclasses import dataclass
from typing import Any, Iterator

MAGIC = b"\x5c\xa7"
VERSION = 0x01
HEADER = struct.Struct(">2sBBIQH")  # magic, version, type, seq, timestamp_ms, payload_len
HEADER_LEN = HEADER.size  # 18
CRC_LEN = 4
MAX_PAYLOAD = 16384


class FrameType(enum.IntEnum):
    TM_SC = 0x01
    TM_HK = 0x02
    TC = 0x03
    TC_ACK = 0x04
    EVENT = 0x05
    HEARTBEAT = 0x06


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    type: FrameType
    seq: int
    timestamp_ms: int
    payload: bytes = b""


def encode_frame(frame: Frame) -> bytes:
    if len(frame.payload) > MAX_PAYLOAD:
        raise FrameError(f"payload of {len(frame.payload)} bytes exceeds {MAX_PAYLOAD}")
    head = HEADER.pack(MAGIC, VERSION, int(frame.type), frame.seq & 0xFFFFFFFF,
                       int(frame.timestamp_ms) & 0xFFFFFFFFFFFFFFFF, len(frame.payload))
    body = head + frame.payload
    crc = zlib.crc32(body[2:]) & 0xFFFFFFFF
    return body + crc.to_bytes(CRC_LEN, "big")


def decode_frame(data: bytes) -> Frame:
    """Decode exactly one well-formed frame (raises on anything else)."""
    decoder = FrameDecoder()
    decoder.feed(data)
    frames = list(decoder)
    if len(frames) != 1 or decoder.resync_bytes or decoder.crc_dropped or decoder.version_dropped:
        raise FrameError("buffer does not hold exactly one valid frame")
    return frames[0]


class FrameDecoder:
    def __init__(self):
        self._buf = bytearray()
        self._frames: list[Frame] = []
        self.resync_bytes = 0
        self.crc_dropped = 0
        self.version_dropped = 0

    def feed(self, data: bytes) -> None:
        self._buf.extend(data)
        self._scan()

    def _scan(self) -> None:
        buf = self._buf
        while True:
            idx = buf.find(MAGIC)
            if idx < 0:
                # keep a possible first magic byte at the tail
                keep = 1 if buf[-1:] == MAGIC[:1] else 0
                self.resync_bytes += len(buf) - keep
                del buf[: len(buf) - keep]
                return
            if idx > 0:
                self.resync_bytes += idx
                del buf[:idx]
            if len(buf) < HEADER_LEN:
                return
            magic, version, ftype, seq, t_ms, plen = HEADER.unpack_from(buf, 0)
            if plen > MAX_PAYLOAD:
                # cannot be a real header; skip this magic and resync
                self.resync_bytes += 2
                del buf[:2]
                continue
            total = HEADER_LEN + plen + CRC_LEN
            if len(buf) < total:
                return
            declared = int.from_bytes(buf[total - CRC_LEN: total], "big")
            computed = zlib.crc32(bytes(buf[2: total - CRC_LEN])) & 0xFFFFFFFF
            if computed != declared:
                self.crc_dropped += 1
                self.resync_bytes += 2
                del buf[:2]  # resync after this magic
                continue
            if version != VERSION:
                self.version_dropped += 1
                del buf[:total]
                continue
            try:
                frame_type = FrameType(ftype)
            except ValueError:
                self.crc_dropped += 1
                del buf[:total]
                continue
            payload = bytes(buf[HEADER_LEN: HEADER_LEN + plen])
            del buf[:total]
            self._frames.append(Frame(frame_type, seq, t_ms, payload))

    def __iter__(self) -> Iterator[Frame]:
        frames, self._frames = self._frames, []
        return iter(frames)

    def pending(self) -> int:
        return len(self._frames)


def make_json_frame(frame_type: FrameType, seq: int, timestamp_ms: float,
                    obj: Any) -> Frame:
    payload = b"" if obj is None else json.dumps(obj, separators=(",", ":")).encode()
    return Frame(frame_type, seq, int(timestamp_ms), payload)


def json_payload(frame: Frame) -> Any:
    if not frame.payload:
        return None
    return json.loads(frame.payload.decode())
