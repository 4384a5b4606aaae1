"""The .mscl stream format: header, per-frame records, framed payloads.

All multi-byte integers are big-endian.  Layout:

  header (20 bytes):
    magic   4  "MSCL"
    version 1  = 1
    width   2
    height  2
    frames  4
    color   1  (0 mono, 1 = 4:2:0)
    qp      1
    flags   1  (bit0 adaptive, bit1 scaling, bit2 bias; rest reserved zero)
    fps_num 2
    fps_den 2

  frame record:
    type        1  (0 intra, 1 predicted)
    side_info   1  (low 5 bits = downsampling-factor index, high 3 zero)
    motion_len  4
    residual_len 4
    motion payload, residual payload
"""

import struct
from dataclasses import dataclass
from typing import List

from .errors import (BadMagic, InvalidField, NonzeroReservedBits,
                     TruncatedStream, UnsupportedVersion)

MAGIC = b"MSCL"
VERSION = 1
HEADER_FMT = ">4sBHHIBBBHH"
HEADER_SIZE = struct.calcsize(HEADER_FMT)
RECORD_FMT = ">BBII"
RECORD_SIZE = struct.calcsize(RECORD_FMT)

COLOR_MONO = 0
COLOR_420 = 1

FLAG_ADAPTIVE = 1
FLAG_SCALING = 2
FLAG_BIAS = 4

FRAME_INTRA = 0
FRAME_PREDICTED = 1


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    frame_count: int
    colorspace: int
    qp: int
    flags: int
    fps_num: int = 30
    fps_den: int = 1

    def __post_init__(self):
        if not (16 <= self.width <= 0xFFFF and 16 <= self.height <= 0xFFFF):
            raise InvalidField("width/height must be in [16, 65535]")
        if self.colorspace not in (COLOR_MONO, COLOR_420):
            raise InvalidField(f"unknown colorspace {self.colorspace}")
        if not 1 <= self.qp <= 255:
            raise InvalidField("qp must fit [1, 255]")
        if not 0 <= self.flags <= 7:
            raise InvalidField("flags uses only bits 0..2")
        if not (1 <= self.fps_num <= 0xFFFF and 1 <= self.fps_den <= 0xFFFF):
            raise InvalidField("fps fields must be in [1, 65535]")
        if not 0 <= self.frame_count <= 0xFFFFFFFF:
            raise InvalidField("frame_count out of range")

    @property
    def adaptive(self):
        return bool(self.flags & FLAG_ADAPTIVE)

    @property
    def scaling(self):
        return bool(self.flags & FLAG_SCALING)

    @property
    def bias(self):
        return bool(self.flags & FLAG_BIAS)


@dataclass(frozen=True)
class FrameRecord:
    frame_type: int
    d_index: int
    motion_payload: bytes
    residual_payload: bytes

    def __post_init__(self):
        if self.frame_type not in (FRAME_INTRA, FRAME_PREDICTED):
            raise InvalidField(f"unknown frame type {self.frame_type}")
        if not 0 <= self.d_index < 32:
            raise InvalidField("factor index must fit in 5 bits")
        if self.frame_type == FRAME_INTRA and (
                self.d_index != 0 or self.motion_payload):
            raise InvalidField(
                "intra frames carry factor index 0 and no motion payload")


def write_stream(header: StreamHeader, records: List[FrameRecord]) -> bytes:
    if len(records) != header.frame_count:
        raise InvalidField(
            f"header says {header.frame_count} frames, got {len(records)} records")
    parts = [struct.pack(HEADER_FMT, MAGIC, VERSION, header.width, header.height,
                         header.frame_count, header.colorspace, header.qp,
                         header.flags, header.fps_num, header.fps_den)]
    for rec in records:
        parts.append(struct.pack(RECORD_FMT, rec.frame_type, rec.d_index,
                                 len(rec.motion_payload), len(rec.residual_payload)))
        parts.append(rec.motion_payload)
        parts.append(rec.residual_payload)
    return b"".join(parts)


def read_stream(data: bytes):
    """Parse a byte string into (header, records); validates everything."""
    if len(data) < HEADER_SIZE:
        raise TruncatedStream(
            f"stream ends at byte {len(data)}, header needs {HEADER_SIZE}")
    magic, version, width, height, frame_count, colorspace, qp, flags, \
        fps_num, fps_den = struct.unpack(HEADER_FMT, data[:HEADER_SIZE])
    if magic != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"stream version {version}, supported: {VERSION}")
    header = StreamHeader(width, height, frame_count, colorspace, qp, flags,
                          fps_num, fps_den)
    records = []
    pos = HEADER_SIZE
    for i in range(frame_count):
        if pos + RECORD_SIZE > len(data):
            raise TruncatedStream(
                f"frame {i} record header truncated at byte {pos}")
        ftype, side, mlen, rlen = struct.unpack_from(RECORD_FMT, data, pos)
        if side & 0xE0:
            raise NonzeroReservedBits(
                f"frame {i} side-info byte 0x{side:02X} has reserved bits set")
        pos += RECORD_SIZE
        if pos + mlen + rlen > len(data):
            raise TruncatedStream(
                f"frame {i} payloads truncated at byte {len(data)}")
        motion = data[pos:pos + mlen]
        pos += mlen
        resid = data[pos:pos + rlen]
        pos += rlen
        records.append(FrameRecord(ftype, side & 0x1F, motion, resid))
    if pos != len(data):
        raise InvalidField(
            f"{len(data) - pos} trailing bytes after the last frame record")
    return header, records
