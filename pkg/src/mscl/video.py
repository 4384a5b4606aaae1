"""YUV4MPEG2 and raw planar ingestion/emission.

Supported colorspaces: C420 / C420jpeg / C420mpeg2 (all read as plain 4:2:0
planes; chroma siting differences are ignored) and Cmono.  A stream without
a C token defaults to 4:2:0.  For odd dimensions chroma planes are carried
at ceil(dim/2), matching the in-memory frame layout.
"""

from typing import Tuple

import numpy as np

from .errors import BadHeader, TruncatedFrame, UnsupportedColorspace
from .frame import Frame, chroma_dims
from .synth import VideoSequence

_SIGNATURE = b"YUV4MPEG2"
_420_TAGS = ("420", "420jpeg", "420mpeg2")


def _parse_ratio(text, what):
    num, sep, den = text.partition(":")
    try:
        n, d = int(num), int(den) if sep else 1
    except ValueError:
        raise BadHeader(f"malformed {what} ratio {text!r}") from None
    if n <= 0 or d <= 0:
        raise BadHeader(f"{what} ratio must be positive")
    return n, d


def read_y4m(data: bytes) -> VideoSequence:
    nl = data.find(b"\n")
    if nl < 0 or not data.startswith(_SIGNATURE):
        raise BadHeader("missing YUV4MPEG2 signature")
    tokens = data[:nl].decode("ascii", "replace").split(" ")
    width = height = None
    fps = (30, 1)
    colorspace = "420"
    for tok in tokens[1:]:
        if not tok:
            continue
        key, val = tok[0], tok[1:]
        if key == "W":
            width = int(val)
        elif key == "H":
            height = int(val)
        elif key == "F":
            fps = _parse_ratio(val, "frame rate")
        elif key == "C":
            if val == "mono":
                colorspace = "mono"
            elif val in _420_TAGS:
                colorspace = "420"
            else:
                raise UnsupportedColorspace(f"C{val}")
        # I/A/X tokens are accepted and ignored
    if not width or not height or width < 1 or height < 1:
        raise BadHeader("header lacks valid W/H tokens")

    luma_size = width * height
    if colorspace == "420":
        ch, cw = chroma_dims(width, height)
        chroma_size = ch * cw
    else:
        chroma_size = 0
    frame_bytes = luma_size + 2 * chroma_size

    frames = []
    pos = nl + 1
    idx = 0
    while pos < len(data):
        fnl = data.find(b"\n", pos)
        if fnl < 0 or not data[pos:pos + 5] == b"FRAME":
            raise TruncatedFrame(f"frame {idx}: missing FRAME marker")
        pos = fnl + 1
        if pos + frame_bytes > len(data):
            raise TruncatedFrame(
                f"frame {idx}: need {frame_bytes} bytes, have {len(data) - pos}")
        buf = np.frombuffer(data, dtype=np.uint8, count=frame_bytes, offset=pos)
        luma = buf[:luma_size].reshape(height, width).copy()
        if chroma_size:
            cu = buf[luma_size:luma_size + chroma_size].reshape(ch, cw).copy()
            cv = buf[luma_size + chroma_size:].reshape(ch, cw).copy()
            frames.append(Frame(luma, cu, cv))
        else:
            frames.append(Frame(luma))
        pos += frame_bytes
        idx += 1
    if not frames:
        raise TruncatedFrame("stream holds no frames")
    return VideoSequence(frames, fps)


def write_y4m(seq: VideoSequence) -> bytes:
    tag = "420jpeg" if seq.frames[0].has_chroma else "mono"
    header = (f"YUV4MPEG2 W{seq.width} H{seq.height} "
              f"F{seq.fps[0]}:{seq.fps[1]} C{tag}\n").encode("ascii")
    parts = [header]
    for f in seq.frames:
        parts.append(b"FRAME\n")
        parts.append(f.luma.tobytes())
        if f.has_chroma:
            parts.append(f.chroma_u.tobytes())
            parts.append(f.chroma_v.tobytes())
    return b"".join(parts)


def read_raw(data: bytes, width: int, height: int, mono: bool = False,
             fps: Tuple[int, int] = (30, 1)) -> VideoSequence:
    """Headerless planar frames, 4:2:0 unless mono."""
    luma_size = width * height
    if mono:
        chroma_size = 0
    else:
        ch, cw = chroma_dims(width, height)
        chroma_size = ch * cw
    frame_bytes = luma_size + 2 * chroma_size
    if len(data) == 0 or len(data) % frame_bytes:
        raise TruncatedFrame(
            f"raw stream length {len(data)} is not a multiple of {frame_bytes}")
    frames = []
    for pos in range(0, len(data), frame_bytes):
        buf = np.frombuffer(data, np.uint8, count=frame_bytes, offset=pos)
        luma = buf[:luma_size].reshape(height, width).copy()
        if chroma_size:
            cu = buf[luma_size:luma_size + chroma_size].reshape(ch, cw).copy()
            cv = buf[luma_size + chroma_size:].reshape(ch, cw).copy()
            frames.append(Frame(luma, cu, cv))
        else:
            frames.append(Frame(luma))
    return VideoSequence(frames, fps)


def write_raw(seq: VideoSequence) -> bytes:
    parts = []
    for f in seq.frames:
        parts.append(f.luma.tobytes())
        if f.has_chroma:
            parts.append(f.chroma_u.tobytes())
            parts.append(f.chroma_v.tobytes())
    return b"".join(parts)
