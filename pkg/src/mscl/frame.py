"""Core picture types, antialiased resampling, flow upsampling, warping, PSNR.

Frames are 8-bit planar pictures (luma plus optional 4:2:0 chroma).  Flow
fields are dense per-pixel displacement maps carrying a scale tag: either
scene scale (original-resolution pixel units, usable for warping) or
down-scaled by some factor d >= 1 (must be rescaled before warping).

All functions are pure; arrays are treated as read-only after construction.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import _kernels
from .errors import (DimensionMismatch, FactorTooLarge, ScaleTagViolation)

PSNR_CAP = 99.0
MIN_DIMENSION = 16


@dataclass(eq=False)
class Frame:
    """One planar 8-bit picture.  chroma planes, when present, are 4:2:0
    (ceil(w/2) x ceil(h/2) each)."""

    luma: np.ndarray
    chroma_u: Optional[np.ndarray] = None
    chroma_v: Optional[np.ndarray] = None

    def __post_init__(self):
        self.luma = _as_plane(self.luma)
        if (self.chroma_u is None) != (self.chroma_v is None):
            raise ValueError("chroma planes must be both present or both absent")
        if self.chroma_u is not None:
            self.chroma_u = _as_plane(self.chroma_u)
            self.chroma_v = _as_plane(self.chroma_v)
            ch, cw = chroma_dims(self.width, self.height)
            if self.chroma_u.shape != (ch, cw) or self.chroma_v.shape != (ch, cw):
                raise DimensionMismatch(
                    f"chroma planes must be {cw}x{ch} for a {self.width}x{self.height} frame")

    @property
    def width(self) -> int:
        return self.luma.shape[1]

    @property
    def height(self) -> int:
        return self.luma.shape[0]

    @property
    def has_chroma(self) -> bool:
        return self.chroma_u is not None


def chroma_dims(width, height):
    """(rows, cols) of each 4:2:0 chroma plane."""
    return (height + 1) // 2, (width + 1) // 2


def _as_plane(arr):
    arr = np.asarray(arr)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("plane must be a non-empty 2D array")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.floating):
            raise ValueError("plane samples must be integers in [0, 255]")
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("plane samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return np.ascontiguousarray(arr)


@dataclass(eq=False)
class FlowField:
    """Dense displacement field.  uv[..., 0] is the x component, uv[..., 1]
    the y component, in pixels at the field's own resolution.

    down_factor is None for a scene-scale field, otherwise the factor d the
    producing frames were downsampled by."""

    uv: np.ndarray
    down_factor: Optional[float] = None

    def __post_init__(self):
        uv = np.asarray(self.uv, dtype=np.float64)
        if uv.ndim != 3 or uv.shape[2] != 2 or uv.shape[0] == 0 or uv.shape[1] == 0:
            raise ValueError("flow must have shape (h, w, 2)")
        if not np.all(np.isfinite(uv)):
            raise ValueError("flow components must be finite")
        if self.down_factor is not None and self.down_factor < 1.0:
            raise ValueError("down_factor must be >= 1")
        self.uv = uv

    @property
    def width(self) -> int:
        return self.uv.shape[1]

    @property
    def height(self) -> int:
        return self.uv.shape[0]

    @property
    def is_scene_scale(self) -> bool:
        return self.down_factor is None

    def require_scene_scale(self, what="this operation"):
        if not self.is_scene_scale:
            raise ScaleTagViolation(
                f"{what} requires a scene-scale flow field, got one "
                f"down-scaled by {self.down_factor}")


# --- separable Catmull-Rom resampling ---------------------------------------

def _catmull_rom(x):
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    out = np.where(ax <= 1.0, 1.5 * ax3 - 2.5 * ax2 + 1.0,
                   np.where(ax < 2.0, -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0, 0.0))
    return out


@lru_cache(maxsize=512)
def _resample_taps(n_in, n_out):
    """Banded Catmull-Rom taps mapping n_in samples onto n_out.

    Half-pixel-center mapping; for downscaling the kernel support is widened
    by the actual in/out ratio (antialiasing).  Edge taps are folded onto the
    border sample (replication).  Returns (idx int32 (n_out,K), w float64)."""
    scale = n_in / n_out
    s = max(scale, 1.0)
    centers = (np.arange(n_out) + 0.5) * scale - 0.5
    lo = np.ceil(centers - 2.0 * s).astype(np.int64)
    K = int(np.floor(4.0 * s)) + 2
    offsets = lo[:, None] + np.arange(K)[None, :]
    w = _catmull_rom((offsets - centers[:, None]) / s)
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(offsets, 0, n_in - 1).astype(np.int32)
    return np.ascontiguousarray(idx), np.ascontiguousarray(w)


def resample_plane(plane, out_w, out_h):
    """Resample one 8-bit plane to (out_w, out_h) with the Catmull-Rom
    kernel, antialiased when shrinking.  Returns uint8."""
    h, w = plane.shape
    if out_w == w and out_h == h:
        return plane.copy()
    src = plane
    if out_h != h:
        yi, yw = _resample_taps(h, out_h)
        tmp = np.empty((out_h, w), dtype=np.float64)
        _kernels.resample_rows(src, yi, yw, tmp)
        src = tmp
    if out_w != w:
        xi, xw = _resample_taps(w, out_w)
        tmp = np.empty((src.shape[0], out_w), dtype=np.float64)
        _kernels.resample_cols(src, xi, xw, tmp)
        src = tmp
    out = np.empty(src.shape, dtype=np.uint8)
    _kernels.round_clip_u8(src, out)
    return out


def resample_frame(frame: Frame, out_w, out_h) -> Frame:
    """Resample all planes of a frame to the target luma dimensions."""
    if out_w < 1 or out_h < 1:
        raise ValueError("target dimensions must be positive")
    luma = resample_plane(frame.luma, out_w, out_h)
    if not frame.has_chroma:
        return Frame(luma)
    ch, cw = chroma_dims(out_w, out_h)
    return Frame(luma,
                 resample_plane(frame.chroma_u, cw, ch),
                 resample_plane(frame.chroma_v, cw, ch))


def downsample_frame(frame: Frame, d: float) -> Frame:
    """Shrink a frame by factor d >= 1 (round(dim/d), floor of 16 px)."""
    if d < 1.0:
        raise ValueError("downsampling factor must be >= 1")
    out_w = int(round(frame.width / d))
    out_h = int(round(frame.height / d))
    if out_w < MIN_DIMENSION or out_h < MIN_DIMENSION:
        raise FactorTooLarge(
            f"factor {d} takes {frame.width}x{frame.height} below "
            f"{MIN_DIMENSION}x{MIN_DIMENSION}")
    return resample_frame(frame, out_w, out_h)


def downsample_valid(width, height, d) -> bool:
    """True when downsampling by d keeps both dimensions >= the floor."""
    return (round(width / d) >= MIN_DIMENSION
            and round(height / d) >= MIN_DIMENSION)


# --- flow upsampling and warping ---------------------------------------------

@lru_cache(maxsize=512)
def _bilinear_taps(n_in, n_out):
    scale = n_in / n_out
    pos = np.clip((np.arange(n_out) + 0.5) * scale - 0.5, 0.0, n_in - 1.0)
    i0 = np.minimum(pos.astype(np.int64), max(n_in - 2, 0)).astype(np.int32)
    frac = pos - i0
    return np.ascontiguousarray(i0), np.ascontiguousarray(frac)


def _flow_unchecked(uv, down_factor):
    """Internal fast constructor: skips validation on arrays this package
    produced itself (always finite, always (h, w, 2) float64)."""
    f = object.__new__(FlowField)
    f.uv = uv
    f.down_factor = down_factor
    return f


def upsample_flow_bilinear(flow: FlowField, target_w, target_h) -> FlowField:
    """Spatially interpolate a down-scaled flow field onto a larger grid.

    Vector values are untouched (interpolation only; magnitude rescaling is
    a separate operation) and the scale tag is preserved."""
    if flow.is_scene_scale:
        raise ScaleTagViolation("only down-scaled fields are upsampled")
    if target_w < flow.width or target_h < flow.height:
        raise DimensionMismatch(
            f"target {target_w}x{target_h} smaller than flow "
            f"{flow.width}x{flow.height}")
    if target_w == flow.width and target_h == flow.height:
        return _flow_unchecked(flow.uv.copy(), flow.down_factor)
    x0, fx = _bilinear_taps(flow.width, target_w)
    y0, fy = _bilinear_taps(flow.height, target_h)
    out = np.empty((target_h, target_w, 2), dtype=np.float64)
    _kernels.bilinear_resize_uv(np.ascontiguousarray(flow.uv),
                                x0, fx, y0, fy, out)
    return _flow_unchecked(out, flow.down_factor)


def backward_warp(ref: Frame, flow: FlowField, include_chroma=False) -> Frame:
    """Motion-compensate: out(x,y) = ref bilinearly sampled at (x+u, y+v).

    Coordinates are clamped to the frame border.  Luma only by default;
    with include_chroma the chroma planes are warped with halved vectors
    subsampled at even pixel positions."""
    if not flow.is_scene_scale:
        raise ScaleTagViolation("warping requires a scene-scale flow field")
    if (flow.width, flow.height) != (ref.width, ref.height):
        raise DimensionMismatch(
            f"flow {flow.width}x{flow.height} vs frame {ref.width}x{ref.height}")
    uv = np.ascontiguousarray(flow.uv)
    luma = np.empty_like(ref.luma)
    _kernels.warp_bilinear_u8(ref.luma, uv, luma)
    if not (include_chroma and ref.has_chroma):
        return Frame(luma)
    cu = np.empty_like(ref.chroma_u)
    cv = np.empty_like(ref.chroma_v)
    uvc = np.ascontiguousarray(uv[::2, ::2] * 0.5)
    _kernels.warp_bilinear_u8(ref.chroma_u, uvc, cu)
    _kernels.warp_bilinear_u8(ref.chroma_v, uvc, cv)
    return Frame(luma, cu, cv)


def warp_sse(ref: Frame, flow: FlowField, cur: Frame) -> int:
    """Luma sum of squared errors between cur and the warp of ref, without
    materializing the warped picture.  Identical arithmetic to
    backward_warp followed by a squared diff."""
    if not flow.is_scene_scale:
        raise ScaleTagViolation("warping requires a scene-scale flow field")
    if (flow.width, flow.height) != (ref.width, ref.height):
        raise DimensionMismatch("flow/frame dimensions differ")
    if (cur.width, cur.height) != (ref.width, ref.height):
        raise DimensionMismatch("frame dimensions differ")
    return int(_kernels.warp_bilinear_sse(
        ref.luma, np.ascontiguousarray(flow.uv), cur.luma))


# --- quality ------------------------------------------------------------------

_MSE_FLOOR = 255.0 ** 2 * 10.0 ** (-9.9)


def psnr(a: Frame, b: Frame) -> float:
    """Luma PSNR in dB, capped at 99.0 (returned for near-identical frames)."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"{a.width}x{a.height} vs {b.width}x{b.height}")
    return psnr_from_sse(
        int(np.sum(np.square(a.luma.astype(np.int64) - b.luma.astype(np.int64)))),
        a.luma.size)


def psnr_from_sse(sse: int, n_samples: int) -> float:
    mse = sse / n_samples
    if mse < _MSE_FLOOR:
        return PSNR_CAP
    return min(10.0 * np.log10(255.0 ** 2 / mse), PSNR_CAP)
