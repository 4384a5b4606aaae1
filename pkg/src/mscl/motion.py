"""Motion-vector grid coding on a fixed full-resolution 8x8 block grid.

Whatever the per-frame downsampling factor, the coded representation always
lives on the same grid derived from the frame dimensions; only the vector
values change units (down-scaled vs scene scale).  Vectors are quarter-pel
integers, predicted by the componentwise median of the left / above /
above-right neighbors and residual-coded as signed Exp-Golomb bins under
adaptive contexts.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels, rangecoder
from .errors import DimensionMismatch
from .frame import FlowField

GRID_BLOCK = 8
MV_LIMIT = 32767  # quarter-pel units
_NCTX_PREFIX = 20
_NCTX_SUFFIX = 20


@dataclass(eq=False)
class BlockMotionGrid:
    """Quarter-pel vectors, one per 8x8 block of the full-resolution frame."""

    width: int    # frame dims the grid was derived from
    height: int
    mv: np.ndarray  # int32 (grid_h, grid_w, 2)

    def __post_init__(self):
        gh, gw = grid_dims(self.width, self.height)
        mv = np.asarray(self.mv, dtype=np.int32)
        if mv.shape != (gh, gw, 2):
            raise DimensionMismatch(
                f"grid for {self.width}x{self.height} must be {gw}x{gh}")
        if np.abs(mv).max(initial=0) > MV_LIMIT:
            raise ValueError("motion vector exceeds quarter-pel limit")
        self.mv = np.ascontiguousarray(mv)

    @property
    def grid_w(self):
        return self.mv.shape[1]

    @property
    def grid_h(self):
        return self.mv.shape[0]


def grid_dims(width, height):
    return ((height + GRID_BLOCK - 1) // GRID_BLOCK,
            (width + GRID_BLOCK - 1) // GRID_BLOCK)


def _round_half_away(x):
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


def flow_to_grid(flow: FlowField) -> BlockMotionGrid:
    """Quantize a full-resolution flow field to the coded grid.

    Each block takes the flow value at its center pixel, times 4, rounded
    half away from zero.  The scale tag is not consulted: the same grid
    machinery carries down-scaled and scene-scale values.
    """
    gh, gw = grid_dims(flow.width, flow.height)
    # center pixel of each block; partial edge blocks use their clipped extent
    cy = np.array([y0 + (min(GRID_BLOCK, flow.height - y0) - 1) // 2
                   for y0 in range(0, gh * GRID_BLOCK, GRID_BLOCK)])
    cx = np.array([x0 + (min(GRID_BLOCK, flow.width - x0) - 1) // 2
                   for x0 in range(0, gw * GRID_BLOCK, GRID_BLOCK)])
    sampled = flow.uv[np.ix_(cy, cx)]
    mv = np.clip(_round_half_away(sampled * 4.0), -MV_LIMIT, MV_LIMIT)
    return BlockMotionGrid(flow.width, flow.height, mv.astype(np.int32))


def grid_to_flow(grid: BlockMotionGrid, down_factor=None) -> FlowField:
    """Expand a grid to a dense field by block replication (values / 4)."""
    dense = np.repeat(np.repeat(grid.mv, GRID_BLOCK, axis=0),
                      GRID_BLOCK, axis=1)[:grid.height, :grid.width]
    return FlowField(dense.astype(np.float64) * 0.25, down_factor)


def _motion_contexts():
    return (rangecoder.new_contexts(2, _NCTX_PREFIX),
            rangecoder.new_contexts(2, _NCTX_SUFFIX))


def encode_motion(grid: BlockMotionGrid) -> bytes:
    """Losslessly code a motion grid; returns the payload bytes."""
    pfx, sfx = _motion_contexts()
    # worst case ~7 bits/bin, <= ~40 bins per component
    cap = grid.grid_w * grid.grid_h * 2 * 40 + 64
    out = np.empty(cap, dtype=np.uint8)
    st = rangecoder.new_encoder_state()
    n = _kernels.encode_motion_grid(grid.mv, pfx, sfx, out, st)
    return bytes(out[:n])


def decode_motion(payload: bytes, width: int, height: int) -> BlockMotionGrid:
    gh, gw = grid_dims(width, height)
    pfx, sfx = _motion_contexts()
    st = rangecoder.new_decoder_state()
    data = rangecoder.as_byte_array(payload)
    mv = rangecoder.run_decoder(
        _kernels.decode_motion_grid, data, gh, gw, pfx, sfx, st)
    return BlockMotionGrid(width, height, mv)
