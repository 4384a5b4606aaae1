"""Default flow predictor: full-search block matching with a hard range cap.

The estimator deliberately emulates a learned flow network whose useful
motion range is bounded: displacements beyond ``search_radius`` per pyramid
level simply cannot be produced, so large true motion saturates.  That
failure mode is what the adaptive-downsampling machinery compensates for.

Contract for any flow predictor: a callable (cur, ref) -> FlowField at the
input resolution, deterministic, with the scale tag left for the caller to
assign (fields are produced scene-tagged at the resolution they were fed).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, FrameTooSmall, ScaleTagViolation
from .frame import Frame, FlowField, _flow_unchecked, resample_plane

_ALLOWED_BLOCK_SIZES = (4, 8, 16)


@dataclass(frozen=True)
class FlowPredictorParams:
    """Knobs of the block-matching predictor.

    search_radius caps the displacement per axis and per pyramid level;
    with L levels the reachable magnitude is sum(R * 2**l for l < L).
    """

    block_size: int = 8
    search_radius: int = 8
    pyramid_levels: int = 1
    use_half_pel: bool = False

    def __post_init__(self):
        if self.block_size not in _ALLOWED_BLOCK_SIZES:
            raise ValueError(f"block_size must be one of {_ALLOWED_BLOCK_SIZES}")
        if self.search_radius < 1:
            raise ValueError("search_radius must be >= 1")
        if self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be >= 1")


def estimate_flow_block(cur: Frame, ref: Frame, params: FlowPredictorParams) -> FlowField:
    """Dense flow from cur to ref by per-block SAD search on luma.

    Each block takes the displacement minimizing SAD over the
    (2R+1)^2 integer window; candidates whose displaced window leaves the
    frame are skipped.  Ties break by smaller |(u,v)|_2, then by window scan
    order (v ascending, then u ascending).  Every pixel inherits its block's
    vector.  With pyramid_levels > 1 the search runs coarse to fine, each
    level seeded with the doubled parent vectors.
    """
    if (cur.width, cur.height) != (ref.width, ref.height):
        raise DimensionMismatch(
            f"{cur.width}x{cur.height} vs {ref.width}x{ref.height}")
    bs = params.block_size
    if cur.width < bs or cur.height < bs:
        raise FrameTooSmall(
            f"{cur.width}x{cur.height} smaller than block size {bs}")

    levels = 1
    while (levels < params.pyramid_levels
           and min(cur.width, cur.height) >> levels >= bs):
        levels += 1

    cur_planes = [cur.luma]
    ref_planes = [ref.luma]
    for lv in range(1, levels):
        w = cur.width >> lv
        h = cur.height >> lv
        cur_planes.append(resample_plane(cur.luma, w, h))
        ref_planes.append(resample_plane(ref.luma, w, h))

    mv = None
    for lv in range(levels - 1, -1, -1):
        cp = np.empty(cur_planes[lv].shape, np.int32)
        rp = np.empty(ref_planes[lv].shape, np.int32)
        _kernels.plane_to_i32(cur_planes[lv], cp)
        _kernels.plane_to_i32(ref_planes[lv], rp)
        h, w = cp.shape
        gh = (h + bs - 1) // bs
        gw = (w + bs - 1) // bs
        init_u = np.zeros((gh, gw), dtype=np.int32)
        init_v = np.zeros((gh, gw), dtype=np.int32)
        if mv is not None:
            for by in range(gh):
                for bx in range(gw):
                    pu = mv[min(by // 2, mv.shape[0] - 1),
                            min(bx // 2, mv.shape[1] - 1)]
                    init_u[by, bx] = 2 * pu[0]
                    init_v[by, bx] = 2 * pu[1]
        mv = np.empty((gh, gw, 2), dtype=np.int32)
        _kernels.block_search(cp, rp, bs, params.search_radius,
                              init_u, init_v, mv)

    if params.use_half_pel:
        refined = np.empty(mv.shape, dtype=np.float64)
        _kernels.halfpel_refine(cp, rp, bs, mv, refined)
        mv = refined
    dense = np.empty((cur.height, cur.width, 2), dtype=np.float64)
    _kernels.expand_mv_dense(mv, bs, dense)
    return _flow_unchecked(dense, None)


@dataclass(frozen=True)
class BlockMatchPredictor:
    """Callable wrapper satisfying the flow-predictor contract."""

    params: FlowPredictorParams = FlowPredictorParams()

    def __call__(self, cur: Frame, ref: Frame) -> FlowField:
        return estimate_flow_block(cur, ref, self.params)


def mean_flow_magnitude(flow: FlowField) -> float:
    """Mean of sqrt(u^2 + v^2) over all pixels of a scene-scale field."""
    if not flow.is_scene_scale:
        raise ScaleTagViolation(
            "motion magnitude is defined on scene-scale flow; rescale first")
    return float(np.mean(np.hypot(flow.uv[:, :, 0], flow.uv[:, :, 1])))
