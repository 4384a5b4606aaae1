"""Per-frame adaptive downsampling: candidate evaluation and factor selection.

For each frame pair every candidate factor d is scored by downsampling both
pictures by d, estimating flow there, bilinearly upsampling the field to full
resolution (values untouched, still in down-scaled units), multiplying by d
to reach scene scale, warping the reference, and taking the luma PSNR against
the current frame.  The factor with the best prediction PSNR wins; a small
hysteresis margin can keep the previous frame's factor, and a motion
threshold reverts to 1.0 when the scene barely moves.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import (CodeOutOfRange, FactorTooLarge, FrameTooSmall,
                     MissingCandidate, ScaleTagMismatch)
from .frame import (Frame, FlowField, _bilinear_taps, _flow_unchecked,
                    _resample_taps, downsample_frame, downsample_valid,
                    psnr_from_sse, upsample_flow_bilinear)
from .blockmatch import BlockMatchPredictor, mean_flow_magnitude

NUM_FACTORS = 32
FACTOR_STEP = 0.25

FlowPredictor = Callable[[Frame, Frame], FlowField]


@dataclass(frozen=True, order=True)
class DownsampleFactor:
    """One of the 32 candidate factors, bijective with a 5-bit index."""

    index: int

    def __post_init__(self):
        if not 0 <= self.index < NUM_FACTORS:
            raise CodeOutOfRange(f"factor index {self.index} not in [0, 31]")

    @property
    def value(self) -> float:
        return 1.0 + FACTOR_STEP * self.index

    @classmethod
    def from_value(cls, value: float) -> "DownsampleFactor":
        idx = int(round((value - 1.0) / FACTOR_STEP))
        if not 0 <= idx < NUM_FACTORS or abs(1.0 + FACTOR_STEP * idx - value) > 1e-9:
            raise ValueError(
                f"{value} is not one of the candidate factors "
                f"(1.0, 1.25, ..., 8.75)")
        return cls(idx)

    def __repr__(self):
        return f"DownsampleFactor({self.value})"


FACTOR_ONE = DownsampleFactor(0)


def all_factors() -> List[DownsampleFactor]:
    return [DownsampleFactor(i) for i in range(NUM_FACTORS)]


def encode_side_info(d: DownsampleFactor) -> int:
    """5-bit side-information code for a factor."""
    return d.index


def decode_side_info(code: int) -> DownsampleFactor:
    if not 0 <= code < NUM_FACTORS:
        raise CodeOutOfRange(f"side-info code {code} does not fit in 5 bits")
    return DownsampleFactor(code)


@dataclass(frozen=True)
class AdaptConfig:
    """Candidate set and toggles for the adaptive pipeline.

    enable_scaling: transmit the flow in down-scaled units and rescale at
    the decoder; off means the scene-scale field is coded directly.
    enable_bias: keep the previous factor unless the new best improves
    prediction PSNR by more than bias_margin.
    dref_pre_threshold: carry the pre-threshold selection (instead of the
    transmitted factor) into the next frame's hysteresis.
    """

    factors: Tuple[DownsampleFactor, ...] = tuple(
        DownsampleFactor(i) for i in range(NUM_FACTORS))
    motion_threshold: float = 5.0
    bias_margin: float = 0.1
    enable_adaptive: bool = True
    enable_scaling: bool = True
    enable_bias: bool = True
    dref_pre_threshold: bool = False

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("factor set must not be empty")
        if list(factors) != sorted(set(factors)):
            raise ValueError("factors must be strictly ascending and unique")
        if factors[0] != FACTOR_ONE:
            raise ValueError("factor set must contain 1.0")
        if self.motion_threshold < 0 or self.bias_margin < 0:
            raise ValueError("threshold and margin must be non-negative")
        object.__setattr__(self, "factors", factors)

    def restrict_to(self, factors) -> "AdaptConfig":
        return replace(self, factors=tuple(factors))


@dataclass(eq=False)
class CandidateEvaluation:
    """Outcome of probing one factor on one frame pair.

    The full-resolution fields are materialized on first access; losing
    candidates never need them.  flow_downscaled is the estimator output
    bilinearly upsampled to full resolution with values untouched;
    flow_scene is d.value times flow_downscaled."""

    d: DownsampleFactor
    prediction_psnr: float
    _flow_small: FlowField = None   # estimator output at its own resolution
    _target: Tuple[int, int] = None  # full (width, height)
    _mv: np.ndarray = None          # block-match grid, alternative source
    _mv_block: int = 8
    _small_dims: Tuple[int, int] = None
    _flow_downscaled: FlowField = None
    _flow_scene: FlowField = None

    def _small_field(self) -> FlowField:
        if self._flow_small is None:
            sw, sh = self._small_dims
            dense = np.empty((sh, sw, 2), dtype=np.float64)
            _kernels.expand_mv_dense(self._mv, self._mv_block, dense)
            self._flow_small = _flow_unchecked(dense, self.d.value)
        return self._flow_small

    @property
    def flow_downscaled(self) -> FlowField:
        if self._flow_downscaled is None:
            small = self._small_field()
            if (small.width, small.height) == self._target:
                self._flow_downscaled = small
            else:
                self._flow_downscaled = upsample_flow_bilinear(
                    small, self._target[0], self._target[1])
        return self._flow_downscaled

    @property
    def flow_scene(self) -> FlowField:
        if self._flow_scene is None:
            self._flow_scene = rescale_flow(self.flow_downscaled, self.d)
        return self._flow_scene


@dataclass(eq=False)
class FactorDecision:
    d_final: DownsampleFactor
    d_pre_threshold: DownsampleFactor
    selected_eval: CandidateEvaluation
    psnr_table: List[Tuple[DownsampleFactor, float]]
    select_seconds: float = 0.0


def rescale_flow(flow: FlowField, d: DownsampleFactor) -> FlowField:
    """Multiply a down-scaled field by its factor, yielding scene scale."""
    if flow.is_scene_scale or abs(flow.down_factor - d.value) > 1e-9:
        raise ScaleTagMismatch(
            f"flow tagged {flow.down_factor}, asked to rescale by {d.value}")
    return _flow_unchecked(flow.uv * d.value, None)


def downscale_flow(flow: FlowField, d: DownsampleFactor) -> FlowField:
    """Inverse of rescale_flow: divide a scene-scale field by d."""
    flow.require_scene_scale("downscaling")
    return _flow_unchecked(flow.uv / d.value, d.value)


@lru_cache(maxsize=256)
def _zero_grid(gh, gw):
    return np.zeros((gh, gw), dtype=np.int32)


@lru_cache(maxsize=512)
def _grid_taps(n_small, n_full, bs):
    """Bilinear taps mapped onto block-grid indices (values replicate
    within blocks, so tap index // bs addresses the grid directly)."""
    i0, frac = _bilinear_taps(n_small, n_full)
    i1 = np.minimum(i0 + 1, n_small - 1)
    return (np.ascontiguousarray((i0 // bs).astype(np.int32)),
            np.ascontiguousarray((i1 // bs).astype(np.int32)),
            frac)


def _fused_block_candidate(cur, ref, d, params) -> CandidateEvaluation:
    """evaluate_candidate specialised for the stock block matcher.

    Chains the same kernels the generic path uses, just with fewer Python
    round trips; results are bit-identical (asserted in the tests)."""
    W, H = cur.width, cur.height
    if d == FACTOR_ONE:
        sw, sh = W, H
        cur_i = np.empty((H, W), np.int32)
        ref_i = np.empty((H, W), np.int32)
        _kernels.plane_to_i32(cur.luma, cur_i)
        _kernels.plane_to_i32(ref.luma, ref_i)
    else:
        if not downsample_valid(W, H, d.value):
            raise FactorTooLarge(f"factor {d.value} invalid for {W}x{H}")
        sw = int(round(W / d.value))
        sh = int(round(H / d.value))
        yi, yw = _resample_taps(H, sh)
        xi, xw = _resample_taps(W, sw)
        rows_buf = np.empty((sh, W), dtype=np.float64)
        cols_buf = np.empty((sh, sw), dtype=np.float64)
        cur_i = np.empty((sh, sw), np.int32)
        ref_i = np.empty((sh, sw), np.int32)
        _kernels.downsample_to_i32(cur.luma, yi, yw, xi, xw,
                                   rows_buf, cols_buf, cur_i)
        _kernels.downsample_to_i32(ref.luma, yi, yw, xi, xw,
                                   rows_buf, cols_buf, ref_i)
    bs = params.block_size
    if sw < bs or sh < bs:
        raise FrameTooSmall(f"{sw}x{sh} smaller than block size {bs}")
    gh = (sh + bs - 1) // bs
    gw = (sw + bs - 1) // bs
    zeros = _zero_grid(gh, gw)
    mv = np.empty((gh, gw, 2), np.int32)
    _kernels.block_search(cur_i, ref_i, bs, params.search_radius,
                          zeros, zeros, mv)
    gx0, gx1, fx = _grid_taps(sw, W, bs)
    gy0, gy1, fy = _grid_taps(sh, H, bs)
    sse = _kernels.warp_grid_scaled_sse(mv, gx0, gx1, fx, gy0, gy1, fy,
                                        d.value, ref.luma, cur.luma)
    return CandidateEvaluation(d, psnr_from_sse(int(sse), W * H),
                               _target=(W, H), _mv=mv, _mv_block=bs,
                               _small_dims=(sw, sh))


def evaluate_candidate(cur: Frame, ref: Frame, d: DownsampleFactor,
                       predictor: FlowPredictor) -> CandidateEvaluation:
    """Estimate flow at factor d and score the resulting prediction.

    Scoring upsamples and rescales the field inside one fused kernel; the
    result is bit-identical to materializing the full-resolution fields."""
    if (isinstance(predictor, BlockMatchPredictor)
            and predictor.params.pyramid_levels == 1
            and not predictor.params.use_half_pel):
        return _fused_block_candidate(cur, ref, d, predictor.params)
    if d == FACTOR_ONE:
        raw = predictor(cur, ref)
        flow_small = _flow_unchecked(raw.uv, 1.0)
    else:
        small_cur = downsample_frame(cur, d.value)
        small_ref = downsample_frame(ref, d.value)
        raw = predictor(small_cur, small_ref)
        flow_small = _flow_unchecked(raw.uv, d.value)
    x0, fx = _bilinear_taps(flow_small.width, cur.width)
    y0, fy = _bilinear_taps(flow_small.height, cur.height)
    sse = _kernels.upsample_warp_scaled_sse(
        flow_small.uv, x0, fx, y0, fy, d.value, ref.luma, cur.luma)
    pred_psnr = psnr_from_sse(int(sse), cur.width * cur.height)
    return CandidateEvaluation(d, pred_psnr, _flow_small=flow_small,
                               _target=(cur.width, cur.height))


_POOLS = {}


def _pool(threads: int) -> ThreadPoolExecutor:
    if threads not in _POOLS:
        _POOLS[threads] = ThreadPoolExecutor(max_workers=threads)
    return _POOLS[threads]


def evaluate_candidates(cur: Frame, ref: Frame,
                        factors: Sequence[DownsampleFactor],
                        predictor: FlowPredictor,
                        threads: int = 1) -> List[CandidateEvaluation]:
    """Evaluate every factor; candidate order follows the factor order.

    Candidate probes are independent, so they fan out over a persistent
    thread pool in contiguous slices; results are reduced in factor order
    and do not depend on the worker count.
    """
    if threads > 1 and len(factors) > 1:
        # one task per factor, submitted cheapest-last: small factors mean
        # large search planes, so putting them first balances the workers
        pool = _pool(threads)
        futures = [pool.submit(evaluate_candidate, cur, ref, d, predictor)
                   for d in factors]
        return [f.result() for f in futures]
    return [evaluate_candidate(cur, ref, d, predictor) for d in factors]


def select_factor(evals: Sequence[CandidateEvaluation],
                  d_ref: DownsampleFactor,
                  config: AdaptConfig) -> DownsampleFactor:
    """Argmax of prediction PSNR with optional hysteresis toward d_ref.

    Ties break toward the smaller factor.  With bias enabled, d_ref is kept
    whenever the winner's PSNR gain over d_ref stays below bias_margin.
    """
    by_factor = {}
    for ev in evals:
        if ev.d in by_factor:
            raise MissingCandidate(f"duplicate evaluation for {ev.d}")
        by_factor[ev.d] = ev
    if set(by_factor) != set(config.factors):
        missing = sorted(set(config.factors) - set(by_factor))
        extra = sorted(set(by_factor) - set(config.factors))
        raise MissingCandidate(
            f"evaluations do not match the factor set "
            f"(missing {missing}, extra {extra})")
    if d_ref not in by_factor:
        raise MissingCandidate(f"reference factor {d_ref} not among candidates")

    d_opt = max(config.factors,
                key=lambda d: (by_factor[d].prediction_psnr, -d.value))
    if config.enable_bias:
        if by_factor[d_opt].prediction_psnr < (
                by_factor[d_ref].prediction_psnr + config.bias_margin):
            d_opt = d_ref
    return d_opt


def apply_motion_threshold(decision_d: DownsampleFactor,
                           flow_scene_of_d: FlowField,
                           config: AdaptConfig) -> DownsampleFactor:
    """Revert to factor 1.0 when mean scene-scale motion is below threshold."""
    flow_scene_of_d.require_scene_scale("the motion threshold")
    if mean_flow_magnitude(flow_scene_of_d) < config.motion_threshold:
        return FACTOR_ONE
    return decision_d


def decide_factor(cur: Frame, ref: Frame, d_ref: DownsampleFactor,
                  config: AdaptConfig, predictor: FlowPredictor,
                  threads: int = 1) -> FactorDecision:
    """Full per-frame selection: evaluate, argmax+bias, motion threshold.

    Factors invalid for the frame dimensions are skipped (they could not be
    evaluated, hence never win).  The d=1.0 evaluation is always present, so
    a threshold reset reuses the cached flow without re-estimating.
    """
    t0 = time.perf_counter()
    if not config.enable_adaptive:
        effective = config.restrict_to([FACTOR_ONE])
    else:
        effective = config.restrict_to(
            [d for d in config.factors
             if downsample_valid(cur.width, cur.height, d.value)])
    evals = evaluate_candidates(cur, ref, effective.factors, predictor, threads)
    by_factor = {ev.d: ev for ev in evals}
    if d_ref not in by_factor:
        d_ref = FACTOR_ONE
    d_sel = select_factor(evals, d_ref, effective)
    d_final = apply_motion_threshold(d_sel, by_factor[d_sel].flow_scene, effective)
    table = [(ev.d, ev.prediction_psnr) for ev in evals]
    return FactorDecision(d_final, d_sel, by_factor[d_final], table,
                          time.perf_counter() - t0)
