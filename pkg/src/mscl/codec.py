"""P-frame / intra coding pipelines and the sequence-level drivers.

Encoder closed loop: motion search and factor selection run against the
previously *reconstructed* frame; the transmitted flow is re-derived from
the coded grid, so encoder reconstruction and decoder output are bit-equal
by construction.

With scaling enabled the grid carries down-scaled vector values and the
decoder multiplies the decoded field by the transmitted factor; with
scaling disabled the grid carries scene-scale values directly (larger
integers, more motion bits when motion is large).
"""

import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import container
from .adaptive import (AdaptConfig, DownsampleFactor, FACTOR_ONE,
                       FactorDecision, decide_factor, evaluate_candidate,
                       rescale_flow)
from .blockmatch import BlockMatchPredictor, FlowPredictorParams, mean_flow_magnitude
from .container import (COLOR_420, COLOR_MONO, FLAG_ADAPTIVE, FLAG_BIAS,
                        FLAG_SCALING, FRAME_INTRA, FRAME_PREDICTED,
                        FrameRecord, StreamHeader)
from .errors import BadFactorIndex, CorruptPayload, DimensionMismatch
from .frame import Frame, backward_warp, chroma_dims, psnr
from .motion import (BlockMotionGrid, decode_motion, encode_motion,
                     flow_to_grid, grid_to_flow)
from .residual import (Quantizer, ResidualDecoder, ResidualEncoder,
                       payload_cap, quantize_plane, reconstruct_plane)

SIDE_INFO_BITS = 5


@dataclass
class FrameStats:
    frame_idx: int
    frame_type: str              # "I" or "P"
    d_value: float
    motion_bits: int
    residual_bits: int
    side_bits: int
    prediction_psnr: Optional[float]
    reconstruction_psnr: float
    motion_mean_px: float        # mean scene-scale |mv| of the coded flow
    select_ms: float
    code_ms: float


@dataclass
class EncodedFrame:
    frame_type: int
    d_index: int
    motion_payload: bytes
    residual_payload: bytes
    stats: FrameStats

    def record(self) -> FrameRecord:
        return FrameRecord(self.frame_type, self.d_index,
                           self.motion_payload, self.residual_payload)


def _plane_shapes(frame: Frame):
    shapes = [(frame.height, frame.width)]
    if frame.has_chroma:
        ch, cw = chroma_dims(frame.width, frame.height)
        shapes += [(ch, cw), (ch, cw)]
    return shapes


def _encode_residual_planes(cur: Frame, pred: Frame, q: Quantizer):
    """Code cur-pred plane by plane; returns (payload, reconstructed frame)."""
    enc = ResidualEncoder(payload_cap(*_plane_shapes(cur)))
    planes = [("luma", cur.luma, pred.luma)]
    if cur.has_chroma:
        planes += [("chroma", cur.chroma_u, pred.chroma_u),
                   ("chroma", cur.chroma_v, pred.chroma_v)]
    rec_planes = []
    for kind, cplane, pplane in planes:
        resid = cplane.astype(np.float64) - pplane.astype(np.float64)
        qc = quantize_plane(resid, q)
        enc.encode_plane(qc, kind)
        rec_planes.append(reconstruct_plane(pplane, qc, q))
    payload = enc.finish()
    if cur.has_chroma:
        rec = Frame(rec_planes[0], rec_planes[1], rec_planes[2])
    else:
        rec = Frame(rec_planes[0])
    return payload, rec


def _decode_residual_planes(payload: bytes, pred: Frame, q: Quantizer) -> Frame:
    dec = ResidualDecoder(payload)
    planes = [("luma", pred.luma)]
    if pred.has_chroma:
        planes += [("chroma", pred.chroma_u), ("chroma", pred.chroma_v)]
    rec_planes = []
    for kind, pplane in planes:
        h, w = pplane.shape
        nblocks = ((h + 7) // 8) * ((w + 7) // 8)
        qc = dec.decode_plane(nblocks, kind)
        rec_planes.append(reconstruct_plane(pplane, qc, q))
    if pred.has_chroma:
        return Frame(rec_planes[0], rec_planes[1], rec_planes[2])
    return Frame(rec_planes[0])


def _gray_like(frame: Frame) -> Frame:
    luma = np.full((frame.height, frame.width), 128, dtype=np.uint8)
    if not frame.has_chroma:
        return Frame(luma)
    ch, cw = chroma_dims(frame.width, frame.height)
    return Frame(luma, np.full((ch, cw), 128, dtype=np.uint8),
                 np.full((ch, cw), 128, dtype=np.uint8))


def encode_frame_intra(cur: Frame, q: Quantizer) -> Tuple[EncodedFrame, Frame]:
    """DCT-code the picture against a flat mid-gray prediction."""
    t0 = time.perf_counter()
    payload, rec = _encode_residual_planes(cur, _gray_like(cur), q)
    stats = FrameStats(0, "I", 1.0, 0, len(payload) * 8, 0, None,
                       psnr(cur, rec), 0.0, 0.0,
                       (time.perf_counter() - t0) * 1e3)
    enc = EncodedFrame(FRAME_INTRA, 0, b"", payload, stats)
    return enc, rec


def _motion_compensate(grid: BlockMotionGrid, d: DownsampleFactor,
                       scaling: bool, ref_rec: Frame):
    """Shared path: grid -> dense flow -> (rescale by d) -> warp.

    Returns (prediction frame, scene-scale flow).  Used identically by the
    encoder's closed loop and the decoder, which keeps them bit-equal."""
    if scaling:
        flow = grid_to_flow(grid, down_factor=d.value)
        flow = rescale_flow(flow, d)
    else:
        flow = grid_to_flow(grid, down_factor=None)
    pred = backward_warp(ref_rec, flow, include_chroma=ref_rec.has_chroma)
    return pred, flow


def encode_frame_p(cur: Frame, ref_rec: Frame, config: AdaptConfig,
                   q: Quantizer, predictor, d_ref: DownsampleFactor,
                   threads: int = 1,
                   forced_d: Optional[DownsampleFactor] = None
                   ) -> Tuple[EncodedFrame, Frame, DownsampleFactor]:
    """Encode one predicted frame; returns (coded frame, reconstruction,
    factor to carry as next frame's d_ref)."""
    if (cur.width, cur.height) != (ref_rec.width, ref_rec.height):
        raise DimensionMismatch("current/reference dimensions differ")

    if forced_d is not None:
        t0 = time.perf_counter()
        ev = evaluate_candidate(cur, ref_rec, forced_d, predictor)
        decision = FactorDecision(forced_d, forced_d, ev,
                                  [(forced_d, ev.prediction_psnr)],
                                  time.perf_counter() - t0)
    else:
        decision = decide_factor(cur, ref_rec, d_ref, config, predictor, threads)

    t1 = time.perf_counter()
    d = decision.d_final
    ev = decision.selected_eval
    if config.enable_scaling:
        grid = flow_to_grid(ev.flow_downscaled)
    else:
        grid = flow_to_grid(ev.flow_scene)
    motion_payload = encode_motion(grid)

    pred, flow_rec = _motion_compensate(grid, d, config.enable_scaling, ref_rec)
    residual_payload, rec = _encode_residual_planes(cur, pred, q)

    code_ms = (time.perf_counter() - t1) * 1e3
    stats = FrameStats(
        0, "P", d.value, len(motion_payload) * 8, len(residual_payload) * 8,
        SIDE_INFO_BITS, psnr(cur, pred), psnr(cur, rec),
        mean_flow_magnitude(flow_rec), decision.select_seconds * 1e3, code_ms)
    enc = EncodedFrame(FRAME_PREDICTED, d.index, motion_payload,
                       residual_payload, stats)
    next_dref = decision.d_pre_threshold if config.dref_pre_threshold else d
    return enc, rec, next_dref


def decode_frame_p(record: FrameRecord, ref_rec: Frame,
                   header: StreamHeader) -> Tuple[Frame, float]:
    """Decode one predicted frame; returns (frame, mean scene-scale |mv|)."""
    if record.frame_type != FRAME_PREDICTED:
        raise CorruptPayload("record is not a predicted frame")
    if record.d_index >= 32:
        raise BadFactorIndex(f"factor index {record.d_index}")
    d = DownsampleFactor(record.d_index)
    q = Quantizer(header.qp)
    grid = decode_motion(record.motion_payload, header.width, header.height)
    pred, flow = _motion_compensate(grid, d, header.scaling, ref_rec)
    rec = _decode_residual_planes(record.residual_payload, pred, q)
    return rec, mean_flow_magnitude(flow)


def decode_frame_intra(record: FrameRecord, header: StreamHeader) -> Frame:
    if record.frame_type != FRAME_INTRA:
        raise CorruptPayload("record is not an intra frame")
    if record.motion_payload:
        raise CorruptPayload("intra frame carries a motion payload")
    w, h = header.width, header.height
    luma = np.full((h, w), 128, dtype=np.uint8)
    if header.colorspace == COLOR_420:
        ch, cw = chroma_dims(w, h)
        pred = Frame(luma, np.full((ch, cw), 128, np.uint8),
                     np.full((ch, cw), 128, np.uint8))
    else:
        pred = Frame(luma)
    q = Quantizer(header.qp)
    return _decode_residual_planes(record.residual_payload, pred, q)


# --- sequence drivers ---------------------------------------------------------

@dataclass
class EncodeResult:
    stream: bytes
    stats: List[FrameStats]
    d_values: List[float]        # transmitted factor per P frame
    width: int
    height: int

    @property
    def total_bits(self):
        return sum(s.motion_bits + s.residual_bits + s.side_bits
                   for s in self.stats)

    @property
    def bpp(self):
        return self.total_bits / (self.width * self.height * len(self.stats))

    @property
    def mean_psnr(self):
        return float(np.mean([s.reconstruction_psnr for s in self.stats]))

    @property
    def mean_prediction_psnr(self):
        vals = [s.prediction_psnr for s in self.stats if s.prediction_psnr is not None]
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def motion_bits(self):
        return sum(s.motion_bits for s in self.stats)


def _config_flags(config: AdaptConfig) -> int:
    flags = 0
    if config.enable_adaptive:
        flags |= FLAG_ADAPTIVE
    if config.enable_scaling:
        flags |= FLAG_SCALING
    if config.enable_bias:
        flags |= FLAG_BIAS
    return flags


def encode_sequence(frames: Sequence[Frame], qp: int,
                    config: AdaptConfig = AdaptConfig(),
                    params: FlowPredictorParams = FlowPredictorParams(),
                    fps: Tuple[int, int] = (30, 1),
                    threads: int = 1,
                    force_factors: Optional[Sequence[DownsampleFactor]] = None
                    ) -> EncodeResult:
    """Encode a frame list: one intra frame, then a closed P chain.

    force_factors, when given, must hold one factor per P frame and
    bypasses selection entirely (used for paired ablation runs)."""
    if not frames:
        raise ValueError("cannot encode an empty sequence")
    first = frames[0]
    for f in frames[1:]:
        if (f.width, f.height, f.has_chroma) != (
                first.width, first.height, first.has_chroma):
            raise DimensionMismatch("all frames must share dims and colorspace")
    if force_factors is not None and len(force_factors) != len(frames) - 1:
        raise ValueError("force_factors needs one entry per predicted frame")

    q = Quantizer(qp)
    predictor = BlockMatchPredictor(params)
    records = []
    stats: List[FrameStats] = []
    d_values: List[float] = []

    enc, rec = encode_frame_intra(first, q)
    enc.stats.frame_idx = 0
    records.append(enc.record())
    stats.append(enc.stats)

    d_ref = FACTOR_ONE
    for i, cur in enumerate(frames[1:], start=1):
        forced = force_factors[i - 1] if force_factors is not None else None
        enc, rec, d_ref = encode_frame_p(cur, rec, config, q, predictor,
                                         d_ref, threads, forced)
        enc.stats.frame_idx = i
        records.append(enc.record())
        stats.append(enc.stats)
        d_values.append(enc.stats.d_value)

    header = StreamHeader(
        first.width, first.height, len(frames),
        COLOR_420 if first.has_chroma else COLOR_MONO, qp,
        _config_flags(config), fps[0], fps[1])
    return EncodeResult(container.write_stream(header, records), stats,
                        d_values, first.width, first.height)


@dataclass
class DecodeResult:
    frames: List[Frame]
    header: StreamHeader
    d_values: List[float]
    motion_means: List[float]    # scene-scale mean |mv| per P frame

    @property
    def fps(self):
        return (self.header.fps_num, self.header.fps_den)


def decode_sequence(data: bytes) -> DecodeResult:
    header, records = container.read_stream(data)
    frames: List[Frame] = []
    d_values: List[float] = []
    motion_means: List[float] = []
    ref: Optional[Frame] = None
    for i, rec in enumerate(records):
        if rec.frame_type == FRAME_INTRA:
            ref = decode_frame_intra(rec, header)
        else:
            if ref is None:
                raise CorruptPayload("predicted frame before any intra frame")
            ref, mm = decode_frame_p(rec, ref, header)
            d_values.append(DownsampleFactor(rec.d_index).value)
            motion_means.append(mm)
        frames.append(ref)
    return DecodeResult(frames, header, d_values, motion_means)
