"""Performance predictors and Bjontegaard rate comparison.

Scene texture complexity: PSNR after a 4x bicubic down/up round trip of a
frame; lower values mean more fine texture.  Motion statistics are reported
from two estimators: the factor-adaptive one (candidate search over the
configured factor set, best prediction PSNR wins) and the plain fixed-
resolution estimate, whose hard range cap makes it saturate on large motion.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from .adaptive import AdaptConfig, FACTOR_ONE, evaluate_candidates
from .blockmatch import mean_flow_magnitude
from .errors import FrameTooSmall, NoOverlap, TooFewPoints
from .frame import Frame, downsample_frame, downsample_valid, psnr, resample_frame

COMPLEXITY_FACTOR = 4.0
_MIN_COMPLEXITY_DIM = 64


def scene_complexity(frame: Frame) -> float:
    """PSNR (dB) of the frame against its 4x bicubic down/up round trip."""
    if frame.width < _MIN_COMPLEXITY_DIM or frame.height < _MIN_COMPLEXITY_DIM:
        raise FrameTooSmall(
            f"complexity needs at least {_MIN_COMPLEXITY_DIM} px per side")
    small = downsample_frame(frame, COMPLEXITY_FACTOR)
    restored = resample_frame(small, frame.width, frame.height)
    return psnr(frame, restored)


@dataclass
class SequenceStats:
    avg_motion_magnitude: float            # adaptive estimate, px
    avg_motion_direct: float               # fixed d=1 estimate, px
    scene_complexity: Optional[float]      # mean dB, None for tiny frames
    per_frame_motion: List[float]
    per_frame_motion_direct: List[float]
    per_frame_complexity: List[float]


def sequence_motion_stats(frames: Sequence[Frame], predictor,
                          config: AdaptConfig = AdaptConfig(),
                          threads: int = 1) -> SequenceStats:
    """Per-pair motion magnitudes plus per-frame complexity.

    For each consecutive pair the adaptive estimate evaluates every valid
    candidate factor and keeps the scene-scale flow of the prediction-PSNR
    argmax (no hysteresis, no threshold: this is measurement, not coding).
    The direct estimate is the d=1 flow of the same pair.
    """
    if len(frames) < 2:
        raise ValueError("motion statistics need at least 2 frames")
    first = frames[0]
    factors = [d for d in config.factors
               if downsample_valid(first.width, first.height, d.value)]
    motion = []
    direct = []
    for t in range(1, len(frames)):
        cur, ref = frames[t], frames[t - 1]
        evals = evaluate_candidates(cur, ref, factors, predictor, threads)
        best = max(evals, key=lambda ev: (ev.prediction_psnr, -ev.d.value))
        motion.append(mean_flow_magnitude(best.flow_scene))
        d1 = next(ev for ev in evals if ev.d == FACTOR_ONE)
        direct.append(mean_flow_magnitude(d1.flow_scene))

    complexity: List[float] = []
    if (first.width >= _MIN_COMPLEXITY_DIM
            and first.height >= _MIN_COMPLEXITY_DIM):
        complexity = [scene_complexity(f) for f in frames]
    return SequenceStats(
        float(np.mean(motion)), float(np.mean(direct)),
        float(np.mean(complexity)) if complexity else None,
        motion, direct, complexity)


# --- Bjontegaard rate difference ----------------------------------------------

@dataclass(frozen=True)
class RdCurve:
    """(bits-per-pixel, PSNR) samples of one codec configuration."""

    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple(sorted((float(b), float(p)) for b, p in self.points))
        if len(pts) < 2:
            raise ValueError("a curve needs at least two points")
        for (b0, p0), (b1, p1) in zip(pts, pts[1:]):
            if b1 <= b0:
                raise ValueError("duplicate or non-increasing bpp values")
            if p1 <= p0:
                raise ValueError("PSNR must increase with rate")
        object.__setattr__(self, "points", pts)

    @property
    def bpp(self):
        return np.array([b for b, _ in self.points])

    @property
    def psnr(self):
        return np.array([p for _, p in self.points])


@dataclass(frozen=True)
class BdRateResult:
    percent: float
    overlap_low: float
    overlap_high: float


def _log_rate_integral_pchip(curve: RdCurve, lo, hi):
    interp = PchipInterpolator(curve.psnr, np.log10(curve.bpp))
    return float(interp.integrate(lo, hi))


def _log_rate_integral_polyfit(curve: RdCurve, lo, hi):
    poly = np.polynomial.Polynomial.fit(curve.psnr, np.log10(curve.bpp), 3)
    integ = poly.integ()
    return float(integ(hi) - integ(lo))


def bd_rate(anchor: RdCurve, test: RdCurve, method: str = "pchip") -> BdRateResult:
    """Average rate difference of test vs anchor at equal quality, percent.

    log10(bpp) is interpolated as a function of PSNR (monotone piecewise
    cubic by default, classic cubic polynomial fit with method="polyfit"),
    the difference is integrated over the shared PSNR interval, and the
    mean log offset is mapped back: negative means test needs fewer bits.
    """
    for curve in (anchor, test):
        if len(curve.points) < 4:
            raise TooFewPoints("BD-rate needs at least 4 points per curve")
    lo = max(anchor.psnr.min(), test.psnr.min())
    hi = min(anchor.psnr.max(), test.psnr.max())
    if hi <= lo:
        raise NoOverlap(f"PSNR ranges do not overlap ({lo:.2f} vs {hi:.2f})")
    if method == "pchip":
        ia = _log_rate_integral_pchip(anchor, lo, hi)
        it = _log_rate_integral_pchip(test, lo, hi)
    elif method == "polyfit":
        ia = _log_rate_integral_polyfit(anchor, lo, hi)
        it = _log_rate_integral_polyfit(test, lo, hi)
    else:
        raise ValueError(f"unknown method {method!r}")
    avg_diff = (it - ia) / (hi - lo)
    return BdRateResult((10.0 ** avg_diff - 1.0) * 100.0, lo, hi)
