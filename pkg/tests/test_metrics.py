import numpy as np
import pytest

from mscl.blockmatch import BlockMatchPredictor, FlowPredictorParams
from mscl.errors import FrameTooSmall, NoOverlap, TooFewPoints
from mscl.frame import Frame
from mscl.metrics import (RdCurve, bd_rate, scene_complexity,
                          sequence_motion_stats)
from mscl.synth import SynthParams, synth_generate

from oracles import bd_rate_trapezoid


class TestComplexity:
    def test_constant_frame_is_ceiling(self):
        f = Frame(np.full((64, 64), 77, np.uint8))
        assert scene_complexity(f) == 99.0

    def test_noise_rougher_than_gradient(self):
        noise = synth_generate(SynthParams(128, 96, 2, texture="noise:40")).frames[0]
        smooth = synth_generate(SynthParams(128, 96, 2, texture="gradient")).frames[0]
        c_noise = scene_complexity(noise)
        c_smooth = scene_complexity(smooth)
        assert c_noise + 10.0 <= c_smooth

    def test_offset_invariance_without_clipping(self):
        rng = np.random.default_rng(3)
        base = rng.integers(60, 180, (64, 64)).astype(np.uint8)
        f = Frame(base)
        g = Frame((base + 17).astype(np.uint8))
        assert scene_complexity(f) == scene_complexity(g)

    def test_too_small(self):
        with pytest.raises(FrameTooSmall):
            scene_complexity(Frame(np.zeros((32, 64), np.uint8)))


class TestMotionStats:
    def test_static_sequence(self):
        frames = synth_generate(
            SynthParams(64, 64, 4, (0.0, 0.0), "checker:8")).frames
        stats = sequence_motion_stats(frames, BlockMatchPredictor())
        assert stats.avg_motion_magnitude <= 0.1
        assert stats.avg_motion_direct <= 0.1

    def test_three_four_velocity(self):
        frames = synth_generate(
            SynthParams(96, 80, 4, (3.0, 4.0), "noise:40")).frames
        stats = sequence_motion_stats(frames, BlockMatchPredictor())
        assert abs(stats.avg_motion_magnitude - 5.0) <= 0.5

    def test_saturation_gap_on_large_motion(self):
        frames = synth_generate(
            SynthParams(256, 96, 4, (24.0, 0.0), "noise:40", 0.0, 3)).frames
        stats = sequence_motion_stats(frames, BlockMatchPredictor(
            FlowPredictorParams(search_radius=8)))
        assert abs(stats.avg_motion_magnitude - 24.0) <= 1.0
        assert stats.avg_motion_direct <= 8 * np.sqrt(2)

    def test_reversal_invariance(self):
        frames = synth_generate(
            SynthParams(96, 80, 4, (2.0, 2.0), "noise:40")).frames
        fwd = sequence_motion_stats(frames, BlockMatchPredictor())
        rev = sequence_motion_stats(frames[::-1], BlockMatchPredictor())
        assert abs(fwd.avg_motion_magnitude - rev.avg_motion_magnitude) <= 0.5

    def test_aggregates_match_per_frame_lists(self):
        frames = synth_generate(
            SynthParams(80, 80, 5, (1.0, 0.0), "checker:12", 1.0, 9)).frames
        stats = sequence_motion_stats(frames, BlockMatchPredictor())
        assert stats.avg_motion_magnitude == pytest.approx(
            np.mean(stats.per_frame_motion))
        assert stats.scene_complexity == pytest.approx(
            np.mean(stats.per_frame_complexity))
        assert len(stats.per_frame_motion) == 4
        assert len(stats.per_frame_complexity) == 5


def _curve(pts):
    return RdCurve(tuple(pts))


BASE = [(0.05, 30.0), (0.10, 33.0), (0.20, 36.0), (0.40, 39.0)]


class TestBdRate:
    def test_identical_curves_zero(self):
        r = bd_rate(_curve(BASE), _curve(BASE))
        assert abs(r.percent) < 1e-9
        assert r.overlap_high > r.overlap_low

    def test_uniform_rate_scale_is_exact(self):
        test = [(b * 1.10, p) for b, p in BASE]
        r = bd_rate(_curve(BASE), _curve(test))
        assert abs(r.percent - 10.0) < 0.1
        r2 = bd_rate(_curve(BASE), _curve(test), method="polyfit")
        assert abs(r2.percent - 10.0) < 0.1

    def test_matches_dense_trapezoid_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            psnr_a = np.sort(rng.uniform(28, 42, 4))
            psnr_t = psnr_a + rng.uniform(-1.0, 1.0, 4)
            psnr_t.sort()
            bpp_a = np.exp(np.sort(rng.uniform(-3.0, -0.5, 4)))
            bpp_t = np.exp(np.sort(rng.uniform(-3.0, -0.5, 4)))
            a = list(zip(bpp_a, psnr_a))
            t = list(zip(bpp_t, psnr_t))
            got = bd_rate(_curve(a), _curve(t)).percent
            want = bd_rate_trapezoid(a, t)
            assert got == pytest.approx(want, abs=max(0.002 * abs(want), 1e-6))

    def test_antisymmetry(self):
        test = [(b * rng_f, p) for (b, p), rng_f in
                zip(BASE, (1.2, 1.15, 1.25, 1.1))]
        fwd = bd_rate(_curve(BASE), _curve(test)).percent
        bwd = bd_rate(_curve(test), _curve(BASE)).percent
        product = (1 + fwd / 100.0) * (1 + bwd / 100.0)
        assert abs(product - 1.0) <= 0.005

    def test_no_overlap(self):
        far = [(b, p + 20.0) for b, p in BASE]
        with pytest.raises(NoOverlap):
            bd_rate(_curve(BASE), _curve(far))

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            bd_rate(_curve(BASE[:3]), _curve(BASE))

    def test_curve_validation(self):
        with pytest.raises(ValueError):
            _curve([(0.1, 30.0), (0.1, 31.0), (0.2, 32.0), (0.3, 33.0)])
        with pytest.raises(ValueError):
            _curve([(0.1, 30.0), (0.2, 29.0), (0.3, 32.0), (0.4, 33.0)])
