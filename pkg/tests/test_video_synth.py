import numpy as np
import pytest

from mscl.errors import (BadHeader, TruncatedFrame, UnsupportedColorspace)
from mscl.frame import Frame
from mscl.synth import SynthParams, VideoSequence, synth_generate
from mscl.video import read_raw, read_y4m, write_raw, write_y4m

from oracles import exhaustive_shift


class TestY4M:
    def test_header_parse_example(self):
        luma = np.zeros((288, 352), np.uint8)
        chroma = np.zeros((144, 176), np.uint8)
        payload = (b"YUV4MPEG2 W352 H288 F30:1 C420jpeg\n" +
                   b"FRAME\n" + luma.tobytes() + chroma.tobytes() * 2)
        seq = read_y4m(payload)
        assert (seq.width, seq.height) == (352, 288)
        assert seq.fps == (30, 1)
        assert seq.frames[0].has_chroma

    def test_mono_round_trip(self):
        frames = [Frame(np.random.default_rng(i).integers(0, 256, (32, 48),
                                                          np.uint8))
                  for i in range(3)]
        seq = VideoSequence(frames, (25, 1))
        back = read_y4m(write_y4m(seq))
        assert back.fps == (25, 1)
        assert len(back.frames) == 3
        for a, b in zip(frames, back.frames):
            assert np.array_equal(a.luma, b.luma)
            assert not b.has_chroma

    def test_chroma_round_trip(self):
        rng = np.random.default_rng(9)
        frames = [Frame(rng.integers(0, 256, (32, 48), np.uint8),
                        rng.integers(0, 256, (16, 24), np.uint8),
                        rng.integers(0, 256, (16, 24), np.uint8))
                  for _ in range(2)]
        back = read_y4m(write_y4m(VideoSequence(frames, (24000, 1001))))
        assert back.fps == (24000, 1001)
        for a, b in zip(frames, back.frames):
            assert np.array_equal(a.chroma_v, b.chroma_v)

    def test_default_colorspace_is_420(self):
        luma = np.zeros((16, 16), np.uint8)
        chroma = np.zeros((8, 8), np.uint8)
        seq = read_y4m(b"YUV4MPEG2 W16 H16 F30:1\nFRAME\n"
                       + luma.tobytes() + chroma.tobytes() * 2)
        assert seq.frames[0].has_chroma

    def test_bad_signature(self):
        with pytest.raises(BadHeader):
            read_y4m(b"JUNK W16 H16\n")

    def test_missing_dims(self):
        with pytest.raises(BadHeader):
            read_y4m(b"YUV4MPEG2 F30:1\nFRAME\n")

    def test_unsupported_colorspace(self):
        with pytest.raises(UnsupportedColorspace):
            read_y4m(b"YUV4MPEG2 W16 H16 C444\nFRAME\n" + b"\x00" * 768)

    def test_truncated_mid_frame_names_index(self):
        luma = np.zeros((16, 16), np.uint8)
        data = (b"YUV4MPEG2 W16 H16 Cmono\nFRAME\n" + luma.tobytes()
                + b"FRAME\n" + luma.tobytes()[:100])
        with pytest.raises(TruncatedFrame) as err:
            read_y4m(data)
        assert "frame 1" in str(err.value)

    def test_missing_frame_marker(self):
        with pytest.raises(TruncatedFrame):
            read_y4m(b"YUV4MPEG2 W16 H16 Cmono\nJUNK\n" + b"\x00" * 256)


class TestRaw:
    def test_round_trip_mono(self):
        frames = [Frame(np.random.default_rng(i).integers(0, 256, (24, 32),
                                                          np.uint8))
                  for i in range(4)]
        seq = VideoSequence(frames)
        back = read_raw(write_raw(seq), 32, 24, mono=True)
        for a, b in zip(frames, back.frames):
            assert np.array_equal(a.luma, b.luma)

    def test_bad_length(self):
        with pytest.raises(TruncatedFrame):
            read_raw(b"\x00" * 100, 32, 24, mono=True)


class TestSynth:
    def test_static_when_motionless(self):
        seq = synth_generate(SynthParams(48, 32, 3, (0.0, 0.0), "checker:8"))
        assert np.array_equal(seq.frames[0].luma, seq.frames[1].luma)
        assert np.array_equal(seq.frames[0].luma, seq.frames[2].luma)

    def test_integer_shift_relation_exact(self):
        seq = synth_generate(SynthParams(96, 48, 3, (24.0, 0.0), "checker:16"))
        f0, f1 = seq.frames[0].luma, seq.frames[1].luma
        assert np.array_equal(f1[:, 24:], f0[:, :-24])

    def test_subpixel_velocity_supported(self):
        seq = synth_generate(SynthParams(48, 32, 3, (0.5, 0.25), "gradient"))
        assert not np.array_equal(seq.frames[0].luma, seq.frames[1].luma)

    def test_determinism_and_seed_sensitivity(self):
        p = SynthParams(48, 32, 3, (2.0, 1.0), "noise:30", 3.0, 77)
        a = synth_generate(p)
        b = synth_generate(p)
        for fa, fb in zip(a.frames, b.frames):
            assert np.array_equal(fa.luma, fb.luma)
        c = synth_generate(SynthParams(48, 32, 3, (2.0, 1.0), "noise:30",
                                       3.0, 78))
        assert any(not np.array_equal(fa.luma, fc.luma)
                   for fa, fc in zip(a.frames, c.frames))

    def test_velocity_recoverable_by_shift_oracle(self):
        for vel in ((1.0, 0.0), (5.0, 0.0), (0.0, 3.0), (4.0, -2.0)):
            seq = synth_generate(SynthParams(96, 64, 2, vel, "noise:40"))
            u, v = exhaustive_shift(seq.frames[1].luma, seq.frames[0].luma, 8)
            # backward flow of the pair is -velocity
            assert abs(u + vel[0]) <= 0.5 and abs(v + vel[1]) <= 0.5

    def test_all_textures_render(self):
        for tex in ("checker", "checker:8", "noise", "noise:10",
                    "gradient", "mixed"):
            seq = synth_generate(SynthParams(80, 64, 2, (1.0, 1.0), tex,
                                             1.0, 5))
            assert seq.frames[0].luma.shape == (64, 80)

    def test_texture_validation(self):
        with pytest.raises(ValueError):
            SynthParams(32, 32, 2, texture="plasma")
        with pytest.raises(ValueError):
            SynthParams(32, 32, 1)
