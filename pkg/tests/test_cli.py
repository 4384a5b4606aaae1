import csv

import numpy as np
import pytest

from mscl import container
from mscl.cli import main
from mscl.frame import psnr
from mscl.video import read_y4m


def _run(*argv):
    return main(list(argv))


def _synth(tmp_path, name="clip.y4m", size="96x64", frames=5, motion="2,0",
           texture="noise:30", noise="1", seed="3"):
    path = tmp_path / name
    code = _run("synth", "--size", size, "--frames", str(frames),
                "--motion", motion, "--texture", texture, "--noise", noise,
                "--seed", seed, "--output", str(path))
    assert code == 0
    return path


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestRoundTrip:
    def test_encode_decode_psnr_matches_report(self, tmp_path, capsys):
        clip = _synth(tmp_path)
        stream = tmp_path / "out.mscl"
        report = tmp_path / "report.csv"
        assert _run("encode", "--input", str(clip), "--output", str(stream),
                    "--qp", "24", "--report", str(report)) == 0
        out_y4m = tmp_path / "dec.y4m"
        assert _run("decode", "--input", str(stream),
                    "--output", str(out_y4m)) == 0
        src = read_y4m(clip.read_bytes())
        dec = read_y4m(out_y4m.read_bytes())
        rows = [r for r in _read_csv(report) if r["frame_idx"] != "summary"]
        for row, a, b in zip(rows, src.frames, dec.frames):
            assert psnr(a, b) == pytest.approx(
                float(row["reconstruction_psnr"]), abs=1e-4)

    def test_report_has_timing_columns(self, tmp_path):
        clip = _synth(tmp_path)
        report = tmp_path / "report.csv"
        assert _run("encode", "--input", str(clip), "--output",
                    str(tmp_path / "o.mscl"), "--report", str(report)) == 0
        rows = _read_csv(report)
        assert "select_ms" in rows[0] and "code_ms" in rows[0]
        assert rows[-1]["frame_idx"] == "summary"

    def test_summary_line_format(self, tmp_path, capsys):
        clip = _synth(tmp_path)
        assert _run("encode", "--input", str(clip), "--output",
                    str(tmp_path / "o.mscl")) == 0
        out = capsys.readouterr().out
        assert "bpp=" in out and "psnr=" in out


class TestFlagEquivalences:
    def test_adaptive_off_equals_factors_one(self, tmp_path):
        clip = _synth(tmp_path, motion="4,0")
        a = tmp_path / "a.mscl"
        b = tmp_path / "b.mscl"
        assert _run("encode", "--input", str(clip), "--output", str(a),
                    "--adaptive", "off") == 0
        assert _run("encode", "--input", str(clip), "--output", str(b),
                    "--adaptive", "on", "--factors", "1.0") == 0
        da, db = a.read_bytes(), b.read_bytes()
        assert da[container.HEADER_SIZE:] == db[container.HEADER_SIZE:]
        assert da != db  # header flag bits differ

    def test_factor_subset_side_info_still_5_bits(self, tmp_path):
        clip = _synth(tmp_path, motion="6,0")
        out = tmp_path / "o.mscl"
        assert _run("encode", "--input", str(clip), "--output", str(out),
                    "--factors", "1.0,2.0,4.0,8.0") == 0
        header, records = container.read_stream(out.read_bytes())
        for rec in records[1:]:
            assert 0 <= rec.d_index < 32
            assert rec.d_index in (0, 4, 12, 28)  # indices of the subset


class TestAnalyze:
    def test_static_and_moving(self, tmp_path, capsys):
        clip = _synth(tmp_path, motion="0,0", noise="0")
        report = tmp_path / "an.csv"
        assert _run("analyze", "--input", str(clip), "--report",
                    str(report)) == 0
        rows = _read_csv(report)
        assert rows[-1]["frame_idx"] == "summary"
        assert float(rows[-1]["motion_adaptive"]) <= 0.1
        out = capsys.readouterr().out
        assert "motion_adaptive=" in out


class TestRdAndBdrate:
    def test_rd_sweep_monotone_and_stable(self, tmp_path):
        clip = _synth(tmp_path, size="64x48", frames=4)
        out1 = tmp_path / "rd1.csv"
        out2 = tmp_path / "rd2.csv"
        assert _run("rd", "--input", str(clip), "--qps", "12,24,48,96",
                    "--out", str(out1)) == 0
        assert _run("rd", "--input", str(clip), "--qps", "12,24,48,96",
                    "--out", str(out2)) == 0
        assert out1.read_bytes() == out2.read_bytes()
        rows = _read_csv(out1)
        assert len(rows) == 4
        bpps = [float(r["bpp"]) for r in rows]
        psnrs = [float(r["psnr"]) for r in rows]
        assert bpps == sorted(bpps, reverse=True)      # qp up, bpp down
        assert psnrs == sorted(psnrs, reverse=True)    # qp up, psnr down

    def test_bdrate_identity_and_scale(self, tmp_path, capsys):
        base = [(0.05, 30.0), (0.10, 33.0), (0.20, 36.0), (0.40, 39.0)]
        a = tmp_path / "a.csv"
        t = tmp_path / "t.csv"
        a.write_text("bpp,psnr\n" + "\n".join(f"{b},{p}" for b, p in base) + "\n")
        t.write_text("bpp,psnr\n" + "\n".join(f"{b},{p}" for b, p in base) + "\n")
        assert _run("bdrate", "--anchor", str(a), "--test", str(t)) == 0
        assert capsys.readouterr().out.strip() == "0.00"
        t.write_text("bpp,psnr\n"
                     + "\n".join(f"{b * 1.1},{p}" for b, p in base) + "\n")
        assert _run("bdrate", "--anchor", str(a), "--test", str(t)) == 0
        assert capsys.readouterr().out.strip() == "+10.00"

    def test_bdrate_overlap_failure_exit_2(self, tmp_path):
        a = tmp_path / "a.csv"
        t = tmp_path / "t.csv"
        a.write_text("bpp,psnr\n0.1,30\n0.2,33\n0.3,36\n0.4,39\n")
        t.write_text("bpp,psnr\n0.1,60\n0.2,63\n0.3,66\n0.4,69\n")
        assert _run("bdrate", "--anchor", str(a), "--test", str(t)) == 2


class TestExitCodes:
    def test_missing_input_is_io_error(self, tmp_path):
        assert _run("encode", "--input", str(tmp_path / "nope.y4m"),
                    "--output", str(tmp_path / "o.mscl")) == 3

    def test_truncated_stream_is_codec_error(self, tmp_path):
        clip = _synth(tmp_path)
        stream = tmp_path / "o.mscl"
        assert _run("encode", "--input", str(clip), "--output",
                    str(stream)) == 0
        (tmp_path / "cut.mscl").write_bytes(stream.read_bytes()[:40])
        assert _run("decode", "--input", str(tmp_path / "cut.mscl"),
                    "--output", str(tmp_path / "d.y4m")) == 4

    def test_bad_flags_exit_2(self):
        with pytest.raises(SystemExit) as err:
            _run("encode", "--input", "x", "--output", "y", "--adaptive",
                 "maybe")
        assert err.value.code == 2

    def test_decode_reports_motion_consistent_with_encoder(self, tmp_path,
                                                           capsys):
        clip = _synth(tmp_path, motion="6,0", texture="noise:40", frames=4)
        stream = tmp_path / "o.mscl"
        report = tmp_path / "r.csv"
        assert _run("encode", "--input", str(clip), "--output", str(stream),
                    "--report", str(report)) == 0
        capsys.readouterr()
        assert _run("decode", "--input", str(stream), "--output",
                    str(tmp_path / "d.y4m")) == 0
        out = capsys.readouterr().out
        decoded_mean = float(out.split("mean_motion=")[1])
        rows = [r for r in _read_csv(report) if r["frame_type"] == "P"]
        enc_mean = np.mean([float(r["motion_mean_px"]) for r in rows])
        max_d = max(float(r["d_value"]) for r in rows)
        assert abs(decoded_mean - enc_mean) <= 0.25 * max(max_d, 1.0)
