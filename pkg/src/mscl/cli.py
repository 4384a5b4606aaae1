"""Command-line front end: synth / encode / decode / analyze / rd / bdrate.

Exit codes: 0 success, 2 bad flags or unusable curve data, 3 file I/O
failure, 4 stream/codec error.
"""

import argparse
import csv
import os
import sys

from .adaptive import AdaptConfig, DownsampleFactor, all_factors
from .blockmatch import BlockMatchPredictor, FlowPredictorParams
from .codec import EncodeResult, decode_sequence, encode_sequence
from .errors import MsclError, NoOverlap, TooFewPoints
from .metrics import RdCurve, bd_rate, sequence_motion_stats
from .synth import SynthParams, VideoSequence, synth_generate
from .video import read_y4m, write_y4m

_DEF_THREADS = min(os.cpu_count() or 1, 8)


def _onoff(text):
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _factor_list(text):
    try:
        return [DownsampleFactor.from_value(float(v))
                for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _size(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError("expected WxH") from None


def _motion(text):
    try:
        vx, vy = text.split(",")
        return float(vx), float(vy)
    except ValueError:
        raise argparse.ArgumentTypeError("expected vx,vy") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated ints") from None


def _add_codec_flags(sub):
    sub.add_argument("--qp", type=int, default=24)
    sub.add_argument("--adaptive", type=_onoff, default=True, metavar="on|off")
    sub.add_argument("--scaling", type=_onoff, default=True, metavar="on|off")
    sub.add_argument("--bias", type=_onoff, default=True, metavar="on|off")
    sub.add_argument("--flow-range", type=int, default=8,
                     help="search radius of the block matcher")
    sub.add_argument("--factors", type=_factor_list, default=None,
                     help="comma-separated candidate factors (subset of the 32)")
    sub.add_argument("--threshold", type=float, default=5.0,
                     help="mean-motion threshold below which the factor reverts to 1")
    sub.add_argument("--threads", type=int, default=_DEF_THREADS)


def _config_from_args(args) -> AdaptConfig:
    factors = tuple(args.factors) if args.factors else tuple(all_factors())
    return AdaptConfig(factors=factors,
                       motion_threshold=args.threshold,
                       enable_adaptive=args.adaptive,
                       enable_scaling=args.scaling,
                       enable_bias=args.bias)


def _params_from_args(args) -> FlowPredictorParams:
    return FlowPredictorParams(search_radius=args.flow_range)


def _fmt(val, spec="%.4f"):
    if val is None:
        return ""
    return spec % val


def _write_encode_report(path, result: EncodeResult):
    rows = [["frame_idx", "frame_type", "d_value", "motion_bits",
             "residual_bits", "side_bits", "prediction_psnr",
             "reconstruction_psnr", "motion_mean_px", "select_ms", "code_ms"]]
    for s in result.stats:
        rows.append([s.frame_idx, s.frame_type, "%.2f" % s.d_value,
                     s.motion_bits, s.residual_bits, s.side_bits,
                     _fmt(s.prediction_psnr), _fmt(s.reconstruction_psnr),
                     _fmt(s.motion_mean_px), "%.3f" % s.select_ms,
                     "%.3f" % s.code_ms])
    p_stats = [s for s in result.stats if s.frame_type == "P"]
    rows.append([
        "summary", "",
        _fmt(sum(s.d_value for s in p_stats) / len(p_stats)) if p_stats else "",
        sum(s.motion_bits for s in result.stats),
        sum(s.residual_bits for s in result.stats),
        sum(s.side_bits for s in result.stats),
        _fmt(result.mean_prediction_psnr) if p_stats else "",
        _fmt(result.mean_psnr),
        _fmt(sum(s.motion_mean_px for s in p_stats) / len(p_stats)) if p_stats else "",
        "%.3f" % sum(s.select_ms for s in result.stats),
        "%.3f" % sum(s.code_ms for s in result.stats)])
    _write_csv(path, rows)


def _write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)


def cmd_synth(args):
    params = SynthParams(args.size[0], args.size[1], args.frames,
                         args.motion, args.texture, args.noise, args.seed)
    seq = synth_generate(params)
    with open(args.output, "wb") as f:
        f.write(write_y4m(seq))
    print(f"frames={args.frames} size={args.size[0]}x{args.size[1]}")
    return 0


def cmd_encode(args):
    with open(args.input, "rb") as f:
        seq = read_y4m(f.read())
    result = encode_sequence(seq.frames, args.qp, _config_from_args(args),
                             _params_from_args(args), fps=seq.fps,
                             threads=args.threads)
    with open(args.output, "wb") as f:
        f.write(result.stream)
    if args.report:
        _write_encode_report(args.report, result)
    print(f"bpp={result.bpp:.6f} psnr={result.mean_psnr:.4f}")
    return 0


def cmd_decode(args):
    with open(args.input, "rb") as f:
        data = f.read()
    result = decode_sequence(data)
    seq = VideoSequence(result.frames, result.fps)
    with open(args.output, "wb") as f:
        f.write(write_y4m(seq))
    mm = (sum(result.motion_means) / len(result.motion_means)
          if result.motion_means else 0.0)
    print(f"frames={len(result.frames)} mean_motion={mm:.4f}")
    return 0


def cmd_analyze(args):
    with open(args.input, "rb") as f:
        seq = read_y4m(f.read())
    config = AdaptConfig(factors=tuple(args.factors) if args.factors
                         else tuple(all_factors()))
    stats = sequence_motion_stats(seq.frames,
                                  BlockMatchPredictor(_params_from_args(args)),
                                  config, threads=args.threads)
    rows = [["frame_idx", "scene_complexity", "motion_adaptive", "motion_direct"]]
    for i in range(len(seq.frames)):
        rows.append([
            i,
            _fmt(stats.per_frame_complexity[i]) if stats.per_frame_complexity else "",
            _fmt(stats.per_frame_motion[i - 1]) if i else "",
            _fmt(stats.per_frame_motion_direct[i - 1]) if i else ""])
    rows.append(["summary", _fmt(stats.scene_complexity),
                 _fmt(stats.avg_motion_magnitude), _fmt(stats.avg_motion_direct)])
    if args.report:
        _write_csv(args.report, rows)
    print(f"motion_adaptive={stats.avg_motion_magnitude:.4f} "
          f"motion_direct={stats.avg_motion_direct:.4f} "
          f"complexity={_fmt(stats.scene_complexity) or 'n/a'}")
    return 0


def cmd_rd(args):
    with open(args.input, "rb") as f:
        seq = read_y4m(f.read())
    config = _config_from_args(args)
    params = _params_from_args(args)
    rows = [["qp", "bpp", "psnr"]]
    for qp in args.qps:
        result = encode_sequence(seq.frames, qp, config, params,
                                 fps=seq.fps, threads=args.threads)
        rows.append([qp, "%.8f" % result.bpp, "%.4f" % result.mean_psnr])
    _write_csv(args.out, rows)
    print(f"points={len(args.qps)} out={args.out}")
    return 0


def _read_curve_csv(path) -> RdCurve:
    with open(path, "r", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise TooFewPoints(f"{path} is empty")
    header = rows[0]
    if any(not _is_number(c) for c in header):
        cols = {name.strip().lower(): i for i, name in enumerate(header)}
        if "bpp" not in cols or "psnr" not in cols:
            raise TooFewPoints(f"{path} lacks bpp/psnr columns")
        bi, pi = cols["bpp"], cols["psnr"]
        rows = rows[1:]
    else:
        bi, pi = len(header) - 2, len(header) - 1
    points = [(float(r[bi]), float(r[pi])) for r in rows if r]
    return RdCurve(tuple(points))


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def cmd_bdrate(args):
    anchor = _read_curve_csv(args.anchor)
    test = _read_curve_csv(args.test)
    result = bd_rate(anchor, test, method=args.method)
    pct = result.percent
    if abs(round(pct, 2)) < 0.005:
        print("0.00")
    else:
        print(f"{pct:+.2f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mscl",
        description="Motion-adaptive downsampling video codec and analysis tools")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("synth", help="generate a deterministic test sequence")
    p.add_argument("--size", type=_size, required=True, metavar="WxH")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--motion", type=_motion, default=(0.0, 0.0), metavar="vx,vy")
    p.add_argument("--texture", default="checker")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("encode", help="encode a Y4M file to an .mscl stream")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", default=None, help="per-frame CSV report")
    _add_codec_flags(p)
    p.set_defaults(func=cmd_encode)

    p = subs.add_parser("decode", help="decode an .mscl stream to Y4M")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = subs.add_parser("analyze", help="motion and complexity statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--flow-range", type=int, default=8)
    p.add_argument("--factors", type=_factor_list, default=None)
    p.add_argument("--threads", type=int, default=_DEF_THREADS)
    p.set_defaults(func=cmd_analyze)

    p = subs.add_parser("rd", help="rate-distortion sweep over a qp ladder")
    p.add_argument("--input", required=True)
    p.add_argument("--qps", type=_int_list, default=[12, 24, 48, 96])
    p.add_argument("--out", required=True)
    _add_codec_flags(p)
    p.set_defaults(func=cmd_rd)

    p = subs.add_parser("bdrate", help="BD-rate of test vs anchor curve CSVs")
    p.add_argument("--anchor", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--method", choices=("pchip", "polyfit"), default="pchip")
    p.set_defaults(func=cmd_bdrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NoOverlap, TooFewPoints) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except MsclError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
