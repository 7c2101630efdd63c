"""Command-line interface: ``lwvc <subcommand> ...``."""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import bitstream, codec, metrics
from .dwt2d import KERNELS
from .errors import ArgumentError, ConfigError, FormatError, LwvcError
from .media_io import parse_y4m, read_raw_yuv, write_raw_yuv, write_y4m
from .quant import CONFIG_ENV, Q_NUM

EXIT_OK = 0


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _q_value(text: str) -> float:
    try:
        q = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (0.0 <= q <= Q_NUM - 1) or math.isnan(q):
        raise argparse.ArgumentTypeError(f"q must be in [0, {Q_NUM - 1}], got {text}")
    return q


def _q_list(text: str) -> list:
    vals = [_q_value(t) for t in text.split(",") if t.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty q list")
    return vals


def _gop_value(text: str):
    if text == "auto":
        return "auto"
    try:
        g = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"GOP must be 1, 2, 4, 8, 16 or 'auto', got {text!r}") from None
    if g not in (1, 2, 4, 8, 16):
        raise argparse.ArgumentTypeError(f"GOP must be 1, 2, 4, 8, 16 or 'auto', got {g}")
    return g


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _rate(text: str) -> Fraction:
    try:
        r = Fraction(text.replace(":", "/"))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad frame rate {text!r}") from None
    if r <= 0:
        raise argparse.ArgumentTypeError("frame rate must be positive")
    return r


# ---------------------------------------------------------------------------
# video file helpers


def _add_raw_args(p):
    g = p.add_argument_group("raw .yuv input")
    g.add_argument("--width", type=int, help="frame width for raw .yuv input")
    g.add_argument("--height", type=int, help="frame height for raw .yuv input")
    g.add_argument("--bit-depth", type=int, default=8, choices=(8, 10), help="sample bit depth for raw .yuv input (default 8)")
    g.add_argument("--fps", type=_rate, default=Fraction(30), help="frame rate for raw .yuv input, e.g. 30 or 30000/1001 (default 30)")


def _is_raw(path) -> bool:
    return str(path).lower().endswith(".yuv")


def _check_raw_args(args, path):
    if _is_raw(path) and (args.width is None or args.height is None):
        raise ArgumentError(f"{path}: raw .yuv input needs --width and --height")


def _read_video(path, args):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ArgumentError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        if _is_raw(path):
            seq = read_raw_yuv(data, args.width, args.height, args.bit_depth, frame_rate=args.fps)
            if len(seq) == 0:
                raise FormatError("no complete frames")
            return seq
        return parse_y4m(data)
    except LwvcError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def _write_video(path, seq):
    data = write_raw_yuv(seq.frames) if _is_raw(path) else write_y4m(seq)
    _write_bytes(path, data)


def _write_bytes(path, data):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ArgumentError(f"cannot write {path}: {exc.strerror}") from exc


def _read_bytes(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ArgumentError(f"cannot read {path}: {exc.strerror}") from exc


def _check_writable(path):
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise ArgumentError(f"output directory {parent} does not exist")


# ---------------------------------------------------------------------------
# config


def _config(args) -> codec.CodecConfig:
    path = args.config or os.environ.get(CONFIG_ENV) or None
    cfg = codec.codec_config_from_file(path)
    kw = {}
    if getattr(args, "gop", None) is not None:
        kw["gop"] = args.gop
    if getattr(args, "gop_selection", None):
        kw["gop_selection"] = args.gop_selection
    if getattr(args, "gop_threshold", None) is not None:
        kw["gop_threshold"] = args.gop_threshold
    if getattr(args, "search_range", None) is not None:
        kw["search_range"] = args.search_range
    if getattr(args, "block_size", None) is not None:
        kw["block_size"] = args.block_size
    if getattr(args, "spatial_levels", None) is not None:
        kw["spatial_levels"] = args.spatial_levels
    if getattr(args, "lossless", False):
        kw["lossless"] = True
        kw["kernel"] = args.kernel or "integer_5_3"
    elif getattr(args, "kernel", None):
        kw["kernel"] = args.kernel
    quant = cfg.quant
    if getattr(args, "q", None) is not None:
        quant = quant.with_q(args.q)
    kw["quant"] = quant
    try:
        return replace(cfg, **kw)
    except ArgumentError as exc:
        raise ConfigError(str(exc)) from exc


def _add_codec_args(p, with_q=True):
    if with_q:
        p.add_argument("--q", type=_q_value, help=f"quality index in [0, {Q_NUM - 1}], real valued; higher is better (default 10)")
    p.add_argument("--gop", type=_gop_value, help="GOP size 1|2|4|8|16 or 'auto' for content-adaptive choice (default 16)")
    p.add_argument("--gop-selection", choices=("heuristic", "exhaustive"), help="adaptive GOP method (default heuristic)")
    p.add_argument("--gop-threshold", type=float, help="heuristic mean SAD per pixel threshold (default 3.0)")
    p.add_argument("--kernel", choices=KERNELS, help="spatial wavelet (default float_9_7, integer_5_3 when lossless)")
    p.add_argument("--spatial-levels", type=int, help="spatial decomposition depth (default: from picture size)")
    p.add_argument("--search-range", type=int, help="motion search range in pixels (default 32)")
    p.add_argument("--block-size", type=int, help="motion block size in pixels (default 8)")
    p.add_argument("--config", help=f"INI config file with [quant] and [codec] sections (default: ${CONFIG_ENV})")


# ---------------------------------------------------------------------------
# subcommands


def cmd_encode(args) -> int:
    if args.lossless and args.q is not None:
        raise ArgumentError("--q has no effect with --lossless")
    _check_raw_args(args, args.input)
    cfg = _config(args)
    _check_writable(args.output)
    video = _read_video(args.input, args)
    _log(f"encoding {args.input}: {video.width}x{video.height}, {len(video)} frames")
    res = codec.encode(video, cfg, progress=None if args.quiet else _log)
    _write_bytes(args.output, res.stream)
    bits = len(res.stream) * 8
    _log(f"wrote {args.output}: {len(res.stream)} bytes, {bits / (video.width * video.height * len(video)):.4f} bpp")
    return EXIT_OK


def cmd_decode(args) -> int:
    _check_writable(args.output)
    data = _read_bytes(args.input)
    try:
        seq = codec.decode_sequence(data, args.drop_layers)
    except LwvcError as exc:
        raise type(exc)(f"{args.input}: {exc}") from exc
    _write_video(args.output, seq)
    _log(f"decoded {len(seq)} frames at {seq.frame_rate} fps to {args.output}")
    return EXIT_OK


def cmd_drop(args) -> int:
    _check_writable(args.output)
    data = _read_bytes(args.input)
    try:
        out = bitstream.drop_layers(data, args.layers)
    except LwvcError as exc:
        raise type(exc)(f"{args.input}: {exc}") from exc
    _write_bytes(args.output, out)
    _log(f"dropped {args.layers} layer(s): {len(data)} -> {len(out)} bytes")
    return EXIT_OK


def _fmt_db(v):
    return "inf" if math.isinf(v) else f"{v:.4f}"


def cmd_metrics(args) -> int:
    _check_raw_args(args, args.ref)
    _check_raw_args(args, args.dist)
    ref = _read_video(args.ref, args)
    dist = _read_video(args.dist, args)
    want_psnr = args.psnr or not (args.msssim or args.psnr_611)
    if want_psnr:
        print(f"psnr {_fmt_db(metrics.psnr(ref, dist))}")
    if args.psnr_611:
        print(f"psnr_611 {_fmt_db(metrics.psnr_611(ref, dist))}")
    if args.msssim:
        print(f"msssim {metrics.ms_ssim(ref, dist):.6f}")
    return EXIT_OK


def _read_curve(path, metric):
    text = _read_bytes(path).decode("utf-8", errors="replace")
    curves = [c for c in metrics.parse_rd_csv(text) if c.metric == metric]
    if len(curves) != 1:
        raise ArgumentError(f"{path}: expected one curve with metric {metric!r}, found {len(curves)}")
    return curves[0]


def cmd_bdrate(args) -> int:
    a = _read_curve(args.anchor, args.metric)
    t = _read_curve(args.test, args.metric)
    bd = metrics.bd_rate(a, t)
    print(repr(bd) if args.exact else f"{bd:+.{args.precision}f}%")
    return EXIT_OK


def cmd_sweep(args) -> int:
    _check_raw_args(args, args.input)
    cfg = _config(args)
    if cfg.lossless:
        raise ConfigError("sweep varies q; a lossless config has nothing to sweep")
    want = [m.strip() for m in args.metrics.split(",") if m.strip()]
    bad = set(want) - {"psnr", "msssim"}
    if bad or not want:
        raise ArgumentError(f"--metrics takes psnr and/or msssim, got {args.metrics!r}")
    if args.emit_csv:
        _check_writable(args.emit_csv)
    video = _read_video(args.input, args)
    if "msssim" in want and min(video.width, video.height) < 176:
        raise ArgumentError("msssim needs at least 176x176 frames")
    label = args.label or Path(args.input).stem
    pixels = video.width * video.height * len(video)
    rows = {m: [] for m in want}
    for q in sorted(args.q_list):
        res = codec.encode(video, cfg.with_q(q))
        rec = codec.decode_sequence(res.stream)
        bpp = len(res.stream) * 8 / pixels
        vals = {}
        if "psnr" in want:
            vals["psnr"] = metrics.psnr(video, rec)
        if "msssim" in want:
            vals["msssim"] = metrics.ms_ssim_db(metrics.ms_ssim(video, rec))
        _log(f"q={q:g}: {bpp:.4f} bpp " + " ".join(f"{k}={_fmt_db(v)}" for k, v in vals.items()))
        for m, v in vals.items():
            if math.isinf(v):
                _log(f"q={q:g}: {m} is infinite (lossless result), left out of the curve")
                continue
            rows[m].append(metrics.RDPoint(bpp, v, "bpp", "msssim_db" if m == "msssim" else m))
    text = metrics.emit_rd_rows((label, p) for m in want for p in rows[m])
    if args.emit_csv:
        _write_bytes(args.emit_csv, text.encode())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_dump_units(args) -> int:
    data = _read_bytes(args.input)
    try:
        sys.stdout.write(bitstream.dump_units(data))
    except LwvcError as exc:
        raise type(exc)(f"{args.input}: {exc}") from exc
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lwvc", description="Wavelet video codec with motion-compensated temporal filtering.")
    sub = ap.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("encode", help="encode a .y4m or raw .yuv clip", description="Encode a .y4m or raw .yuv clip into an LWVC stream.")
    p.add_argument("--input", "-i", required=True, help="input video (.y4m, or .yuv with --width/--height)")
    p.add_argument("--output", "-o", required=True, help="output stream file")
    p.add_argument("--lossless", action="store_true", help="bit-exact coding with the integer 5/3 kernel")
    p.add_argument("--quiet", action="store_true", help="no per-GOP progress on stderr")
    _add_codec_args(p)
    _add_raw_args(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a stream to .y4m or raw .yuv", description="Decode an LWVC stream.")
    p.add_argument("--input", "-i", required=True, help="input stream file")
    p.add_argument("--output", "-o", required=True, help="output video (.y4m, or .yuv for headerless planar)")
    p.add_argument("--drop-layers", type=_nonneg_int, default=0, help="skip the k finest temporal levels; frame rate drops by 2^k (default 0)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("drop", help="remove temporal layers from a stream", description="Rewrite a stream without its k finest temporal levels.")
    p.add_argument("--input", "-i", required=True, help="input stream file")
    p.add_argument("--output", "-o", required=True, help="output stream file")
    p.add_argument("--layers", "-k", type=_nonneg_int, required=True, help="number of temporal levels to remove")
    p.set_defaults(func=cmd_drop)

    p = sub.add_parser("metrics", help="compare two clips", description="Quality of --dist against --ref; prints 'name value' lines.")
    p.add_argument("--ref", required=True, help="reference video")
    p.add_argument("--dist", required=True, help="distorted video")
    p.add_argument("--psnr", action="store_true", help="PSNR over all planes, weighted by sample count (default metric)")
    p.add_argument("--psnr-611", action="store_true", help="(6 Y + Cb + Cr) / 8 weighted PSNR")
    p.add_argument("--msssim", action="store_true", help="five-scale MS-SSIM on luma (needs >= 176x176)")
    _add_raw_args(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bdrate", help="BD-rate between two RD CSV files", description="Bjontegaard delta rate of --test against --anchor.")
    p.add_argument("--anchor", required=True, help="anchor RD CSV")
    p.add_argument("--test", required=True, help="test RD CSV")
    p.add_argument("--metric", default="psnr", help="quality metric column value to use (default psnr)")
    out = p.add_mutually_exclusive_group()
    out.add_argument("--precision", type=_nonneg_int, default=1, help="decimals in the percent output (default 1)")
    out.add_argument("--exact", action="store_true", help="print the full-precision float instead of a percent string")
    p.set_defaults(func=cmd_bdrate)

    p = sub.add_parser("sweep", help="encode/decode over several q and emit an RD CSV", description="Run encode, decode and metrics for each q.")
    p.add_argument("--input", "-i", required=True, help="input video")
    p.add_argument("--q-list", type=_q_list, default=[0.0, 5.0, 10.0, 15.0, 20.0], help="comma-separated q values (default 0,5,10,15,20)")
    p.add_argument("--emit-csv", help="write the RD CSV here instead of standard output")
    p.add_argument("--metrics", default="psnr", help="comma list of psnr, msssim (default psnr)")
    p.add_argument("--label", help="curve label (default: input file stem)")
    _add_codec_args(p, with_q=False)
    _add_raw_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dump-units", help="list the units of a stream", description="Print the stream header and a unit table.")
    p.add_argument("--input", "-i", required=True, help="input stream file")
    p.set_defaults(func=cmd_dump_units)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LwvcError as exc:
        _log(f"lwvc {args.command}: error: {exc}")
        return exc.exit_code
    except KeyboardInterrupt:
        _log("interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
