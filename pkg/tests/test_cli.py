import argparse
import os
import subprocess
import sys
from fractions import Fraction

import pytest

from lwvc import cli, metrics
from lwvc.media_io import parse_y4m, write_raw_yuv, write_y4m
from lwvc.synthetic import natural_clip


@pytest.fixture()
def clip_file(tmp_path):
    p = tmp_path / "in.y4m"
    p.write_bytes(write_y4m(natural_clip(48, 32, 8, seed=3)))
    return p


def run(*argv):
    return cli.main([str(a) for a in argv])


def _subparsers(parser):
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices
    return {}


def test_every_subcommand_documents_every_flag():
    subs = _subparsers(cli.build_parser())
    assert set(subs) == {"encode", "decode", "drop", "metrics", "bdrate", "sweep", "dump-units"}
    for name, sp in subs.items():
        text = sp.format_help()
        for act in sp._actions:
            for opt in act.option_strings:
                assert opt in text, (name, opt)
            if act.option_strings and not isinstance(act, argparse._HelpAction):
                assert act.help and act.help != argparse.SUPPRESS, (name, act.option_strings)


@pytest.mark.parametrize("sub", ["encode", "decode", "drop", "metrics", "bdrate", "sweep", "dump-units"])
def test_help_exits_zero(sub, capsys):
    with pytest.raises(SystemExit) as e:
        run(sub, "--help")
    assert e.value.code == 0
    assert "usage:" in capsys.readouterr().out


def test_lossless_cli_roundtrip(tmp_path, clip_file):
    s, r = tmp_path / "s.lwv", tmp_path / "r.y4m"
    assert run("encode", "-i", clip_file, "-o", s, "--lossless", "--gop", "4", "--quiet") == 0
    assert run("decode", "-i", s, "-o", r) == 0
    assert r.read_bytes() == clip_file.read_bytes()


def test_raw_yuv_io(tmp_path):
    clip = natural_clip(16, 16, 4, seed=1)
    raw = tmp_path / "a.yuv"
    raw.write_bytes(write_raw_yuv(clip.frames))
    s, out = tmp_path / "a.lwv", tmp_path / "b.yuv"
    assert run("encode", "-i", raw, "-o", s, "--lossless", "--gop", "4") == 2  # missing geometry
    assert not s.exists()
    assert run("encode", "-i", raw, "-o", s, "--lossless", "--gop", "4", "--width", 16, "--height", 16) == 0
    assert run("decode", "-i", s, "-o", out) == 0
    assert out.read_bytes() == raw.read_bytes()


def test_drop_and_decode(tmp_path, clip_file):
    s, d, r = tmp_path / "s.lwv", tmp_path / "d.lwv", tmp_path / "r.y4m"
    run("encode", "-i", clip_file, "-o", s, "--q", "12.5", "--gop", "8")
    assert run("drop", "-i", s, "-o", d, "--layers", 2) == 0
    assert run("decode", "-i", d, "-o", r) == 0
    seq = parse_y4m(r.read_bytes())
    assert len(seq) == 2 and seq.frame_rate == Fraction(30, 4)
    r2 = tmp_path / "r2.y4m"
    assert run("decode", "-i", s, "-o", r2, "--drop-layers", 2) == 0
    assert r2.read_bytes() == r.read_bytes()


def test_metrics_output(tmp_path, clip_file, capsys):
    capsys.readouterr()
    assert run("metrics", "--ref", clip_file, "--dist", clip_file, "--psnr") == 0
    assert capsys.readouterr().out.strip() == "psnr inf"


def test_sweep_csv(tmp_path, clip_file):
    out = tmp_path / "rd.csv"
    assert run("sweep", "-i", clip_file, "--q-list", "0,10,20", "--gop", "4", "--emit-csv", out) == 0
    curves = metrics.parse_rd_csv(out.read_text())
    assert len(curves) == 1 and len(curves[0].points) == 3
    r, q = curves[0].rates, curves[0].qualities
    assert list(r) == sorted(r) and list(q) == sorted(q)


def _write_curve(path, rates, qual, label):
    path.write_text(metrics.emit_rd_csv([metrics.RDCurve.from_arrays(rates, qual, label)]))


def test_bdrate_doubled_fixture(tmp_path, capsys):
    rates, qual = [0.1, 0.2, 0.4, 0.8, 1.6], [30, 33, 36, 38.5, 41]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _write_curve(a, rates, qual, "anchor")
    _write_curve(b, [2 * x for x in rates], qual, "test")
    capsys.readouterr()
    assert run("bdrate", "--anchor", a, "--test", b) == 0
    assert capsys.readouterr().out.strip() == "+100.0%"
    assert run("bdrate", "--anchor", a, "--test", b, "--exact") == 0
    exact = float(capsys.readouterr().out)
    mem = metrics.bd_rate(metrics.parse_rd_csv(a.read_text())[0], metrics.parse_rd_csv(b.read_text())[0])
    assert exact == mem


def test_exit_codes(tmp_path, clip_file):
    s = tmp_path / "s.lwv"
    out = tmp_path / "o"
    assert run("encode", "-i", tmp_path / "missing.y4m", "-o", s) == 2
    assert run("encode", "-i", clip_file, "-o", s, "--lossless", "--kernel", "float_9_7") == 4
    assert not s.exists()
    bad = tmp_path / "bad.lwv"
    bad.write_bytes(b"garbage stream")
    assert run("decode", "-i", bad, "-o", out) == 3
    assert run("dump-units", "-i", bad) == 3
    cfg = tmp_path / "c.ini"
    cfg.write_text("[quant]\nqp_h = 5, 1\n")
    assert run("encode", "-i", clip_file, "-o", s, "--config", cfg) == 4
    assert not out.exists()


def test_invalid_flags_rejected_before_writing(tmp_path, clip_file):
    s = tmp_path / "s.lwv"
    with pytest.raises(SystemExit) as e:
        run("encode", "-i", clip_file, "-o", s, "--q", "25")
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        run("encode", "-i", clip_file, "-o", s, "--gop", "3")
    assert e.value.code == 2
    assert run("encode", "-i", clip_file, "-o", s, "--lossless", "--q", "3") == 2
    with pytest.raises(SystemExit):
        run("bdrate", "--anchor", "a", "--test", "b", "--exact", "--precision", "3")
    assert not s.exists()


def test_config_from_environment(tmp_path, clip_file, monkeypatch):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[codec]\ngop = 2\nlossless = yes\n")
    monkeypatch.setenv("LWVC_CONFIG", str(cfg))
    s = tmp_path / "s.lwv"
    assert run("encode", "-i", clip_file, "-o", s) == 0
    from lwvc import bitstream

    header, _ = bitstream.parse_stream(s.read_bytes())
    assert header.gop_mode == 2 and header.lossless


def test_deterministic_outputs(tmp_path, clip_file):
    a, b = tmp_path / "a.lwv", tmp_path / "b.lwv"
    run("encode", "-i", clip_file, "-o", a, "--gop", "auto")
    run("encode", "-i", clip_file, "-o", b, "--gop", "auto")
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point_no_traceback(tmp_path):
    bad = tmp_path / "bad.lwv"
    bad.write_bytes(b"LWVC")
    proc = subprocess.run(
        [sys.executable, "-m", "lwvc.cli", "dump-units", "-i", str(bad)],
        capture_output=True, text=True, env={**os.environ},
    )
    assert proc.returncode == 3
    assert "Traceback" not in proc.stderr and "error" in proc.stderr
