import io
import struct
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lwvc.errors import ArgumentError, FormatError, TruncationError, UnsupportedFormatError
from lwvc.media_io import (
    EmptySequence,
    Frame,
    VideoSequence,
    chroma_shape,
    frame_size,
    parse_y4m,
    read_raw_yuv,
    write_raw_yuv,
    write_y4m,
)


def y4m_bytes(w, h, planes_per_frame, header_extra="C420jpeg", rate="25:1", ten_bit=False):
    """Hand-built Y4M, independent of the writer under test."""
    out = [f"YUV4MPEG2 W{w} H{h} F{rate} Ip A1:1 {header_extra}\n".encode()]
    for planes in planes_per_frame:
        out.append(b"FRAME\n")
        for p in planes:
            arr = np.asarray(p)
            out.append(arr.astype("<u2").tobytes() if ten_bit else arr.astype(np.uint8).tobytes())
    return b"".join(out)


def _planes(rng, w, h, top=255):
    cw, ch = (w + 1) // 2, (h + 1) // 2
    return (rng.integers(0, top + 1, (h, w)), rng.integers(0, top + 1, (ch, cw)), rng.integers(0, top + 1, (ch, cw)))


def test_chroma_geometry_rounds_up():
    assert chroma_shape(5, 7) == (3, 4)
    assert frame_size(5, 7) == 35 + 2 * 12
    assert frame_size(4, 4, 10) == 2 * (16 + 8)


def test_parse_hand_built_y4m():
    rng = np.random.default_rng(1)
    fr = [_planes(rng, 6, 4) for _ in range(3)]
    seq = parse_y4m(y4m_bytes(6, 4, fr))
    assert len(seq) == 3 and seq.frame_rate == Fraction(25)
    for f, p in zip(seq.frames, fr):
        for a, b in zip(f.planes, p):
            np.testing.assert_array_equal(a, b)


def test_parse_ten_bit_against_direct_reader():
    rng = np.random.default_rng(2)
    fr = [_planes(rng, 4, 4, 1023) for _ in range(2)]
    data = y4m_bytes(4, 4, fr, header_extra="C420p10 XYSCSS=420P10", ten_bit=True)
    seq = parse_y4m(data)
    assert seq.bit_depth == 10
    # independent reader: skip header + FRAME lines, read <u2
    body = data.split(b"\n", 1)[1]
    first = np.frombuffer(body[6 : 6 + 32], "<u2").reshape(4, 4)
    np.testing.assert_array_equal(seq.frames[0].luma, first)


@pytest.mark.parametrize("tag", ["C420", "C420jpeg", "C420paldv", "C420mpeg2"])
def test_accepted_420_tags(tag):
    rng = np.random.default_rng(0)
    assert len(parse_y4m(y4m_bytes(4, 2, [_planes(rng, 4, 2)], header_extra=tag))) == 1


def test_header_without_chroma_tag_defaults_to_420():
    rng = np.random.default_rng(0)
    assert len(parse_y4m(y4m_bytes(4, 2, [_planes(rng, 4, 2)], header_extra="").replace(b" \n", b"\n"))) == 1


@pytest.mark.parametrize("tag", ["C444", "C422", "Cmono"])
def test_unsupported_chroma_rejected(tag):
    data = b"YUV4MPEG2 W4 H4 F25:1 " + tag.encode() + b"\nFRAME\n" + bytes(48)
    with pytest.raises(UnsupportedFormatError):
        parse_y4m(data)


def test_bad_signature():
    with pytest.raises(FormatError):
        parse_y4m(b"RIFF....")


def test_truncated_frame_names_index():
    rng = np.random.default_rng(0)
    data = y4m_bytes(4, 4, [_planes(rng, 4, 4) for _ in range(3)])
    with pytest.raises(TruncationError, match="frame 2"):
        parse_y4m(data[:-5])


def test_writer_matches_hand_built_bytes():
    rng = np.random.default_rng(3)
    fr = [_planes(rng, 8, 6) for _ in range(2)]
    seq = VideoSequence(tuple(Frame(*p) for p in fr), Fraction(30000, 1001))
    expected = y4m_bytes(8, 6, fr, rate="30000:1001")
    assert write_y4m(seq) == expected
    buf = io.BytesIO()
    write_y4m(seq, buf)
    assert buf.getvalue() == expected


@given(
    w=st.integers(2, 13),
    h=st.integers(2, 11),
    n=st.integers(1, 3),
    ten=st.booleans(),
    seed=st.integers(0, 2**31),
)
def test_y4m_roundtrip_property(w, h, n, ten, seed):
    rng = np.random.default_rng(seed)
    bd = 10 if ten else 8
    fr = tuple(Frame(*_planes(rng, w, h, (1 << bd) - 1), bit_depth=bd) for _ in range(n))
    seq = VideoSequence(fr, Fraction(24))
    back = parse_y4m(write_y4m(seq))
    assert back.frames == seq.frames and back.frame_rate == seq.frame_rate


def test_raw_yuv_roundtrip_and_layout():
    rng = np.random.default_rng(4)
    fr = tuple(Frame(*_planes(rng, 6, 4)) for _ in range(2))
    raw = write_raw_yuv(fr)
    p = fr[0].planes
    assert raw[: 24 + 6 + 6] == b"".join(np.asarray(x, np.uint8).tobytes() for x in p)
    back = read_raw_yuv(raw, 6, 4)
    assert back.frames == fr


def test_raw_ten_bit_little_endian():
    f = Frame(np.full((2, 2), 0x3FF), np.full((1, 1), 1), np.full((1, 1), 2), bit_depth=10)
    raw = write_raw_yuv([f])
    assert raw[:2] == struct.pack("<H", 0x3FF)
    assert read_raw_yuv(raw, 2, 2, 10).frames[0] == f


def test_raw_empty_and_truncated():
    empty = read_raw_yuv(b"", 4, 4)
    assert isinstance(empty, EmptySequence) and len(empty) == 0
    with pytest.raises(TruncationError):
        read_raw_yuv(bytes(30), 4, 4, frame_count=2)


def test_frame_validation():
    with pytest.raises(ArgumentError):
        Frame(np.zeros((1, 4)), np.zeros((1, 2)), np.zeros((1, 2)))
    with pytest.raises(ArgumentError):
        Frame(np.zeros((4, 4)), np.zeros((1, 2)), np.zeros((2, 2)))
    with pytest.raises(ArgumentError):
        Frame(np.full((2, 2), 256), np.zeros((1, 1)), np.zeros((1, 1)))


def test_sequence_requires_consistent_geometry():
    a = Frame.blank(4, 4)
    b = Frame.blank(6, 4)
    with pytest.raises(ArgumentError):
        VideoSequence((a, b))
    with pytest.raises(ArgumentError):
        VideoSequence(())
