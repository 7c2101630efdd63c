"""Raw video input/output: Y4M and headerless planar YUV 4:2:0."""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .errors import ArgumentError, FormatError, TruncationError, UnsupportedFormatError

Y4M_SIGNATURE = b"YUV4MPEG2"

# Chroma tags accepted as 4:2:0 (siting is ignored, samples are kept as-is).
_CHROMA_420_8BIT = {"420", "420jpeg", "420paldv", "420mpeg2"}
_CHROMA_420_10BIT = {"420p10"}


def chroma_shape(height: int, width: int) -> tuple[int, int]:
    return (height + 1) // 2, (width + 1) // 2


def _sample_dtype(bit_depth: int):
    return np.uint8 if bit_depth == 8 else np.uint16


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Frame:
    """One 4:2:0 picture; planes are read-only arrays of shape (rows, cols)."""

    luma: np.ndarray
    cb: np.ndarray
    cr: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        if self.bit_depth not in (8, 10):
            raise UnsupportedFormatError(f"bit depth {self.bit_depth} not supported (8 or 10)")
        luma = np.asarray(self.luma)
        if luma.ndim != 2:
            raise ArgumentError("luma plane must be 2-D")
        h, w = luma.shape
        if h < 2 or w < 2:
            raise ArgumentError(f"frame must be at least 2x2, got {w}x{h}")
        ch = chroma_shape(h, w)
        top = (1 << self.bit_depth) - 1
        planes = []
        for name, plane, shape in (("luma", luma, (h, w)), ("cb", self.cb, ch), ("cr", self.cr, ch)):
            plane = np.asarray(plane)
            if plane.shape != shape:
                raise ArgumentError(f"{name} plane has shape {plane.shape}, expected {shape}")
            if plane.size and (plane.min() < 0 or plane.max() > top):
                raise ArgumentError(f"{name} samples outside [0, {top}]")
            planes.append(_frozen(plane.astype(_sample_dtype(self.bit_depth))))
        object.__setattr__(self, "luma", planes[0])
        object.__setattr__(self, "cb", planes[1])
        object.__setattr__(self, "cr", planes[2])

    @property
    def height(self) -> int:
        return self.luma.shape[0]

    @property
    def width(self) -> int:
        return self.luma.shape[1]

    @property
    def planes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.luma, self.cb, self.cr

    @classmethod
    def from_planes(cls, planes: Sequence[np.ndarray], bit_depth: int = 8) -> "Frame":
        y, cb, cr = planes
        return cls(y, cb, cr, bit_depth)

    @classmethod
    def blank(cls, width: int, height: int, bit_depth: int = 8, value: int = 0) -> "Frame":
        ch = chroma_shape(height, width)
        return cls(
            np.full((height, width), value),
            np.full(ch, value),
            np.full(ch, value),
            bit_depth,
        )

    def to_bytes(self) -> bytes:
        order = "<u2" if self.bit_depth > 8 else "u1"
        return b"".join(p.astype(order).tobytes() for p in self.planes)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.bit_depth == other.bit_depth and all(
            a.shape == b.shape and np.array_equal(a, b) for a, b in zip(self.planes, other.planes)
        )

    __hash__ = None


@dataclass(frozen=True)
class VideoSequence:
    frames: tuple[Frame, ...]
    frame_rate: Fraction = Fraction(30, 1)
    chroma_format: str = field(default="420", init=False)

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "frame_rate", Fraction(self.frame_rate))
        if self.frame_rate <= 0:
            raise ArgumentError("frame rate must be positive")
        if not frames:
            raise ArgumentError("a video sequence needs at least one frame")
        if frames:
            f0 = frames[0]
            for i, f in enumerate(frames[1:], 1):
                if (f.width, f.height, f.bit_depth) != (f0.width, f0.height, f0.bit_depth):
                    raise ArgumentError(f"frame {i} geometry differs from frame 0")

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def bit_depth(self) -> int:
        return self.frames[0].bit_depth


# ---------------------------------------------------------------------------
# Y4M


def _parse_header(line: bytes) -> dict:
    tokens = line.split(b" ")
    if not tokens or tokens[0] != Y4M_SIGNATURE:
        raise FormatError("missing YUV4MPEG2 signature")
    params = {}
    for tok in tokens[1:]:
        if not tok:
            continue
        try:
            params[chr(tok[0])] = tok[1:].decode("ascii")
        except UnicodeDecodeError as exc:
            raise FormatError(f"non-ASCII header token {tok!r}") from exc
    for key in ("W", "H"):
        if key not in params or not re.fullmatch(r"\d+", params[key]):
            raise FormatError(f"Y4M header lacks a valid {key} parameter")
    return params


def _parse_rate(text: str | None) -> Fraction:
    if text is None:
        return Fraction(30, 1)
    m = re.fullmatch(r"(\d+):(\d+)", text)
    if not m or int(m.group(2)) == 0 or int(m.group(1)) == 0:
        raise FormatError(f"bad frame rate {text!r}")
    return Fraction(int(m.group(1)), int(m.group(2)))


def _chroma_bit_depth(tag: str | None) -> int:
    tag = (tag or "420jpeg").lower()
    if tag in _CHROMA_420_8BIT:
        return 8
    if tag in _CHROMA_420_10BIT:
        return 10
    raise UnsupportedFormatError(f"chroma format C{tag} is not supported (4:2:0 only)")


def _frame_from_buffer(buf: bytes, width: int, height: int, bit_depth: int) -> Frame:
    dtype = np.dtype("<u2") if bit_depth > 8 else np.dtype("u1")
    ch, cw = chroma_shape(height, width)
    arr = np.frombuffer(buf, dtype=dtype)
    ny, nc = width * height, ch * cw
    return Frame(
        arr[:ny].reshape(height, width),
        arr[ny : ny + nc].reshape(ch, cw),
        arr[ny + nc : ny + 2 * nc].reshape(ch, cw),
        bit_depth,
    )


def frame_size(width: int, height: int, bit_depth: int = 8) -> int:
    """Bytes per planar 4:2:0 frame."""
    ch, cw = chroma_shape(height, width)
    return (width * height + 2 * ch * cw) * (2 if bit_depth > 8 else 1)


def parse_y4m(data: bytes | BinaryIO) -> VideoSequence:
    stream = io.BytesIO(data) if isinstance(data, (bytes, bytearray, memoryview)) else data
    header = stream.readline()
    if not header.endswith(b"\n"):
        raise FormatError("unterminated Y4M header line")
    params = _parse_header(header.rstrip(b"\n"))
    width, height = int(params["W"]), int(params["H"])
    if width < 2 or height < 2:
        raise FormatError(f"Y4M geometry {width}x{height} below 2x2")
    bit_depth = _chroma_bit_depth(params.get("C"))
    rate = _parse_rate(params.get("F"))
    size = frame_size(width, height, bit_depth)

    frames = []
    while True:
        marker = stream.readline()
        if not marker:
            break
        if not marker.startswith(b"FRAME"):
            raise FormatError(f"expected FRAME marker before frame {len(frames)}")
        if not marker.endswith(b"\n"):
            raise TruncationError(f"frame {len(frames)}: truncated FRAME marker")
        payload = stream.read(size)
        if len(payload) != size:
            raise TruncationError(
                f"frame {len(frames)}: payload truncated ({len(payload)} of {size} bytes)"
            )
        frames.append(_frame_from_buffer(payload, width, height, bit_depth))
    if not frames:
        raise FormatError("Y4M stream contains no frames")
    return VideoSequence(tuple(frames), rate)


def write_y4m(seq: VideoSequence, out: BinaryIO | None = None) -> bytes | None:
    """Serialize ``seq``; returns the bytes unless ``out`` is given."""
    rate = seq.frame_rate
    ctag = "C420jpeg" if seq.bit_depth == 8 else "C420p10 XYSCSS=420P10"
    header = f"YUV4MPEG2 W{seq.width} H{seq.height} F{rate.numerator}:{rate.denominator} Ip A1:1 {ctag}\n"
    parts: list[bytes] = [header.encode("ascii")]
    for f in seq.frames:
        parts.append(b"FRAME\n")
        parts.append(f.to_bytes())
    blob = b"".join(parts)
    if out is None:
        return blob
    out.write(blob)
    return None


def read_raw_yuv(
    data: bytes | BinaryIO,
    width: int,
    height: int,
    bit_depth: int = 8,
    frame_count: int | None = None,
    frame_rate: Fraction = Fraction(30, 1),
) -> "VideoSequence | EmptySequence":
    """Slice headerless planar 4:2:0 data into frames.

    ``frame_count=None`` reads as many whole frames as the data holds; a
    count of zero gives an :class:`EmptySequence`.
    """
    raw = data if isinstance(data, (bytes, bytearray, memoryview)) else data.read()
    if width < 2 or height < 2:
        raise ArgumentError(f"raw geometry {width}x{height} below 2x2")
    if bit_depth not in (8, 10):
        raise UnsupportedFormatError(f"bit depth {bit_depth} not supported")
    size = frame_size(width, height, bit_depth)
    if frame_count is None:
        frame_count = len(raw) // size
    if len(raw) < frame_count * size:
        have = len(raw) // size
        raise TruncationError(f"frame {have}: raw stream truncated ({len(raw)} bytes < {frame_count * size})")
    frames = tuple(
        _frame_from_buffer(bytes(raw[i * size : (i + 1) * size]), width, height, bit_depth)
        for i in range(frame_count)
    )
    if not frames:
        return EmptySequence(width, height, bit_depth, Fraction(frame_rate))
    return VideoSequence(frames, frame_rate)


def write_raw_yuv(frames: Iterable[Frame]) -> bytes:
    return b"".join(f.to_bytes() for f in frames)


@dataclass(frozen=True)
class EmptySequence:
    """Zero-frame result of a raw read; carries the out-of-band geometry."""

    width: int
    height: int
    bit_depth: int
    frame_rate: Fraction
    frames: tuple = ()

    def __len__(self) -> int:
        return 0

    def __iter__(self):
        return iter(())
