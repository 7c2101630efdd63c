"""LWVC container: stream header followed by a flat list of coded units.

All integers are little-endian.

Stream header (28 bytes)::

    magic "LWVC" | version u8 | width u32 | height u32 | bit_depth u8 |
    frame_count u32 | rate_num u16 | rate_den u16 | kernel u8 |
    spatial_levels u8 | q*256 u16 | gop_mode u8 | flags u8

``gop_mode`` is the fixed GOP size, or 0 for content-adaptive GOPs.
``flags`` bit 0 marks a lossless stream.

Coded unit: ``type u8 | temporal_level u8 | index u16 | length u32 | payload``.
Every GOP starts with a GOP-header unit whose payload is
``gop_size u16 | levels u8 | dropped u8 | block_size u8``, followed by the
lowpass unit and then motion/highpass units from the deepest level down.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import ArgumentError, CorruptionError, FormatError, UnsupportedFormatError

MAGIC = b"LWVC"
VERSION = 1
_HEADER = struct.Struct("<4sBIIBIHHBBHBB")
_UNIT = struct.Struct("<BBHI")
_GOP = struct.Struct("<HBBB")

FLAG_LOSSLESS = 0x01


class UnitType(enum.IntEnum):
    GOP_HEADER = 0
    LOWPASS = 1
    HIGHPASS = 2
    MOTION = 3


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    bit_depth: int
    frame_count: int
    frame_rate: Fraction
    kernel_id: int
    spatial_levels: int
    q: float
    gop_mode: int
    lossless: bool = False
    version: int = VERSION

    @property
    def q_fixed(self) -> int:
        return int(round(self.q * 256))

    def pack(self) -> bytes:
        rate = Fraction(self.frame_rate)
        if not (0 < rate.numerator < 1 << 16 and 0 < rate.denominator < 1 << 16):
            raise ArgumentError(f"frame rate {rate} does not fit the 16-bit header fields")
        return _HEADER.pack(
            MAGIC,
            self.version,
            self.width,
            self.height,
            self.bit_depth,
            self.frame_count,
            rate.numerator,
            rate.denominator,
            self.kernel_id,
            self.spatial_levels,
            self.q_fixed,
            self.gop_mode,
            FLAG_LOSSLESS if self.lossless else 0,
        )

    @classmethod
    def unpack(cls, data: bytes) -> "StreamHeader":
        if len(data) < 4 or data[:4] != MAGIC:
            raise FormatError("not an LWVC stream (bad magic)")
        if len(data) < 5:
            raise CorruptionError("stream header truncated")
        if data[4] > VERSION:
            raise UnsupportedFormatError(f"stream version {data[4]} is newer than supported {VERSION}")
        if len(data) < _HEADER.size:
            raise CorruptionError("stream header truncated")
        (_, ver, w, h, bd, n, num, den, kern, lev, qf, gop, flags) = _HEADER.unpack_from(data)
        if w == 0 or h == 0:
            raise CorruptionError("stream header has zero dimensions")
        if num == 0 or den == 0:
            raise CorruptionError("stream header has a zero frame rate")
        return cls(w, h, bd, n, Fraction(num, den), kern, lev, qf / 256.0, gop, bool(flags & FLAG_LOSSLESS), ver)


@dataclass(frozen=True)
class CodedUnit:
    unit_type: UnitType
    temporal_level: int
    index: int
    payload: bytes

    def pack(self) -> bytes:
        return _UNIT.pack(int(self.unit_type), self.temporal_level, self.index, len(self.payload)) + self.payload


@dataclass(frozen=True)
class GopInfo:
    gop_size: int
    levels: int
    dropped: int
    block_size: int

    def pack(self) -> bytes:
        return _GOP.pack(self.gop_size, self.levels, self.dropped, self.block_size)

    @classmethod
    def unpack(cls, payload: bytes) -> "GopInfo":
        if len(payload) != _GOP.size:
            raise CorruptionError(f"GOP header payload has {len(payload)} bytes, expected {_GOP.size}")
        info = cls(*_GOP.unpack(payload))
        if info.gop_size == 0 or info.gop_size & (info.gop_size - 1) or info.gop_size.bit_length() - 1 != info.levels:
            raise CorruptionError(f"inconsistent GOP header {info}")
        if info.dropped > info.levels:
            raise CorruptionError(f"GOP header drops {info.dropped} of {info.levels} levels")
        return info

    @property
    def output_frames(self) -> int:
        return 1 << (self.levels - self.dropped)

    def unit(self) -> CodedUnit:
        return CodedUnit(UnitType.GOP_HEADER, 0, 0, self.pack())


def write_stream(header: StreamHeader, gops) -> bytes:
    """``gops`` is a sequence of unit lists, each starting with its GOP header unit."""
    parts = [header.pack()]
    for units in gops:
        for u in units:
            parts.append(u.pack())
    return b"".join(parts)


def parse_stream(data: bytes):
    """Return ``(header, units)``; validates framing and per-GOP unit order."""
    data = bytes(data)
    header = StreamHeader.unpack(data)
    units = []
    pos = _HEADER.size
    while pos < len(data):
        if pos + _UNIT.size > len(data):
            raise CorruptionError(f"unit {len(units)}: truncated unit header at byte {pos}")
        utype, level, index, length = _UNIT.unpack_from(data, pos)
        pos += _UNIT.size
        if pos + length > len(data):
            raise CorruptionError(
                f"unit {len(units)} (type {utype}, level {level}, index {index}): "
                f"length {length} overruns the stream"
            )
        try:
            ut = UnitType(utype)
        except ValueError:
            raise CorruptionError(f"unit {len(units)}: unknown unit type {utype}") from None
        units.append(CodedUnit(ut, level, index, data[pos : pos + length]))
        pos += length
    _validate_order(units)
    return header, units


def _validate_order(units):
    info = None
    last_level = None
    seen_low = False
    for n, u in enumerate(units):
        if u.unit_type == UnitType.GOP_HEADER:
            info = GopInfo.unpack(u.payload)
            last_level, seen_low = None, False
            continue
        if info is None:
            raise CorruptionError(f"unit {n}: coded data before any GOP header")
        if u.unit_type == UnitType.LOWPASS:
            if seen_low or last_level is not None:
                raise CorruptionError(f"unit {n}: lowpass must directly follow its GOP header")
            if u.temporal_level != info.levels:
                raise CorruptionError(f"unit {n}: lowpass level {u.temporal_level} != GOP depth {info.levels}")
            seen_low = True
            continue
        if not seen_low:
            raise CorruptionError(f"unit {n}: detail unit before the GOP lowpass")
        if not (info.dropped < u.temporal_level <= info.levels):
            raise CorruptionError(f"unit {n}: level {u.temporal_level} outside the GOP's coded levels")
        if last_level is not None and u.temporal_level > last_level:
            raise CorruptionError(f"unit {n}: level {u.temporal_level} after level {last_level} (coarse-first order)")
        last_level = u.temporal_level


def split_gops(units):
    """Group a flat unit list into ``(GopInfo, [units])`` per GOP."""
    out = []
    for u in units:
        if u.unit_type == UnitType.GOP_HEADER:
            out.append((GopInfo.unpack(u.payload), []))
        else:
            out[-1][1].append(u)
    return out


def drop_layers(data: bytes, k: int) -> bytes:
    """Remove the ``k`` finest temporal levels (and their motion) from a stream."""
    header, units = parse_stream(data)
    gops = split_gops(units)
    max_levels = max((g.levels for g, _ in gops), default=0)
    if k < 0 or k > max_levels:
        raise ArgumentError(f"cannot drop {k} layers from a stream with {max_levels} temporal levels")
    prev = max((g.dropped for g, _ in gops), default=0)
    if k <= prev:
        return bytes(data)
    out_gops = []
    frames = 0
    for info, gunits in gops:
        new_info = replace(info, dropped=max(info.dropped, min(k, info.levels)))
        kept = [u for u in gunits if u.unit_type == UnitType.LOWPASS or u.temporal_level > k]
        out_gops.append([new_info.unit()] + kept)
        frames += new_info.output_frames
    rate = Fraction(header.frame_rate) / (1 << (k - prev))
    new_header = replace(header, frame_count=frames, frame_rate=rate)
    return write_stream(new_header, out_gops)


def dump_units(data: bytes) -> str:
    header, units = parse_stream(data)
    lines = [
        f"# LWVC v{header.version} {header.width}x{header.height} {header.bit_depth}-bit "
        f"frames={header.frame_count} rate={header.frame_rate} q={header.q:g} "
        f"gop={'auto' if header.gop_mode == 0 else header.gop_mode} "
        f"{'lossless' if header.lossless else 'lossy'}",
        f"{'unit':>5} {'type':<10} {'level':>5} {'index':>5} {'bytes':>8}",
    ]
    for n, u in enumerate(units):
        lines.append(f"{n:>5} {u.unit_type.name.lower():<10} {u.temporal_level:>5} {u.index:>5} {len(u.payload):>8}")
    return "\n".join(lines) + "\n"
