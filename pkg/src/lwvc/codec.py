"""Encoder and decoder: GOP planning, temporal + spatial transforms, quantization, units.

Each GOP is decomposed with motion-compensated temporal lifting; every
temporal subband picture is then wavelet transformed per plane, quantized
and entropy coded into its own unit. Motion fields are coded losslessly.
The decoder repeats the encoder's dequantization exactly, so the
encoder-side reconstruction and the decoder output agree bit for bit.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import bitstream as bs
from .dwt2d import FLOAT_97, INT_53, KERNEL_IDS, ORIENTATIONS, SubbandImage, band_weight
from .dwt2d import band_shapes, default_levels, forward_dwt, inverse_dwt, max_levels
from .entropy import ORIENT_IDS, BandLayout, code_motion_field, decode_bands, decode_motion_field, encode_bands
from .errors import ArgumentError, ConfigError, CorruptionError, FormatError, LwvcError, PlanError
from .mctf import GopPlan, MEParams, TemporalSubbandPyramid, decompose_gop, is_pow2, reconstruct_gop
from .media_io import Frame, VideoSequence, chroma_shape
from .metrics import mse
from .motion import estimate_motion, grid_shape, residual_sad
from .quant import QuantConfig, dequantize, quantize_deadzone

_STEPS = struct.Struct("<dd")
GOP_CANDIDATES = (4, 8, 16)
GOP_THRESHOLD = 3.0


@dataclass(frozen=True)
class CodecConfig:
    quant: QuantConfig = field(default_factory=QuantConfig)
    gop: int | str = 16  # fixed size or "auto"
    gop_candidates: tuple = GOP_CANDIDATES
    gop_selection: str = "heuristic"  # or "exhaustive"
    gop_threshold: float = GOP_THRESHOLD  # mean SAD per pixel, 8-bit scale
    lossless: bool = False
    kernel: str | None = None  # None: 5/3 when lossless, else 9/7
    spatial_levels: int | None = None
    search_range: int = 32
    block_size: int = 8

    def __post_init__(self):
        kern = self.kernel or (INT_53 if self.lossless else FLOAT_97)
        object.__setattr__(self, "kernel", kern)
        if kern not in KERNEL_IDS:
            raise ConfigError(f"unknown kernel {kern!r}")
        if self.lossless and kern != INT_53:
            raise ConfigError("lossless coding needs the integer 5/3 kernel")
        if self.gop != "auto":
            if isinstance(self.gop, bool) or not isinstance(self.gop, (int, np.integer)):
                raise ConfigError(f"gop must be a power of two <= 16 or 'auto', got {self.gop!r}")
            try:
                GopPlan(int(self.gop))
            except PlanError as exc:
                raise ConfigError(str(exc)) from exc
        cands = tuple(int(c) for c in self.gop_candidates)
        if not cands or any(not is_pow2(c) or c > 16 for c in cands):
            raise ConfigError(f"GOP candidates must be powers of two <= 16, got {self.gop_candidates}")
        object.__setattr__(self, "gop_candidates", tuple(sorted(set(cands))))
        if self.gop_selection not in ("heuristic", "exhaustive"):
            raise ConfigError(f"unknown GOP selection mode {self.gop_selection!r}")
        if not self.gop_threshold >= 0:
            raise ConfigError("gop_threshold must be non-negative")
        if self.spatial_levels is not None and not 1 <= self.spatial_levels <= 16:
            raise ConfigError("spatial_levels must be in 1..16")
        if self.search_range < 1:
            raise ConfigError("search range must be >= 1")
        if self.block_size < 2 or self.block_size % 2 or self.block_size > 255:
            raise ConfigError("block size must be an even number in 2..254")

    def with_q(self, q: float) -> "CodecConfig":
        return replace(self, quant=self.quant.with_q(q))

    def me_params(self, block_size: int) -> MEParams:
        lam = {j: self.quant.mv_lambda_at(j) for j in range(1, 5)}
        return MEParams(self.search_range, block_size, lam)


@dataclass(frozen=True)
class RDCost:
    subband_bits: int
    mv_bits: int
    frame_mse: tuple
    lam: float

    def __post_init__(self):
        if self.subband_bits < 0 or self.mv_bits < 0 or self.lam < 0 or any(m < 0 for m in self.frame_mse):
            raise ArgumentError("RD cost components must be non-negative")

    @property
    def rate_bits(self) -> int:
        return self.subband_bits + self.mv_bits

    @property
    def mse_sum(self) -> float:
        return float(sum(self.frame_mse))

    @property
    def cost(self) -> float:
        return rd_cost(self.rate_bits, self.mse_sum, self.lam)


def rd_cost(rate_bits: float, mse_sum: float, lam: float) -> float:
    """J = R + lambda * D with D summed over frames."""
    if rate_bits < 0 or mse_sum < 0 or lam < 0:
        raise ArgumentError("rd_cost inputs must be non-negative")
    return rate_bits + lam * mse_sum


def operational_lambda(config: CodecConfig, pixels: int) -> float:
    """Bits traded per unit of per-frame MSE in GOP trial encodes."""
    q = config.quant
    return q.lam * q.rd_lambda_scale * pixels


# ---------------------------------------------------------------------------
# one picture <-> one unit payload


def _plane_levels(shape, levels):
    return min(levels, max_levels(shape))


def _picture_layout(shapes, levels):
    """Band layout for (Y, Cb, Cr) plus, per band, (plane, level, orientation)."""
    layout = BandLayout()
    tags = []
    for p, shape in enumerate(shapes):
        chroma = 4 * (p > 0)
        lev = _plane_levels(shape, levels)
        if lev == 0:
            layout.add(shape, is_ll=True, ctxset=chroma)
            tags.append((p, 0, "LL"))
            continue
        bshapes = band_shapes(shape, lev)
        layout.add(bshapes[-1][0], is_ll=True, ctxset=chroma)
        tags.append((p, lev, "LL"))
        prev = {}
        for j in range(lev, 0, -1):
            cur = {}
            for o, oshape in zip(ORIENTATIONS, bshapes[j - 1][1:]):
                cur[o] = layout.add(oshape, parent=prev.get(o, -1), ctxset=ORIENT_IDS[o] + chroma)
                tags.append((p, j, o))
            prev = cur
    return layout, tags


def _band_step(kernel, levels, lev, orient, step_ll, step_h, lowpass):
    base = step_ll if (lowpass and orient == "LL") else step_h
    if levels == 0:
        return base
    return base / band_weight(kernel, lev, orient, levels)


def _dc_offset(bit_depth):
    return 1 << (bit_depth - 1)


@dataclass(frozen=True)
class _PictureCoder:
    kernel: str
    levels: int
    lossless: bool
    bit_depth: int
    shapes: tuple

    def layout(self):
        return _picture_layout(self.shapes, self.levels)

    def analyze(self, picture, lowpass, step_ll, step_h):
        """Integer band indices of one temporal subband picture."""
        bands = []
        off = _dc_offset(self.bit_depth) if lowpass else 0
        for p, plane in enumerate(picture):
            plane = np.asarray(plane, np.int64) - off
            lev = _plane_levels(plane.shape, self.levels)
            if lev == 0:
                coefs = [(0, "LL", plane)]
            else:
                sub = forward_dwt(plane, lev, self.kernel)
                coefs = list(sub.bands())
            for j, o, c in coefs:
                if self.lossless:
                    bands.append(np.asarray(c, np.int64))
                else:
                    st = _band_step(self.kernel, lev, j, o, step_ll, step_h, lowpass)
                    bands.append(quantize_deadzone(c, st))
        return bands

    def synthesize(self, bands, lowpass, step_ll, step_h):
        """Picture from band indices; shared by encoder simulation and decoder."""
        out = []
        off = _dc_offset(self.bit_depth) if lowpass else 0
        pos = 0
        for shape in self.shapes:
            lev = _plane_levels(shape, self.levels)
            n = 1 + 3 * lev
            mine = bands[pos : pos + n]
            pos += n
            if not self.lossless:
                deq = []
                tags = [(lev, "LL")] + [(j, o) for j in range(lev, 0, -1) for o in ORIENTATIONS]
                for (j, o), b in zip(tags, mine):
                    d = dequantize(b, _band_step(self.kernel, lev, j, o, step_ll, step_h, lowpass))
                    deq.append(np.rint(d).astype(np.int64) if (self.kernel == INT_53 or lev == 0) else d)
                mine = deq
            if lev == 0:
                plane = np.asarray(mine[0])
            else:
                details = [None] * lev
                for j in range(lev, 0, -1):
                    k = 1 + 3 * (lev - j)
                    details[j - 1] = tuple(mine[k : k + 3])
                sub = SubbandImage(mine[0], details, self.kernel, tuple(shape))
                plane = inverse_dwt(sub)
            plane = np.rint(plane).astype(np.int64) if plane.dtype.kind == "f" else plane.astype(np.int64)
            out.append(plane + off)
        return tuple(out)

    def pack(self, bands, step_ll, step_h):
        layout, _ = self.layout()
        return _STEPS.pack(step_ll, step_h) + encode_bands(bands, layout)

    def unpack(self, payload, what):
        if len(payload) < _STEPS.size:
            raise CorruptionError(f"{what}: payload too short for step sizes")
        step_ll, step_h = _STEPS.unpack_from(payload)
        if not self.lossless and not (step_ll > 0 and step_h > 0 and math.isfinite(step_ll) and math.isfinite(step_h)):
            raise CorruptionError(f"{what}: invalid quantizer steps")
        layout, _ = self.layout()
        bands = decode_bands(payload[_STEPS.size :], layout, what=what)
        return bands, step_ll, step_h


def _steps(config: CodecConfig, level: int):
    q = config.quant
    return q.step(level, True), q.step(level, False)


# ---------------------------------------------------------------------------
# encoder


@dataclass
class GopRecord:
    start: int
    size: int
    pyramid: TemporalSubbandPyramid
    pyramid_hat: TemporalSubbandPyramid  # dequantized subbands the decoder will see
    subband_bits: int
    mv_bits: int

    @property
    def bits(self) -> int:
        return self.subband_bits + self.mv_bits


@dataclass
class EncodeResult:
    stream: bytes
    reconstruction: VideoSequence
    gops: list
    rd: RDCost
    bit_depth: int = 8

    def lowpass_reconstruction(self, k: int) -> list:
        """Encoder-side frames a decoder produces after dropping ``k`` layers."""
        out = []
        for g in self.gops:
            kk = min(k, g.pyramid_hat.levels)
            out.extend(_to_frame(p, self.bit_depth) for p in reconstruct_gop(g.pyramid_hat, kk))
        return out


def _to_frame(picture, bit_depth) -> Frame:
    top = (1 << bit_depth) - 1
    y, cb, cr = (np.clip(p, 0, top) for p in picture)
    return Frame(y, cb, cr, bit_depth)


def effective_block_size(block_size: int, shape) -> int:
    lim = min(shape) - (min(shape) % 2)
    return max(2, min(block_size, lim))


def _split_pow2(n: int, top: int = 16) -> list:
    """Remainder lengths as descending powers of two (ends in 1 when odd)."""
    out = []
    while n > 0:
        g = min(top, 1 << (n.bit_length() - 1))
        out.append(g)
        n -= g
    return out


def _encode_gop(frames, size, config, coder, block, gop_index, start, fields=None):
    plan = GopPlan(size)
    pyr = decompose_gop(frames, plan, config.me_params(block), fields=fields)
    units = [bs.GopInfo(size, plan.levels, 0, block).unit()]
    sub_bits = mv_bits = 0

    def code_picture(pic, level, lowpass, utype, index):
        nonlocal sub_bits
        sl, sh = _steps(config, level)
        if config.lossless:
            sl = sh = 1.0
        bands = coder.analyze(pic, lowpass, sl, sh)
        payload = coder.pack(bands, sl, sh)
        sub_bits += 8 * len(payload)
        units.append(bs.CodedUnit(utype, level, index, payload))
        return coder.synthesize(bands, lowpass, sl, sh)

    low_hat = code_picture(pyr.lowpass, plan.levels, True, bs.UnitType.LOWPASS, 0)
    high_hat = {}
    for j in range(plan.levels, 0, -1):
        high_hat[j] = []
        for t, (h, fld) in enumerate(zip(pyr.highpass[j], pyr.fields[j])):
            mv = code_motion_field(fld)
            mv_bits += 8 * len(mv)
            units.append(bs.CodedUnit(bs.UnitType.MOTION, j, t, mv))
            high_hat[j].append(code_picture(h, j, False, bs.UnitType.HIGHPASS, t))
    hat = TemporalSubbandPyramid(size, low_hat, high_hat, pyr.fields)
    rec = GopRecord(start, size, pyr, hat, sub_bits, mv_bits)
    return units, rec


def _gop_schedule(frames, config: CodecConfig, coder, block) -> list:
    n = len(frames)
    if config.gop != "auto":
        g = int(config.gop)
        sizes = [g] * (n // g) + _split_pow2(n % g, g)
        return sizes
    top = max(config.gop_candidates)
    sizes = []
    pos = 0
    while pos < n:
        window = frames[pos : pos + top]
        cands = [c for c in config.gop_candidates if c <= len(window)]
        if not cands:
            rest = _split_pow2(n - pos)
            sizes.extend(rest)
            break
        g = select_gop_size(window, cands, config, _coder=coder, _block=block)
        span = (len(window) // g) * g
        sizes.extend([g] * (span // g))
        pos += span
    return sizes


def _pictures(video) -> list:
    return [tuple(np.asarray(p, np.int64) for p in f.planes) for f in video.frames]


def _coder_for(config: CodecConfig, shape, bit_depth) -> _PictureCoder:
    levels = config.spatial_levels if config.spatial_levels is not None else default_levels(shape)
    if config.spatial_levels is not None and levels > max_levels(shape):
        from .errors import LevelOverflowError

        raise LevelOverflowError(f"{levels} spatial levels too deep for {shape[1]}x{shape[0]} luma")
    shapes = (tuple(shape), chroma_shape(*shape), chroma_shape(*shape))
    return _PictureCoder(config.kernel, levels, config.lossless, bit_depth, shapes)


def encode(video: VideoSequence, config: CodecConfig | None = None, progress=None) -> EncodeResult:
    """Encode ``video``; also returns the encoder-side reconstruction and per-GOP records."""
    config = config or CodecConfig()
    if not isinstance(video, VideoSequence):
        raise ArgumentError("encode expects a VideoSequence")
    f0 = video.frames[0]
    shape = f0.luma.shape
    coder = _coder_for(config, shape, f0.bit_depth)
    block = effective_block_size(config.block_size, shape)
    frames = _pictures(video)
    sizes = _gop_schedule(frames, config, coder, block)
    header = bs.StreamHeader(
        width=shape[1],
        height=shape[0],
        bit_depth=f0.bit_depth,
        frame_count=len(frames),
        frame_rate=video.frame_rate,
        kernel_id=KERNEL_IDS[config.kernel],
        spatial_levels=coder.levels,
        q=config.quant.q,
        gop_mode=0 if config.gop == "auto" else int(config.gop),
        lossless=config.lossless,
    )
    gops, records, recon = [], [], []
    pos = 0
    for gi, g in enumerate(sizes):
        units, rec = _encode_gop(frames[pos : pos + g], g, config, coder, block, gi, pos)
        gops.append(units)
        records.append(rec)
        recon.extend(_to_frame(p, f0.bit_depth) for p in reconstruct_gop(rec.pyramid_hat, 0))
        pos += g
        if progress:
            progress(f"GOP {gi}: frames {rec.start}-{rec.start + g - 1}, {rec.bits} bits")
    stream = bs.write_stream(header, gops)
    seq = VideoSequence(tuple(recon), video.frame_rate)
    rd = RDCost(
        sum(r.subband_bits for r in records),
        sum(r.mv_bits for r in records),
        tuple(mse(a, b) for a, b in zip(video.frames, recon)),
        operational_lambda(config, shape[0] * shape[1]),
    )
    return EncodeResult(stream, seq, records, rd, f0.bit_depth)


def encode_sequence(video: VideoSequence, config: CodecConfig | None = None) -> bytes:
    return encode(video, config).stream


# ---------------------------------------------------------------------------
# GOP size selection


def _mean_sad(frames, a, b, config, block, cache):
    key = (a, b)
    if key not in cache:
        ref, cur = frames[a][0], frames[b][0]
        fld = estimate_motion(ref, cur, config.search_range, 0.0, block)
        cache[key] = residual_sad(ref, cur, fld) / cur.size
    return cache[key]


def gop_activity(frames, g, config: CodecConfig, block=None, cache=None) -> float:
    """Largest per-level mean ME residual SAD per pixel for GOPs of size ``g``.

    At level j the pairs are 2^(j-1) frames apart, as in the temporal
    decomposition; original frames stand in for the lowpass pictures.
    """
    frames = [f if isinstance(f, tuple) else tuple(np.asarray(p, np.int64) for p in f.planes) for f in frames]
    block = block or effective_block_size(config.block_size, frames[0][0].shape)
    cache = {} if cache is None else cache
    worst = 0.0
    for j in range(1, g.bit_length()):
        half = 1 << (j - 1)
        vals = []
        for s in range(0, len(frames) - g + 1, g):
            for t in range(s, s + g, 1 << j):
                vals.append(_mean_sad(frames, t, t + half, config, block, cache))
        if vals:
            worst = max(worst, float(np.mean(vals)))
    return worst


def select_gop_size(frames: Sequence, candidates=GOP_CANDIDATES, config: CodecConfig | None = None, _coder=None, _block=None) -> int:
    """Pick a GOP size for the window ``frames`` from power-of-two ``candidates``."""
    config = config or CodecConfig(gop="auto")
    cands = sorted({int(c) for c in candidates})
    if not cands or any(not is_pow2(c) or c > 16 for c in cands):
        raise ConfigError(f"GOP candidates must be powers of two <= 16, got {candidates}")
    pics = [f if isinstance(f, tuple) else tuple(np.asarray(p, np.int64) for p in f.planes) for f in frames]
    cands = [c for c in cands if c <= len(pics)]
    if not cands:
        return 1 << (len(pics).bit_length() - 1) if pics else 1
    shape = pics[0][0].shape
    block = _block or effective_block_size(config.block_size, shape)
    if config.gop_selection == "exhaustive":
        bd = getattr(frames[0], "bit_depth", 8)
        coder = _coder or _coder_for(config, shape, bd)
        lam = operational_lambda(config, shape[0] * shape[1])
        best = None
        for c in cands:
            j = trial_cost(pics, c, config, coder, block, lam)
            if best is None or j <= best[0]:  # ties go to the larger GOP
                best = (j, c)
        return best[1]
    bd = getattr(frames[0], "bit_depth", 8)
    theta = config.gop_threshold * (1 << (bd - 8))
    cache = {}
    chosen = None
    for c in cands:
        if c == 1:
            continue
        if gop_activity(pics, c, config, block, cache) <= theta:
            chosen = c
    if chosen is not None:
        return chosen
    return 2 if len(pics) >= 2 else 1


def trial_cost(pics, gop, config, coder, block, lam) -> float:
    """J of coding ``pics`` (length a multiple of ``gop``) with fixed GOP size."""
    n = (len(pics) // gop) * gop
    bits, dist = 0, 0.0
    for s in range(0, n, gop):
        _, rec = _encode_gop(pics[s : s + gop], gop, config, coder, block, 0, s)
        bits += rec.bits
        top = (1 << coder.bit_depth) - 1
        for orig, hat in zip(pics[s : s + gop], reconstruct_gop(rec.pyramid_hat, 0)):
            dist += mse([orig], [tuple(np.clip(p, 0, top) for p in hat)])
    return rd_cost(bits, dist, lam)


# ---------------------------------------------------------------------------
# decoder


def _unit_name(gi, n, u):
    return f"GOP {gi} unit {n} ({u.unit_type.name.lower()}, level {u.temporal_level}, index {u.index})"


def decode_sequence(data: bytes, max_dropped_layers: int = 0) -> VideoSequence:
    """Decode a stream, optionally dropping the ``max_dropped_layers`` finest temporal levels."""
    if max_dropped_layers < 0:
        raise ArgumentError("max_dropped_layers must be >= 0")
    if max_dropped_layers:
        data = bs.drop_layers(data, max_dropped_layers)
    header, units = bs.parse_stream(data)
    kernels = {v: k for k, v in KERNEL_IDS.items()}
    if header.kernel_id not in kernels:
        raise FormatError(f"unknown wavelet kernel id {header.kernel_id}")
    kernel = kernels[header.kernel_id]
    if header.bit_depth not in (8, 10):
        raise FormatError(f"unsupported bit depth {header.bit_depth}")
    if header.lossless and kernel != INT_53:
        raise CorruptionError("lossless stream must use the 5/3 kernel")
    shape = (header.height, header.width)
    if header.spatial_levels > max(max_levels(shape), 0) or (header.spatial_levels == 0 and max_levels(shape) > 0):
        raise CorruptionError(f"stream header: {header.spatial_levels} spatial levels invalid for {header.width}x{header.height}")
    shapes = (shape, chroma_shape(*shape), chroma_shape(*shape))
    coder = _PictureCoder(kernel, header.spatial_levels, header.lossless, header.bit_depth, shapes)
    out = []
    n = 0
    for gi, (info, gunits) in enumerate(_gops_with_offsets(units)):
        frames, n = _decode_gop(gi, info, gunits, coder, shape, header.bit_depth, n)
        out.extend(frames)
    if len(out) != header.frame_count:
        raise CorruptionError(f"stream declares {header.frame_count} frames but carries {len(out)}")
    if not out:
        raise CorruptionError("stream carries no frames")
    return VideoSequence(tuple(out), header.frame_rate)


def _gops_with_offsets(units):
    out = []
    for n, u in enumerate(units):
        if u.unit_type == bs.UnitType.GOP_HEADER:
            out.append((bs.GopInfo.unpack(u.payload), [(n, u)]))
        else:
            out[-1][1].append((n, u))
    return out


def _decode_gop(gi, info, gunits, coder, shape, bit_depth, n):
    block = info.block_size
    if block < 2 or block % 2 or block > min(shape):
        raise CorruptionError(f"GOP {gi}: invalid block size {block}")
    grid = grid_shape(shape, block)
    low = None
    highs = {j: [None] * (info.gop_size >> j) for j in range(info.dropped + 1, info.levels + 1)}
    flds = {j: [None] * (info.gop_size >> j) for j in highs}
    for un, u in gunits[1:]:
        what = _unit_name(gi, un, u)
        try:
            if u.unit_type == bs.UnitType.LOWPASS:
                bands, sl, sh = coder.unpack(u.payload, what)
                low = coder.synthesize(bands, True, sl, sh)
                continue
            j, t = u.temporal_level, u.index
            if t >= len(highs[j]):
                raise CorruptionError(f"{what}: index beyond {len(highs[j])} pictures at this level")
            if u.unit_type == bs.UnitType.MOTION:
                if flds[j][t] is not None:
                    raise CorruptionError(f"{what}: duplicate motion unit")
                flds[j][t] = decode_motion_field(u.payload, grid, block, shape)
                if np.abs(flds[j][t].vectors).max(initial=0) > 4 * max(shape):
                    raise CorruptionError(f"{what}: motion vector out of range")
            else:
                if highs[j][t] is not None:
                    raise CorruptionError(f"{what}: duplicate highpass unit")
                bands, sl, sh = coder.unpack(u.payload, what)
                highs[j][t] = coder.synthesize(bands, False, sl, sh)
        except FormatError:
            raise
        except LwvcError as exc:
            raise CorruptionError(f"{what}: {exc}") from exc
    if low is None:
        raise CorruptionError(f"GOP {gi}: missing lowpass unit")
    for j in highs:
        for t in range(len(highs[j])):
            if highs[j][t] is None or flds[j][t] is None:
                raise CorruptionError(f"GOP {gi}: missing highpass/motion unit at level {j} index {t}")
    pyr = TemporalSubbandPyramid(info.gop_size, low, highs, flds)
    pics = reconstruct_gop(pyr, info.dropped)
    return [_to_frame(p, bit_depth) for p in pics], n + len(pics)


# ---------------------------------------------------------------------------
# config file


def _parse_gop(text):
    text = str(text).strip().lower()
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"gop must be an integer or 'auto', got {text!r}") from None


def codec_config_from_file(path=None, base: CodecConfig | None = None) -> CodecConfig:
    """Apply the ``[quant]`` and ``[codec]`` sections of an INI file on top of ``base``."""
    from .quant import quant_config_from_section, read_config_file

    cfg = base or CodecConfig()
    if path is None:
        return cfg
    parser = read_config_file(path)
    known = {"quant", "codec"}
    extra = [s for s in parser.sections() if s not in known]
    if extra:
        raise ConfigError(f"{path}: unknown section(s) {', '.join(extra)}")
    quant = cfg.quant
    if parser.has_section("quant"):
        quant = quant_config_from_section(parser["quant"], quant)
    kw = {"quant": quant}
    if parser.has_section("codec"):
        sec = parser["codec"]
        allowed = {
            "gop", "gop_candidates", "gop_selection", "gop_threshold", "lossless",
            "kernel", "spatial_levels", "search_range", "block_size",
        }
        bad = set(sec) - allowed
        if bad:
            raise ConfigError(f"{path}: unknown [codec] key(s) {', '.join(sorted(bad))}")
        try:
            if "gop" in sec:
                kw["gop"] = _parse_gop(sec["gop"])
            if "gop_candidates" in sec:
                kw["gop_candidates"] = tuple(int(c) for c in sec["gop_candidates"].replace(",", " ").split())
            if "gop_selection" in sec:
                kw["gop_selection"] = sec["gop_selection"].strip()
            if "gop_threshold" in sec:
                kw["gop_threshold"] = float(sec["gop_threshold"])
            if "lossless" in sec:
                kw["lossless"] = sec.getboolean("lossless")
            if "kernel" in sec:
                kw["kernel"] = sec["kernel"].strip()
            if "spatial_levels" in sec:
                kw["spatial_levels"] = int(sec["spatial_levels"])
            if "search_range" in sec:
                kw["search_range"] = int(sec["search_range"])
            if "block_size" in sec:
                kw["block_size"] = int(sec["block_size"])
        except ValueError as exc:
            raise ConfigError(f"{path}: [codec] {exc}") from exc
    if kw.get("lossless") and "kernel" not in kw:
        kw["kernel"] = INT_53
    return replace(cfg, **kw)
