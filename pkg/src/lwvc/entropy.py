"""Adaptive binary range coder and the coefficient / motion binarizations.

The coder is an LZMA-style carry-propagating range coder with 32-bit
range and 16-bit coding probabilities. Each context keeps a 24-bit
probability that adapts with a rate of 1/2, 1/4, ... while it is young and
settles at 2**-ADAPT_MAX_SHIFT.

Payload layout: coder bytes (the always-zero leading byte omitted) followed
by the two-byte terminator ``TERMINATOR``.

Coefficient binarization, per sample in raster order within a band:
significance flag, sign, then ``|v| - 1`` as up to four context-coded unary
bins with an order-0 exp-Golomb bypass tail. The LL band is coded as
the residual of a median edge detector predictor. Contexts come from the
causal neighborhood and the co-located coefficient of the parent band.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .errors import CorruptionError, TruncationError
from .motion import MotionField, median_predictor

TERMINATOR = b"\xc3\x3c"
PROB_BITS = 24
PROB_ONE = 1 << PROB_BITS
ADAPT_MAX_SHIFT = 16
P16_MIN = 16
HALF = PROB_ONE >> 1
MAX_PREFIX = 40

# context layout per coefficient context set
N_SIG = 9
N_SIGN = 3
N_MAG = 5
SIG_BASE = 0
SIGN_BASE = N_SIG
MAG_BASE = N_SIG + N_SIGN
CTX_PER_SET = N_SIG + N_SIGN + N_MAG
UNARY_BINS = 4

ORIENT_IDS = {"LL": 0, "HL": 1, "LH": 2, "HH": 3}

# encoder state slots
_LOW, _RNG, _CACHE, _CSIZE, _POS, _FIRST = range(6)
# decoder state slots
_CODE, _DRNG, _DPOS, _ERR, _LIMIT = range(5)


# ---------------------------------------------------------------------------
# range coder primitives


@njit
def _new_encoder():
    st = np.zeros(6, np.int64)
    st[_RNG] = 0xFFFFFFFF
    st[_CSIZE] = 1
    st[_FIRST] = 1
    return st


@njit
def _put_byte(st, buf, b):
    if st[_FIRST] == 1:
        # the first byte out of an LZMA-style coder is always zero
        st[_FIRST] = 0
        return buf
    pos = st[_POS]
    if pos >= buf.shape[0]:
        nb = np.empty(buf.shape[0] * 2 + 16, np.uint8)
        nb[:pos] = buf[:pos]
        buf = nb
    buf[pos] = b
    st[_POS] = pos + 1
    return buf


@njit
def _shift_low(st, buf):
    low = st[_LOW]
    if low < 0xFF000000 or low >= 0x100000000:
        carry = low >> 32
        temp = st[_CACHE]
        while True:
            buf = _put_byte(st, buf, (temp + carry) & 0xFF)
            temp = 0xFF
            st[_CSIZE] -= 1
            if st[_CSIZE] == 0:
                break
        st[_CACHE] = (low >> 24) & 0xFF
    st[_CSIZE] += 1
    st[_LOW] = (low & 0x00FFFFFF) << 8
    return buf


@njit
def _p16(prob):
    p = prob >> (PROB_BITS - 16)
    if p < P16_MIN:
        return P16_MIN
    if p > 65536 - P16_MIN:
        return 65536 - P16_MIN
    return p


@njit
def _enc_raw(st, buf, p1, bit):
    rng = st[_RNG]
    bound = (rng * (65536 - p1)) >> 16
    if bit == 0:
        st[_RNG] = bound
    else:
        st[_LOW] += bound
        st[_RNG] = rng - bound
    while st[_RNG] < 0x1000000:
        st[_RNG] <<= 8
        buf = _shift_low(st, buf)
    return buf


@njit
def _adapt(probs, counts, c, bit):
    n = counts[c]
    shift = 1
    m = n + 2
    while m > 3 and shift < ADAPT_MAX_SHIFT:
        m >>= 1
        shift += 1
    if n < 1 << 20:
        counts[c] = n + 1
    if bit:
        probs[c] += (PROB_ONE - probs[c]) >> shift
    else:
        probs[c] -= probs[c] >> shift


@njit
def _enc_ctx(st, buf, probs, counts, c, bit):
    buf = _enc_raw(st, buf, _p16(probs[c]), bit)
    _adapt(probs, counts, c, bit)
    return buf


@njit
def _enc_bypass(st, buf, bit):
    return _enc_raw(st, buf, 32768, bit)


@njit
def _enc_finish(st, buf):
    for _ in range(5):
        buf = _shift_low(st, buf)
    return buf[: st[_POS]].copy()


@njit
def _new_decoder(data):
    ds = np.zeros(5, np.int64)
    ds[_DRNG] = 0xFFFFFFFF
    ds[_LIMIT] = data.shape[0] - 2
    if ds[_LIMIT] < 0:
        ds[_LIMIT] = 0
        ds[_ERR] = 1
    for _ in range(4):
        ds[_CODE] = ((ds[_CODE] << 8) | _next_byte(ds, data)) & 0xFFFFFFFF
    return ds


@njit
def _next_byte(ds, data):
    pos = ds[_DPOS]
    if pos < ds[_LIMIT]:
        ds[_DPOS] = pos + 1
        return np.int64(data[pos])
    ds[_ERR] = 1
    return np.int64(0)


@njit
def _dec_raw(ds, data, p1):
    rng = ds[_DRNG]
    bound = (rng * (65536 - p1)) >> 16
    if ds[_CODE] < bound:
        ds[_DRNG] = bound
        bit = 0
    else:
        ds[_CODE] -= bound
        ds[_DRNG] = rng - bound
        bit = 1
    while ds[_DRNG] < 0x1000000:
        ds[_DRNG] <<= 8
        ds[_CODE] = ((ds[_CODE] << 8) | _next_byte(ds, data)) & 0xFFFFFFFF
    return bit


@njit
def _dec_ctx(ds, data, probs, counts, c):
    bit = _dec_raw(ds, data, _p16(probs[c]))
    _adapt(probs, counts, c, bit)
    return bit


@njit
def _dec_bypass(ds, data):
    return _dec_raw(ds, data, 32768)


@njit
def _new_contexts(n):
    probs = np.full(n, HALF, np.int64)
    counts = np.zeros(n, np.int64)
    return probs, counts


# exp-Golomb (order 0) in bypass bins


@njit
def _enc_eg0(st, buf, n):
    v = n + 1
    nbits = 0
    t = v
    while t > 1:
        t >>= 1
        nbits += 1
    for _ in range(nbits):
        buf = _enc_bypass(st, buf, 0)
    for i in range(nbits, -1, -1):
        buf = _enc_bypass(st, buf, (v >> i) & 1)
    return buf


@njit
def _dec_eg0(ds, data):
    nbits = 0
    while _dec_bypass(ds, data) == 0:
        nbits += 1
        if nbits > MAX_PREFIX or ds[_ERR]:
            ds[_ERR] = 1
            return 0
    v = 1
    for _ in range(nbits):
        v = (v << 1) | _dec_bypass(ds, data)
    return v - 1


# ---------------------------------------------------------------------------
# bulk bit coding (used for coder-level checks)


@njit
def _encode_bits_kernel(bits, ctx, nctx):
    st = _new_encoder()
    buf = np.empty(bits.shape[0] // 8 + 64, np.uint8)
    probs, counts = _new_contexts(nctx)
    for i in range(bits.shape[0]):
        buf = _enc_ctx(st, buf, probs, counts, ctx[i], bits[i])
    return _enc_finish(st, buf)


@njit
def _decode_bits_kernel(data, ctx, nctx):
    ds = _new_decoder(data)
    probs, counts = _new_contexts(nctx)
    out = np.empty(ctx.shape[0], np.int64)
    for i in range(ctx.shape[0]):
        out[i] = _dec_ctx(ds, data, probs, counts, ctx[i])
    return out, ds[_ERR], ds[_DPOS]


def _with_terminator(arr: np.ndarray) -> bytes:
    return arr.tobytes() + TERMINATOR


def _payload_array(data: bytes, what: str) -> np.ndarray:
    if len(data) < len(TERMINATOR) or bytes(data[-2:]) != TERMINATOR:
        raise TruncationError(f"{what}: missing range-coder terminator (truncated payload)")
    return np.frombuffer(bytes(data), dtype=np.uint8)


def encode_bits(bits, contexts=None, n_contexts: int = 1) -> bytes:
    """Range-code a bit sequence; ``contexts[i]`` picks the adaptive model of bit i."""
    bits = np.ascontiguousarray(bits, dtype=np.int64)
    ctx = np.zeros(bits.shape[0], np.int64) if contexts is None else np.ascontiguousarray(contexts, np.int64)
    return _with_terminator(_encode_bits_kernel(bits, ctx, n_contexts))


def decode_bits(data: bytes, count: int, contexts=None, n_contexts: int = 1) -> np.ndarray:
    arr = _payload_array(data, "bit stream")
    ctx = np.zeros(count, np.int64) if contexts is None else np.ascontiguousarray(contexts, np.int64)
    out, err, _ = _decode_bits_kernel(arr, ctx, n_contexts)
    if err:
        raise TruncationError("bit stream: decoder ran past the end of the payload")
    return out


# ---------------------------------------------------------------------------
# incremental coder objects (per-bit API)


@dataclass
class BinaryContext:
    """One adaptive binary model."""

    prob: int = HALF
    count: int = 0

    @property
    def p1(self) -> float:
        return _p16(self.prob) / 65536.0

    def _arrays(self):
        return np.array([self.prob], np.int64), np.array([self.count], np.int64)

    def _store(self, probs, counts):
        self.prob, self.count = int(probs[0]), int(counts[0])


class RangeEncoder:
    def __init__(self):
        self._st = _new_encoder()
        self._buf = np.empty(256, np.uint8)
        self._done = None

    def encode_bit(self, ctx: BinaryContext, bit: int) -> None:
        probs, counts = ctx._arrays()
        self._buf = _enc_ctx(self._st, self._buf, probs, counts, 0, int(bit))
        ctx._store(probs, counts)

    def finish(self) -> bytes:
        if self._done is None:
            self._done = _with_terminator(_enc_finish(self._st, self._buf))
        return self._done


class RangeDecoder:
    def __init__(self, data: bytes):
        self._data = _payload_array(data, "bit stream")
        self._ds = _new_decoder(self._data)

    def decode_bit(self, ctx: BinaryContext) -> int:
        probs, counts = ctx._arrays()
        bit = _dec_ctx(self._ds, self._data, probs, counts, 0)
        ctx._store(probs, counts)
        if self._ds[_ERR]:
            raise TruncationError("decoder ran past the end of the payload")
        return int(bit)


def range_encode_bit(state: RangeEncoder, context: BinaryContext, bit: int) -> None:
    state.encode_bit(context, bit)


def range_decode_bit(state: RangeDecoder, context: BinaryContext) -> int:
    return state.decode_bit(context)


# ---------------------------------------------------------------------------
# coefficient coding


@njit
def _med(a, b, c):
    if c >= max(a, b):
        return min(a, b)
    if c <= min(a, b):
        return max(a, b)
    return a + b - c


@njit
def _ll_prediction(vals, off, w, y, x):
    if y == 0 and x == 0:
        return 0
    if y == 0:
        return vals[off + x - 1]
    if x == 0:
        return vals[off + (y - 1) * w]
    a = vals[off + y * w + x - 1]
    b = vals[off + (y - 1) * w + x]
    c = vals[off + (y - 1) * w + x - 1]
    return _med(a, b, c)


@njit
def _contexts(sym, vals, off, h, w, y, x, par_off, par_h, par_w):
    """(significance ctx, sign ctx, first-magnitude ctx) for sample (y, x)."""
    i = off + y * w + x
    left = sym[i - 1] if x > 0 else 0
    top = sym[i - w] if y > 0 else 0
    tl = sym[i - w - 1] if (x > 0 and y > 0) else 0
    tr = sym[i - w + 1] if (y > 0 and x + 1 < w) else 0
    # count explicitly: numpy bool scalars would OR under "+" on the fallback path
    nz = 0
    for nb in (left, top, tl, tr):
        if nb != 0:
            nz += 1
    ncls = nz if nz < 2 else 2
    if par_off < 0:
        pcls = 0
    else:
        py = y >> 1
        px = x >> 1
        if py >= par_h:
            py = par_h - 1
        if px >= par_w:
            px = par_w - 1
        pcls = 2 if vals[par_off + py * par_w + px] != 0 else 1
    sig = ncls * 3 + pcls
    s = (1 if left > 0 else (-1 if left < 0 else 0)) + (1 if top > 0 else (-1 if top < 0 else 0))
    sgn = 0 if s < 0 else (1 if s == 0 else 2)
    mag0 = 1 if abs(left) + abs(top) > 2 else 0
    return sig, sgn, mag0


@njit
def _encode_bands_kernel(vals, offs, hs, ws, isll, parents, ctxsets, known, nsets):
    st = _new_encoder()
    buf = np.empty(vals.shape[0] // 2 + 64, np.uint8)
    probs, counts = _new_contexts(nsets * CTX_PER_SET)
    sym = np.zeros(vals.shape[0], np.int64)
    for b in range(offs.shape[0]):
        if known[b]:
            continue
        off = offs[b]
        h = hs[b]
        w = ws[b]
        base = ctxsets[b] * CTX_PER_SET
        pb = parents[b]
        par_off = offs[pb] if pb >= 0 else -1
        par_h = hs[pb] if pb >= 0 else 0
        par_w = ws[pb] if pb >= 0 else 0
        for y in range(h):
            for x in range(w):
                i = off + y * w + x
                v = vals[i]
                if isll[b]:
                    v = v - _ll_prediction(vals, off, w, y, x)
                sym[i] = v
                sig, sgn, mag0 = _contexts(sym, vals, off, h, w, y, x, par_off, par_h, par_w)
                buf = _enc_ctx(st, buf, probs, counts, base + SIG_BASE + sig, 1 if v != 0 else 0)
                if v == 0:
                    continue
                buf = _enc_ctx(st, buf, probs, counts, base + SIGN_BASE + sgn, 1 if v < 0 else 0)
                m = abs(v) - 1
                for k in range(UNARY_BINS):
                    c = base + MAG_BASE + (mag0 if k == 0 else k + 1)
                    more = 1 if m > k else 0
                    buf = _enc_ctx(st, buf, probs, counts, c, more)
                    if not more:
                        break
                if m >= UNARY_BINS:
                    buf = _enc_eg0(st, buf, m - UNARY_BINS)
    return _enc_finish(st, buf)


@njit
def _decode_bands_kernel(data, vals, offs, hs, ws, isll, parents, ctxsets, known, nsets):
    """Decode into ``vals`` (bands flagged ``known`` must be pre-filled)."""
    ds = _new_decoder(data)
    probs, counts = _new_contexts(nsets * CTX_PER_SET)
    sym = np.zeros(vals.shape[0], np.int64)
    for b in range(offs.shape[0]):
        if known[b]:
            continue
        off = offs[b]
        h = hs[b]
        w = ws[b]
        base = ctxsets[b] * CTX_PER_SET
        pb = parents[b]
        par_off = offs[pb] if pb >= 0 else -1
        par_h = hs[pb] if pb >= 0 else 0
        par_w = ws[pb] if pb >= 0 else 0
        for y in range(h):
            for x in range(w):
                if ds[_ERR]:
                    return 1
                i = off + y * w + x
                sig, sgn, mag0 = _contexts(sym, vals, off, h, w, y, x, par_off, par_h, par_w)
                v = 0
                if _dec_ctx(ds, data, probs, counts, base + SIG_BASE + sig):
                    neg = _dec_ctx(ds, data, probs, counts, base + SIGN_BASE + sgn)
                    m = 0
                    for k in range(UNARY_BINS):
                        c = base + MAG_BASE + (mag0 if k == 0 else k + 1)
                        if _dec_ctx(ds, data, probs, counts, c):
                            m += 1
                        else:
                            break
                    if m == UNARY_BINS:
                        m += _dec_eg0(ds, data)
                    v = -(m + 1) if neg else m + 1
                sym[i] = v
                if isll[b]:
                    v = v + _ll_prediction(vals, off, w, y, x)
                vals[i] = v
    return ds[_ERR]


@dataclass
class BandLayout:
    """Coding order and context wiring for bands sharing one coder.

    Bands added with ``known=True`` are side information: both ends hold
    them already, they steer contexts but are never transmitted.
    """

    shapes: list = field(default_factory=list)
    is_ll: list = field(default_factory=list)
    parents: list = field(default_factory=list)  # index of parent band or -1
    ctxsets: list = field(default_factory=list)
    known: list = field(default_factory=list)

    def add(self, shape, is_ll=False, parent=-1, ctxset=0, known=False) -> int:
        if parent >= len(self.shapes):
            raise ValueError("a parent band must precede its children")
        self.shapes.append(tuple(int(s) for s in shape))
        self.is_ll.append(bool(is_ll))
        self.parents.append(int(parent))
        self.ctxsets.append(int(ctxset))
        self.known.append(bool(known))
        return len(self.shapes) - 1

    def arrays(self):
        sizes = np.array([h * w for h, w in self.shapes], np.int64)
        offs = np.zeros(len(sizes), np.int64)
        if len(sizes):
            offs[1:] = np.cumsum(sizes)[:-1]
        return (
            offs,
            np.array([s[0] for s in self.shapes], np.int64),
            np.array([s[1] for s in self.shapes], np.int64),
            np.array(self.is_ll, np.bool_),
            np.array(self.parents, np.int64),
            np.array(self.ctxsets, np.int64),
            np.array(self.known, np.bool_),
            int(sizes.sum()),
            max(self.ctxsets, default=0) + 1,
        )


def _flatten(bands, layout):
    if len(bands) != len(layout.shapes):
        raise ValueError("band count does not match layout")
    parts = []
    for b, s in zip(bands, layout.shapes):
        if b is None:
            parts.append(np.zeros(s[0] * s[1], np.int64))
            continue
        if tuple(np.shape(b)) != s:
            raise ValueError(f"band shape {np.shape(b)} does not match layout {s}")
        parts.append(np.asarray(b, dtype=np.int64).ravel())
    return np.concatenate(parts) if parts else np.zeros(0, np.int64)


def encode_bands(bands, layout: BandLayout) -> bytes:
    """Code integer bands (in layout order) into one self-contained payload."""
    offs, hs, ws, isll, par, cs, known, _, nsets = layout.arrays()
    flat = _flatten(bands, layout)
    return _with_terminator(_encode_bands_kernel(flat, offs, hs, ws, isll, par, cs, known, nsets))


def decode_bands(data: bytes, layout: BandLayout, known_bands=None, what: str = "subband payload") -> list:
    """Inverse of :func:`encode_bands`; ``known_bands`` supplies side-information bands."""
    arr = _payload_array(data, what)
    offs, hs, ws, isll, par, cs, known, total, nsets = layout.arrays()
    if known_bands is None:
        known_bands = [None] * len(layout.shapes)
    flat = _flatten(known_bands, layout)
    err = _decode_bands_kernel(arr, flat, offs, hs, ws, isll, par, cs, known, nsets)
    if err:
        raise CorruptionError(f"{what}: coefficient data inconsistent with band dimensions")
    return [flat[o : o + h * w].reshape(h, w) for o, h, w in zip(offs, hs, ws)]


@dataclass(frozen=True)
class ContextLayout:
    """Context wiring of a single band coded on its own.

    ``parent`` is the already-known coarser band of the same orientation.
    """

    orientation: str = "HL"
    parent: np.ndarray | None = None


def _single_layout(layout: ContextLayout, dims):
    bl = BandLayout()
    parent = -1
    if layout.parent is not None:
        parent = bl.add(np.shape(layout.parent), known=True)
    bl.add(dims, is_ll=layout.orientation == "LL", parent=parent, ctxset=ORIENT_IDS[layout.orientation])
    return bl


def code_subband(indices, layout: ContextLayout = ContextLayout()) -> bytes:
    indices = np.asarray(indices, dtype=np.int64)
    bl = _single_layout(layout, indices.shape)
    bands = [indices] if layout.parent is None else [layout.parent, indices]
    return encode_bands(bands, bl)


def decode_subband(bits: bytes, layout: ContextLayout, dims) -> np.ndarray:
    bl = _single_layout(layout, tuple(dims))
    known = [None] if layout.parent is None else [layout.parent, None]
    return decode_bands(bits, bl, known)[-1]


# ---------------------------------------------------------------------------
# motion vectors: median prediction, residual = zero flag, sign, exp-Golomb
# magnitude with context-coded prefix

MV_PREFIX_CTX = 8
MV_CTX_PER_COMP = 2 + 1 + MV_PREFIX_CTX


@njit
def _enc_mv_comp(st, buf, probs, counts, comp, r, prev_zero):
    base = comp * MV_CTX_PER_COMP
    buf = _enc_ctx(st, buf, probs, counts, base + (0 if prev_zero else 1), 1 if r != 0 else 0)
    if r == 0:
        return buf
    buf = _enc_ctx(st, buf, probs, counts, base + 2, 1 if r < 0 else 0)
    v = abs(r)  # exp-Golomb of |r| - 1, i.e. value v in 1..
    nbits = 0
    t = v
    while t > 1:
        t >>= 1
        nbits += 1
    for i in range(nbits):
        buf = _enc_ctx(st, buf, probs, counts, base + 3 + min(i, MV_PREFIX_CTX - 1), 0)
    buf = _enc_ctx(st, buf, probs, counts, base + 3 + min(nbits, MV_PREFIX_CTX - 1), 1)
    for i in range(nbits - 1, -1, -1):
        buf = _enc_bypass(st, buf, (v >> i) & 1)
    return buf


@njit
def _dec_mv_comp(ds, data, probs, counts, comp, prev_zero):
    base = comp * MV_CTX_PER_COMP
    if not _dec_ctx(ds, data, probs, counts, base + (0 if prev_zero else 1)):
        return 0
    neg = _dec_ctx(ds, data, probs, counts, base + 2)
    nbits = 0
    while _dec_ctx(ds, data, probs, counts, base + 3 + min(nbits, MV_PREFIX_CTX - 1)) == 0:
        nbits += 1
        if nbits > 30 or ds[_ERR]:
            ds[_ERR] = 1
            return 0
    v = 1
    for _ in range(nbits):
        v = (v << 1) | _dec_bypass(ds, data)
    return -v if neg else v


@njit
def _encode_mv_kernel(vec):
    st = _new_encoder()
    buf = np.empty(64 + vec.shape[0] * vec.shape[1], np.uint8)
    probs, counts = _new_contexts(2 * MV_CTX_PER_COMP)
    zx = True
    zy = True
    for by in range(vec.shape[0]):
        for bx in range(vec.shape[1]):
            px, py = median_predictor(vec, by, bx)
            rx = vec[by, bx, 0] - px
            ry = vec[by, bx, 1] - py
            buf = _enc_mv_comp(st, buf, probs, counts, 0, rx, zx)
            buf = _enc_mv_comp(st, buf, probs, counts, 1, ry, zy)
            zx = rx == 0
            zy = ry == 0
    return _enc_finish(st, buf)


@njit
def _decode_mv_kernel(data, gh, gw):
    ds = _new_decoder(data)
    probs, counts = _new_contexts(2 * MV_CTX_PER_COMP)
    vec = np.zeros((gh, gw, 2), np.int64)
    zx = True
    zy = True
    for by in range(gh):
        for bx in range(gw):
            if ds[_ERR]:
                return vec, 1
            px, py = median_predictor(vec, by, bx)
            rx = _dec_mv_comp(ds, data, probs, counts, 0, zx)
            ry = _dec_mv_comp(ds, data, probs, counts, 1, zy)
            vec[by, bx, 0] = px + rx
            vec[by, bx, 1] = py + ry
            zx = rx == 0
            zy = ry == 0
    return vec, ds[_ERR]


def code_motion_field(fld: MotionField) -> bytes:
    return _with_terminator(_encode_mv_kernel(fld.vectors.astype(np.int64)))


def decode_motion_field(bits: bytes, grid, block_size: int, shape) -> MotionField:
    arr = _payload_array(bits, "motion payload")
    gh, gw = grid
    vec, err = _decode_mv_kernel(arr, int(gh), int(gw))
    if err:
        raise CorruptionError("motion payload: truncated or corrupt vector data")
    if np.abs(vec).max(initial=0) > np.iinfo(np.int32).max:
        raise CorruptionError("motion payload: vector out of range")
    return MotionField(block_size, vec.astype(np.int32), shape)
