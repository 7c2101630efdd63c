"""Block motion estimation and (inverse) motion compensation.

Vectors are stored in half-pel units, ``(dx, dy)`` per block, and point from
the current picture into the reference: the prediction of pixel ``(y, x)``
is the reference sampled at ``(y + dy/2, x + dx/2)``. Reads outside the
picture clamp to the nearest edge sample.

Hot loops exist twice: numba kernels (``*_nb``) and numpy versions
(``*_np``). The public functions dispatch on ``lwvc._accel.USE_NUMBA``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, njit
from .errors import ArgumentError, ConfigError

DEFAULT_BLOCK = 8
DEFAULT_RANGE = 32
# Ranges up to this are searched exhaustively at integer pel; larger ranges
# go through a half-resolution pass first.
FULL_SEARCH_MAX = 8


@dataclass(frozen=True)
class MotionField:
    block_size: int
    vectors: np.ndarray  # (grid_h, grid_w, 2) int32: [..., 0] = dx, [..., 1] = dy
    shape: tuple  # (height, width) of the pictures it applies to

    def __post_init__(self):
        v = np.ascontiguousarray(self.vectors, dtype=np.int32)
        gh, gw = grid_shape(self.shape, self.block_size)
        if v.shape != (gh, gw, 2):
            raise ArgumentError(f"vector grid {v.shape[:2]} does not match {gh}x{gw} blocks")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    @classmethod
    def zeros(cls, shape, block_size=DEFAULT_BLOCK) -> "MotionField":
        gh, gw = grid_shape(shape, block_size)
        return cls(block_size, np.zeros((gh, gw, 2), np.int32), shape)

    @classmethod
    def uniform(cls, shape, dx, dy, block_size=DEFAULT_BLOCK) -> "MotionField":
        gh, gw = grid_shape(shape, block_size)
        v = np.empty((gh, gw, 2), np.int32)
        v[..., 0] = dx
        v[..., 1] = dy
        return cls(block_size, v, shape)

    @property
    def grid(self) -> tuple:
        return self.vectors.shape[:2]

    def for_chroma(self, chroma_shape) -> "MotionField":
        """Half-resolution field for 4:2:0 chroma (vectors halved, half away from zero)."""
        if self.block_size % 2:
            raise ConfigError("block size must be even to derive chroma motion")
        v = self.vectors.astype(np.int64)
        vc = np.sign(v) * ((np.abs(v) + 1) // 2)
        return MotionField(self.block_size // 2, vc.astype(np.int32), chroma_shape)

    def __eq__(self, other):
        if not isinstance(other, MotionField):
            return NotImplemented
        return (
            self.block_size == other.block_size
            and self.shape == other.shape
            and np.array_equal(self.vectors, other.vectors)
        )

    __hash__ = None


def grid_shape(shape, block_size) -> tuple:
    h, w = shape
    return -(-h // block_size), -(-w // block_size)


@dataclass(frozen=True)
class CoverageMap:
    """Per-pixel sum of scatter weights (1.0 = one full contribution)."""

    weights: np.ndarray

    @property
    def connected(self) -> np.ndarray:
        return self.weights > 0


# ---------------------------------------------------------------------------
# MV rate model shared with the entropy coder


@njit
def mv_component_bits(r):
    """Bits of a signed residual: zero flag, sign, order-0 exp-Golomb of |r|-1."""
    if r == 0:
        return 1
    a = abs(r)
    n = 0
    while a > 1:
        a >>= 1
        n += 1
    return 3 + 2 * n


@njit
def _median3(a, b, c):
    return max(min(a, b), min(max(a, b), c))


@njit
def median_predictor(vec, by, bx):
    """Median of left, top and top-right (top-left at the right edge) neighbors."""
    gw = vec.shape[1]
    has_a = bx > 0
    has_b = by > 0
    if not has_b:
        if has_a:
            return vec[by, bx - 1, 0], vec[by, bx - 1, 1]
        return 0, 0
    ax = vec[by, bx - 1, 0] if has_a else 0
    ay = vec[by, bx - 1, 1] if has_a else 0
    bxv = vec[by - 1, bx, 0]
    byv = vec[by - 1, bx, 1]
    if bx + 1 < gw:
        cx = vec[by - 1, bx + 1, 0]
        cy = vec[by - 1, bx + 1, 1]
    elif has_a:
        cx = vec[by - 1, bx - 1, 0]
        cy = vec[by - 1, bx - 1, 1]
    else:
        cx = 0
        cy = 0
    return _median3(ax, bxv, cx), _median3(ay, byv, cy)


# ---------------------------------------------------------------------------
# Motion compensation (gather)


@njit
def _clampi(v, hi):
    if v < 0:
        return 0
    if v > hi:
        return hi
    return v


@njit
def _mc_int_nb(ref, vec, bs):
    h, w = ref.shape
    out = np.empty((h, w), np.int64)
    for y in range(h):
        by = y // bs
        for x in range(w):
            bx = x // bs
            py = 2 * y + vec[by, bx, 1]
            px = 2 * x + vec[by, bx, 0]
            y0 = py >> 1
            x0 = px >> 1
            fy = py & 1
            fx = px & 1
            ya = _clampi(y0, h - 1)
            yb = _clampi(y0 + fy, h - 1)
            xa = _clampi(x0, w - 1)
            xb = _clampi(x0 + fx, w - 1)
            s = (
                (2 - fy) * ((2 - fx) * ref[ya, xa] + fx * ref[ya, xb])
                + fy * ((2 - fx) * ref[yb, xa] + fx * ref[yb, xb])
            )
            out[y, x] = (s + 2) >> 2
    return out


@njit
def _mc_float_nb(ref, vec, bs):
    h, w = ref.shape
    out = np.empty((h, w), np.float64)
    for y in range(h):
        by = y // bs
        for x in range(w):
            bx = x // bs
            py = 2 * y + vec[by, bx, 1]
            px = 2 * x + vec[by, bx, 0]
            y0 = py >> 1
            x0 = px >> 1
            fy = py & 1
            fx = px & 1
            ya = _clampi(y0, h - 1)
            yb = _clampi(y0 + fy, h - 1)
            xa = _clampi(x0, w - 1)
            xb = _clampi(x0 + fx, w - 1)
            s = (
                (2 - fy) * ((2 - fx) * ref[ya, xa] + fx * ref[ya, xb])
                + fy * ((2 - fx) * ref[yb, xa] + fx * ref[yb, xb])
            )
            out[y, x] = s * 0.25
    return out


def _pixel_vectors(vec, bs, h, w):
    vy = np.repeat(np.repeat(vec[..., 1], bs, axis=0), bs, axis=1)[:h, :w].astype(np.int64)
    vx = np.repeat(np.repeat(vec[..., 0], bs, axis=0), bs, axis=1)[:h, :w].astype(np.int64)
    return vx, vy


def _taps(vec, bs, h, w):
    vx, vy = _pixel_vectors(vec, bs, h, w)
    yy, xx = np.mgrid[0:h, 0:w]
    py = 2 * yy + vy
    px = 2 * xx + vx
    y0, x0 = py >> 1, px >> 1
    fy, fx = py & 1, px & 1
    ya, yb = np.clip(y0, 0, h - 1), np.clip(y0 + fy, 0, h - 1)
    xa, xb = np.clip(x0, 0, w - 1), np.clip(x0 + fx, 0, w - 1)
    return ya, yb, xa, xb, fy, fx


def _mc_weighted_sum_np(ref, vec, bs):
    h, w = ref.shape
    ya, yb, xa, xb, fy, fx = _taps(vec, bs, h, w)
    return (2 - fy) * ((2 - fx) * ref[ya, xa] + fx * ref[ya, xb]) + fy * (
        (2 - fx) * ref[yb, xa] + fx * ref[yb, xb]
    )


def _mc_int_np(ref, vec, bs):
    return (_mc_weighted_sum_np(ref, vec, bs) + 2) >> 2


def _mc_float_np(ref, vec, bs):
    return _mc_weighted_sum_np(ref, vec, bs) * 0.25


def motion_compensate(reference: np.ndarray, field: MotionField) -> np.ndarray:
    """Gather prediction. Integer planes give rounded integers, float planes exact bilinear."""
    ref = np.asarray(reference)
    _check_field(ref.shape, field)
    vec = field.vectors.astype(np.int64)
    if np.issubdtype(ref.dtype, np.integer):
        fn = _mc_int_nb if USE_NUMBA else _mc_int_np
        return fn(np.ascontiguousarray(ref, dtype=np.int64), vec, field.block_size)
    fn = _mc_float_nb if USE_NUMBA else _mc_float_np
    return fn(np.ascontiguousarray(ref, dtype=np.float64), vec, field.block_size)


def _check_field(shape, field):
    if tuple(shape) != tuple(field.shape):
        raise ArgumentError(f"motion field built for {field.shape}, plane is {tuple(shape)}")


# ---------------------------------------------------------------------------
# Inverse motion compensation (scatter)


@njit
def _scatter_nb(hp, vec, bs):
    """Weighted scatter in quarter units: returns (sum of 4*w*h, sum of 4*w)."""
    h, w = hp.shape
    num = np.zeros((h, w), np.int64)
    den = np.zeros((h, w), np.int64)
    for y in range(h):
        by = y // bs
        for x in range(w):
            bx = x // bs
            py = 2 * y + vec[by, bx, 1]
            px = 2 * x + vec[by, bx, 0]
            y0 = py >> 1
            x0 = px >> 1
            fy = py & 1
            fx = px & 1
            v = hp[y, x]
            for ty in range(1 + fy):
                wy = 2 - fy if ty == 0 else fy
                yy = _clampi(y0 + ty, h - 1)
                for tx in range(1 + fx):
                    wx = 2 - fx if tx == 0 else fx
                    xx = _clampi(x0 + tx, w - 1)
                    wgt = wy * wx
                    num[yy, xx] += wgt * v
                    den[yy, xx] += wgt
    return num, den


def _scatter_np(hp, vec, bs):
    h, w = hp.shape
    ya, yb, xa, xb, fy, fx = _taps(vec, bs, h, w)
    num = np.zeros(h * w, np.int64)
    den = np.zeros(h * w, np.int64)
    v = hp.astype(np.int64).ravel()
    for yi, wy in ((ya, 2 - fy), (yb, fy)):
        for xi, wx in ((xa, 2 - fx), (xb, fx)):
            wgt = (wy * wx).ravel()
            tgt = (yi * w + xi).ravel()
            np.add.at(num, tgt, wgt * v)
            np.add.at(den, tgt, wgt)
    return num.reshape(h, w), den.reshape(h, w)


def scatter_sums(highpass: np.ndarray, field: MotionField):
    """Integer scatter accumulators (numerator, weight) in quarter-sample units."""
    hp = np.asarray(highpass)
    _check_field(hp.shape, field)
    if not np.issubdtype(hp.dtype, np.integer):
        raise ArgumentError("scatter_sums needs an integer plane")
    fn = _scatter_nb if USE_NUMBA else _scatter_np
    return fn(np.ascontiguousarray(hp, dtype=np.int64), field.vectors.astype(np.int64), field.block_size)


def inverse_motion_compensate(highpass: np.ndarray, field: MotionField):
    """Scatter ``highpass`` along the field; returns (normalized update, CoverageMap).

    Pixels nobody points at get coverage 0 and an update of 0.
    """
    hp = np.asarray(highpass)
    _check_field(hp.shape, field)
    if np.issubdtype(hp.dtype, np.integer):
        num, den = scatter_sums(hp, field)
        num = num.astype(np.float64)
    else:
        # float path: scatter integer weights, accumulate values separately
        ones = np.ones(hp.shape, np.int64)
        _, den = scatter_sums(ones, field)
        num = _scatter_float(hp.astype(np.float64), field)
    cover = den / 4.0
    update = np.zeros(hp.shape, np.float64)
    np.divide(num, den, out=update, where=den > 0)
    return update, CoverageMap(cover)


def _scatter_float(hp, field):
    h, w = hp.shape
    ya, yb, xa, xb, fy, fx = _taps(field.vectors.astype(np.int64), field.block_size, h, w)
    num = np.zeros(h * w, np.float64)
    for yi, wy in ((ya, 2 - fy), (yb, fy)):
        for xi, wx in ((xa, 2 - fx), (xb, fx)):
            np.add.at(num, (yi * w + xi).ravel(), ((wy * wx) * hp).ravel())
    return num.reshape(h, w)


# ---------------------------------------------------------------------------
# Motion estimation


@njit
def _block_sad_int(cur, ref, y0, x0, bh, bw, iy, ix):
    h, w = ref.shape
    s = 0
    for y in range(y0, y0 + bh):
        ry = _clampi(y + iy, h - 1)
        for x in range(x0, x0 + bw):
            rx = _clampi(x + ix, w - 1)
            d = cur[y, x] - ref[ry, rx]
            s += d if d >= 0 else -d
    return s


@njit
def _block_sad_half(cur, ref, y0, x0, bh, bw, vy, vx):
    h, w = ref.shape
    s = 0
    for y in range(y0, y0 + bh):
        py = 2 * y + vy
        ya = _clampi(py >> 1, h - 1)
        fy = py & 1
        yb = _clampi((py >> 1) + fy, h - 1)
        for x in range(x0, x0 + bw):
            px = 2 * x + vx
            fx = px & 1
            xa = _clampi(px >> 1, w - 1)
            xb = _clampi((px >> 1) + fx, w - 1)
            p = (
                (2 - fy) * ((2 - fx) * ref[ya, xa] + fx * ref[ya, xb])
                + fy * ((2 - fx) * ref[yb, xa] + fx * ref[yb, xb])
                + 2
            ) >> 2
            d = cur[y, x] - p
            s += d if d >= 0 else -d
    return s


@njit
def _better(cost, vx, vy, best_cost, bvx, bvy):
    if cost < best_cost:
        return True
    if cost > best_cost:
        return False
    a = abs(vx) + abs(vy)
    b = abs(bvx) + abs(bvy)
    if a != b:
        return a < b
    if vy != bvy:
        return vy < bvy
    return vx < bvx


@njit
def _coarse_search_nb(cur, ref, bs, rng):
    h, w = cur.shape
    gh = (h + bs - 1) // bs
    gw = (w + bs - 1) // bs
    out = np.zeros((gh, gw, 2), np.int64)
    for by in range(gh):
        y0 = by * bs
        bh = min(bs, h - y0)
        for bx in range(gw):
            x0 = bx * bs
            bw = min(bs, w - x0)
            best = np.inf
            bix = 0
            biy = 0
            for iy in range(-rng, rng + 1):
                for ix in range(-rng, rng + 1):
                    c = float(_block_sad_int(cur, ref, y0, x0, bh, bw, iy, ix))
                    if _better(c, ix, iy, best, bix, biy):
                        best = c
                        bix = ix
                        biy = iy
            out[by, bx, 0] = bix
            out[by, bx, 1] = biy
    return out


@njit
def _refine_nb(cur, ref, bs, rng, lam, coarse, full):
    """Raster-order integer then half-pel search with the MV rate term."""
    h, w = cur.shape
    gh = (h + bs - 1) // bs
    gw = (w + bs - 1) // bs
    vec = np.zeros((gh, gw, 2), np.int64)
    cand = np.empty(2 * ((2 * rng + 1) * (2 * rng + 1) + 11), np.int64)
    for by in range(gh):
        y0 = by * bs
        bh = min(bs, h - y0)
        for bx in range(gw):
            x0 = bx * bs
            bw = min(bs, w - x0)
            pdx, pdy = median_predictor(vec, by, bx)
            # integer candidates, packed as (ix, iy) pairs
            n = 0
            if full:
                for iy in range(-rng, rng + 1):
                    for ix in range(-rng, rng + 1):
                        cand[n] = ix
                        cand[n + 1] = iy
                        n += 2
            else:
                cx = 2 * coarse[by, bx, 0]
                cy = 2 * coarse[by, bx, 1]
                for oy in range(-1, 2):
                    for ox in range(-1, 2):
                        cand[n] = min(max(cx + ox, -rng), rng)
                        cand[n + 1] = min(max(cy + oy, -rng), rng)
                        n += 2
                cand[n] = 0
                cand[n + 1] = 0
                n += 2
                # predictor rounded toward zero to integer pel
                px = pdx // 2 if pdx >= 0 else -((-pdx) // 2)
                py = pdy // 2 if pdy >= 0 else -((-pdy) // 2)
                cand[n] = min(max(px, -rng), rng)
                cand[n + 1] = min(max(py, -rng), rng)
                n += 2
            best = np.inf
            bvx = 0
            bvy = 0
            for k in range(0, n, 2):
                ix = cand[k]
                iy = cand[k + 1]
                vx = 2 * ix
                vy = 2 * iy
                bits = mv_component_bits(vx - pdx) + mv_component_bits(vy - pdy)
                c = _block_sad_int(cur, ref, y0, x0, bh, bw, iy, ix) + lam * bits
                if _better(c, vx, vy, best, bvx, bvy):
                    best = c
                    bvx = vx
                    bvy = vy
            # half-pel refinement around the integer winner
            cx = bvx
            cy = bvy
            for oy in range(-1, 2):
                for ox in range(-1, 2):
                    if ox == 0 and oy == 0:
                        continue
                    vx = cx + ox
                    vy = cy + oy
                    if abs(vx) > 2 * rng or abs(vy) > 2 * rng:
                        continue
                    bits = mv_component_bits(vx - pdx) + mv_component_bits(vy - pdy)
                    c = _block_sad_half(cur, ref, y0, x0, bh, bw, vy, vx) + lam * bits
                    if _better(c, vx, vy, best, bvx, bvy):
                        best = c
                        bvx = vx
                        bvy = vy
            vec[by, bx, 0] = bvx
            vec[by, bx, 1] = bvy
    return vec


# numpy versions: same candidate sets and ordering, costs vectorized per block


def _gather_blocks_int(ref, y0, x0, bh, bw, iys, ixs):
    h, w = ref.shape
    rows = np.clip(y0 + np.arange(bh)[None, :] + iys[:, None], 0, h - 1)
    cols = np.clip(x0 + np.arange(bw)[None, :] + ixs[:, None], 0, w - 1)
    return ref[rows[:, :, None], cols[:, None, :]]


def _gather_blocks_half(ref, y0, x0, bh, bw, vys, vxs):
    h, w = ref.shape
    py = 2 * (y0 + np.arange(bh))[None, :] + vys[:, None]
    px = 2 * (x0 + np.arange(bw))[None, :] + vxs[:, None]
    fy, fx = py & 1, px & 1
    ya, yb = np.clip(py >> 1, 0, h - 1), np.clip((py >> 1) + fy, 0, h - 1)
    xa, xb = np.clip(px >> 1, 0, w - 1), np.clip((px >> 1) + fx, 0, w - 1)
    fy3, fx3 = fy[:, :, None], fx[:, None, :]
    s = (2 - fy3) * ((2 - fx3) * ref[ya[:, :, None], xa[:, None, :]] + fx3 * ref[ya[:, :, None], xb[:, None, :]]) + fy3 * (
        (2 - fx3) * ref[yb[:, :, None], xa[:, None, :]] + fx3 * ref[yb[:, :, None], xb[:, None, :]]
    )
    return (s + 2) >> 2


def _mv_bits_np(r):
    a = np.abs(np.asarray(r, dtype=np.int64))
    # frexp exponent is exact for integers below 2**53: floor(log2(a)) = e - 1
    e = np.frexp(np.maximum(a, 1).astype(np.float64))[1] - 1
    return np.where(a > 0, 3 + 2 * e, 1)


def _pick(costs, vxs, vys):
    order = np.lexsort((vxs, vys, np.abs(vxs) + np.abs(vys), costs))
    k = order[0]
    return costs[k], vxs[k], vys[k]


def _coarse_search_np(cur, ref, bs, rng):
    h, w = cur.shape
    gh, gw = -(-h // bs), -(-w // bs)
    out = np.zeros((gh, gw, 2), np.int64)
    iy, ix = np.mgrid[-rng : rng + 1, -rng : rng + 1]
    iys, ixs = iy.ravel(), ix.ravel()
    for by in range(gh):
        y0 = by * bs
        bh = min(bs, h - y0)
        for bx in range(gw):
            x0 = bx * bs
            bw = min(bs, w - x0)
            blocks = _gather_blocks_int(ref, y0, x0, bh, bw, iys, ixs)
            sad = np.abs(cur[y0 : y0 + bh, x0 : x0 + bw][None] - blocks).sum(axis=(1, 2))
            _, bix, biy = _pick(sad.astype(np.float64), ixs, iys)
            out[by, bx] = bix, biy
    return out


def _refine_np(cur, ref, bs, rng, lam, coarse, full):
    h, w = cur.shape
    gh, gw = -(-h // bs), -(-w // bs)
    vec = np.zeros((gh, gw, 2), np.int64)
    if full:
        iy, ix = np.mgrid[-rng : rng + 1, -rng : rng + 1]
        full_iys, full_ixs = iy.ravel(), ix.ravel()
    offs = np.array([(ox, oy) for oy in (-1, 0, 1) for ox in (-1, 0, 1)], np.int64)
    half = offs[np.any(offs != 0, axis=1)]
    for by in range(gh):
        y0 = by * bs
        bh = min(bs, h - y0)
        for bx in range(gw):
            x0 = bx * bs
            bw = min(bs, w - x0)
            pdx, pdy = median_predictor(vec, by, bx)
            pdx, pdy = int(pdx), int(pdy)
            if full:
                ixs, iys = full_ixs, full_iys
            else:
                cx, cy = 2 * coarse[by, bx, 0], 2 * coarse[by, bx, 1]
                px = pdx // 2 if pdx >= 0 else -((-pdx) // 2)
                py = pdy // 2 if pdy >= 0 else -((-pdy) // 2)
                ixs = np.clip(np.concatenate([cx + offs[:, 0], [0, px]]), -rng, rng)
                iys = np.clip(np.concatenate([cy + offs[:, 1], [0, py]]), -rng, rng)
            blk = cur[y0 : y0 + bh, x0 : x0 + bw][None]
            sad = np.abs(blk - _gather_blocks_int(ref, y0, x0, bh, bw, iys, ixs)).sum(axis=(1, 2))
            vxs, vys = 2 * ixs, 2 * iys
            costs = sad + lam * (_mv_bits_np(vxs - pdx) + _mv_bits_np(vys - pdy))
            best, bvx, bvy = _pick(costs, vxs, vys)
            hx = bvx + half[:, 0]
            hy = bvy + half[:, 1]
            ok = (np.abs(hx) <= 2 * rng) & (np.abs(hy) <= 2 * rng)
            hx, hy = hx[ok], hy[ok]
            if hx.size:
                sad = np.abs(blk - _gather_blocks_half(ref, y0, x0, bh, bw, hy, hx)).sum(axis=(1, 2))
                hc = sad + lam * (_mv_bits_np(hx - pdx) + _mv_bits_np(hy - pdy))
                best, bvx, bvy = _pick(
                    np.concatenate([[best], hc]), np.concatenate([[bvx], hx]), np.concatenate([[bvy], hy])
                )
            vec[by, bx] = bvx, bvy
    return vec


def downsample2(plane: np.ndarray) -> np.ndarray:
    """2x2 mean with edge replication for odd sizes, rounded."""
    p = np.asarray(plane, dtype=np.int64)
    h, w = p.shape
    if h % 2:
        p = np.vstack([p, p[-1:]])
    if w % 2:
        p = np.hstack([p, p[:, -1:]])
    s = p[0::2, 0::2] + p[1::2, 0::2] + p[0::2, 1::2] + p[1::2, 1::2]
    return (s + 2) >> 2


def estimate_motion(
    reference,
    current,
    search_range: int = DEFAULT_RANGE,
    lambda_mv: float = 0.0,
    block_size: int = DEFAULT_BLOCK,
) -> MotionField:
    """Per-block minimizer of SAD + lambda_mv * (MV residual bits).

    Blocks are visited in raster order because the rate term uses the
    median of already chosen neighbors. Ties go to the smallest
    ``|dx| + |dy|``, then the smallest ``dy``, then ``dx``.
    """
    ref = _luma(reference)
    cur = _luma(current)
    if ref.shape != cur.shape:
        raise ArgumentError(f"reference {ref.shape} and current {cur.shape} differ in size")
    if search_range < 1:
        raise ConfigError("search range must be >= 1")
    if block_size < 2 or block_size % 2:
        raise ConfigError("block size must be an even number >= 2")
    if block_size > min(ref.shape):
        raise ConfigError(f"block size {block_size} exceeds picture size {ref.shape[1]}x{ref.shape[0]}")
    if lambda_mv < 0:
        raise ConfigError("lambda_mv must be non-negative")
    full = search_range <= FULL_SEARCH_MAX
    coarse_fn, refine_fn = (_coarse_search_nb, _refine_nb) if USE_NUMBA else (_coarse_search_np, _refine_np)
    if full:
        coarse = np.zeros((1, 1, 2), np.int64)
    else:
        coarse = coarse_fn(downsample2(cur), downsample2(ref), block_size // 2, -(-search_range // 2))
    vec = refine_fn(cur, ref, block_size, int(search_range), float(lambda_mv), coarse, full)
    return MotionField(block_size, vec.astype(np.int32), ref.shape)


def _luma(x) -> np.ndarray:
    plane = x.luma if hasattr(x, "luma") else x
    plane = np.asarray(plane)
    if plane.ndim != 2:
        raise ArgumentError("expected a 2-D plane or a Frame")
    return np.ascontiguousarray(plane, dtype=np.int64)


def residual_sad(reference, current, field: MotionField) -> int:
    """Sum of absolute prediction errors of ``current`` from ``reference``."""
    cur = _luma(current)
    return int(np.abs(cur - motion_compensate(_luma(reference), field)).sum())
