"""Separable 2-D lifting wavelet transforms (LeGall 5/3 and CDF 9/7).

Each level lifts the rows (horizontal split) and then the columns of the
current LL band. Boundaries use whole-sample symmetric extension, so odd
lengths are handled without padding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, ConsistencyError, LevelOverflowError

INT_53 = "integer_5_3"
FLOAT_97 = "float_9_7"
KERNELS = (INT_53, FLOAT_97)
KERNEL_IDS = {INT_53: 0, FLOAT_97: 1}

# CDF 9/7 lifting constants (JPEG 2000 irreversible filter).
ALPHA = -1.586134342059924
BETA = -0.052980118572961
GAMMA = 0.882911075530934
DELTA = 0.443506852043971
K97 = 1.230174104914001

ORIENTATIONS = ("HL", "LH", "HH")


@dataclass
class SubbandImage:
    """Wavelet coefficients of one plane.

    ``details[0]`` is the finest level; each entry holds the HL, LH, HH
    planes of that level. ``ll`` is the coarsest lowpass band.
    """

    ll: np.ndarray
    details: list
    kernel: str
    shape: tuple

    @property
    def levels(self) -> int:
        return len(self.details)

    def bands(self):
        """Yield ``(level, orientation, array)`` in coding order (coarse first)."""
        yield self.levels, "LL", self.ll
        for lev in range(self.levels, 0, -1):
            for name, band in zip(ORIENTATIONS, self.details[lev - 1]):
                yield lev, name, band

    def coefficient_count(self) -> int:
        return sum(b.size for _, _, b in self.bands())

    def map(self, fn) -> "SubbandImage":
        return SubbandImage(
            fn(self.ll),
            [tuple(fn(b) for b in lev) for lev in self.details],
            self.kernel,
            self.shape,
        )


def band_shapes(shape: tuple, levels: int) -> list:
    """Per level ``(ll_shape, hl, lh, hh)`` shapes, finest level first."""
    h, w = shape
    out = []
    for _ in range(levels):
        if h < 2 or w < 2:
            raise LevelOverflowError(f"{levels} levels too deep for a {shape[1]}x{shape[0]} plane")
        lh_, hh_ = (h + 1) // 2, h // 2
        lw, hw = (w + 1) // 2, w // 2
        out.append(((lh_, lw), (lh_, hw), (hh_, lw), (hh_, hw)))
        h, w = lh_, lw
    return out


def max_levels(shape: tuple) -> int:
    h, w = shape
    n = 0
    while h >= 2 and w >= 2:
        h, w = (h + 1) // 2, (w + 1) // 2
        n += 1
    return n


def default_levels(shape: tuple, min_ll: int = 8, cap: int = 4) -> int:
    """Deepest level count (≤ cap) whose LL band stays at least ``min_ll`` on each side."""
    h, w = shape
    n = 0
    while n < cap:
        nh, nw = (h + 1) // 2, (w + 1) // 2
        if nh < min_ll or nw < min_ll:
            break
        h, w, n = nh, nw, n + 1
    return max(n, 1) if min(shape) >= 2 else 0


# ---------------------------------------------------------------------------
# 1-D lifting along axis 0 (columns of a 2-D array are independent signals)


def _neighbors_for_odd(s, nd):
    # s[i+1] for i < nd, mirrored at the right edge
    if s.shape[0] > nd:
        return s[1 : nd + 1]
    return np.concatenate([s[1:], s[-1:]], axis=0)


def _neighbors_for_even(d, ns):
    left = np.concatenate([d[:1], d], axis=0)[:ns]
    right = np.concatenate([d, d[-1:]], axis=0)[:ns]
    return left, right


def _split(x):
    return x[0::2].copy(), x[1::2].copy()


def _merge(s, d):
    n = s.shape[0] + d.shape[0]
    out = np.empty((n,) + s.shape[1:], dtype=np.result_type(s, d))
    out[0::2] = s
    out[1::2] = d
    return out


def _fwd53(x):
    s, d = _split(x.astype(np.int64))
    nd = d.shape[0]
    if nd == 0:
        return s, d
    d -= (s[:nd] + _neighbors_for_odd(s, nd)) // 2
    left, right = _neighbors_for_even(d, s.shape[0])
    s += (left + right + 2) // 4
    return s, d


def _inv53(s, d):
    s = s.astype(np.int64)
    d = d.astype(np.int64)
    nd = d.shape[0]
    if nd == 0:
        return s.copy()
    left, right = _neighbors_for_even(d, s.shape[0])
    s = s - (left + right + 2) // 4
    d = d + (s[:nd] + _neighbors_for_odd(s, nd)) // 2
    return _merge(s, d)


def _fwd_linear(x, steps, lo_gain, hi_gain):
    s, d = _split(x.astype(np.float64))
    nd = d.shape[0]
    if nd == 0:
        return s * lo_gain, d
    for k, c in enumerate(steps):
        if k % 2 == 0:
            d += c * (s[:nd] + _neighbors_for_odd(s, nd))
        else:
            left, right = _neighbors_for_even(d, s.shape[0])
            s += c * (left + right)
    return s * lo_gain, d * hi_gain


def _inv_linear(s, d, steps, lo_gain, hi_gain):
    s = s.astype(np.float64) / lo_gain
    d = d.astype(np.float64)
    nd = d.shape[0]
    if nd == 0:
        return s
    d = d / hi_gain
    for k in range(len(steps) - 1, -1, -1):
        c = steps[k]
        if k % 2 == 0:
            d -= c * (s[:nd] + _neighbors_for_odd(s, nd))
        else:
            left, right = _neighbors_for_even(d, s.shape[0])
            s -= c * (left + right)
    return _merge(s, d)


_STEPS_97 = (ALPHA, BETA, GAMMA, DELTA)
# Linear (non-rounded) 5/3 used only to measure synthesis gains.
_STEPS_53 = (-0.5, 0.25)


def _fwd1(x, kernel):
    if kernel == INT_53:
        return _fwd53(x)
    return _fwd_linear(x, _STEPS_97, 1.0 / K97, K97)


def _inv1(s, d, kernel):
    if kernel == INT_53:
        return _inv53(s, d)
    return _inv_linear(s, d, _STEPS_97, 1.0 / K97, K97)


def _check_kernel(kernel):
    if kernel not in KERNELS:
        raise ArgumentError(f"unknown wavelet kernel {kernel!r}")


# ---------------------------------------------------------------------------
# 2-D transforms


def forward_dwt(plane: np.ndarray, levels: int, kernel: str = FLOAT_97) -> SubbandImage:
    _check_kernel(kernel)
    plane = np.asarray(plane)
    if plane.ndim != 2 or min(plane.shape) < 2:
        raise ArgumentError(f"plane must be 2-D and at least 2x2, got shape {plane.shape}")
    if levels < 1:
        raise ArgumentError("levels must be >= 1")
    band_shapes(plane.shape, levels)  # validates depth
    if kernel == INT_53:
        if not np.issubdtype(plane.dtype, np.integer):
            raise ArgumentError("the 5/3 integer kernel needs an integer plane")
        cur = plane.astype(np.int64)
    else:
        cur = plane.astype(np.float64)
    details = []
    for _ in range(levels):
        lo, hi = _fwd1(cur.T, kernel)  # horizontal: lift along columns of the transpose
        lo, hi = lo.T, hi.T
        ll, lh = _fwd1(lo, kernel)
        hl, hh = _fwd1(hi, kernel)
        details.append((hl, lh, hh))
        cur = ll
    return SubbandImage(cur, details, kernel, tuple(plane.shape))


def inverse_dwt(sub: SubbandImage) -> np.ndarray:
    _check_kernel(sub.kernel)
    if sub.levels < 1:
        raise ConsistencyError("subband image has no levels")
    try:
        shapes = band_shapes(tuple(sub.shape), sub.levels)
    except LevelOverflowError as exc:
        raise ConsistencyError(str(exc)) from exc
    if sub.ll.shape != shapes[-1][0]:
        raise ConsistencyError(f"LL band shape {sub.ll.shape} != expected {shapes[-1][0]}")
    for lev, (bands, exp) in enumerate(zip(sub.details, shapes), 1):
        for name, b, e in zip(ORIENTATIONS, bands, exp[1:]):
            if b.shape != e:
                raise ConsistencyError(f"level {lev} {name} band shape {b.shape} != expected {e}")
    cur = sub.ll
    for hl, lh, hh in reversed(sub.details):
        lo = _inv1(cur, lh, sub.kernel)
        hi = _inv1(hl, hh, sub.kernel)
        cur = _inv1(lo.T, hi.T, sub.kernel).T
    return np.ascontiguousarray(cur)


# ---------------------------------------------------------------------------
# Synthesis gains, used to equalize quantization noise across bands


@lru_cache(maxsize=None)
def _synthesis_norms_1d(kernel: str, level: int) -> tuple:
    """L2 norms of the 1-D synthesis basis for (lowpass, highpass) at ``level``."""
    n = 1 << (level + 7)
    if kernel == INT_53:
        steps, lo_gain, hi_gain = _STEPS_53, 1.0, 1.0
    else:
        steps, lo_gain, hi_gain = _STEPS_97, 1.0 / K97, K97

    def inv(s, d):
        return _inv_linear(s, d, steps, lo_gain, hi_gain)

    def synth(which):
        # build coefficient layout, then invert with an impulse in the middle
        lens = []
        cur = n
        for _ in range(level):
            lens.append(((cur + 1) // 2, cur // 2))
            cur = (cur + 1) // 2
        lo = np.zeros(lens[-1][0])
        hi = np.zeros(lens[-1][1])
        if which == "low":
            lo[len(lo) // 2] = 1.0
        else:
            hi[len(hi) // 2] = 1.0
        x = inv(lo[:, None], hi[:, None])
        for ls, ld in reversed(lens[:-1]):
            x = inv(x, np.zeros((ld, 1)))
        return float(np.sqrt(np.sum(x**2)))

    return synth("low"), synth("high")


def band_weight(kernel: str, level: int, orientation: str, total_levels: int) -> float:
    """Synthesis L2 gain of one coefficient in the given band."""
    if orientation == "LL":
        lo, _ = _synthesis_norms_1d(kernel, total_levels)
        return lo * lo
    lo, hi = _synthesis_norms_1d(kernel, level)
    if orientation == "HH":
        return hi * hi
    return lo * hi
