"""Motion-compensated temporal lifting over dyadic GOPs.

A *picture* here is a tuple of integer planes ``(Y, Cb, Cr)``. Motion is
estimated on luma; chroma reuses the luma field at half resolution.

One level turns the pair (even, odd) into

    h = odd - MC(even)
    l = even + round(MC^-1(h) / 2)

with rounding half away from zero, all in integers, so the decoder can undo
it exactly as long as it sees the same motion fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ArgumentError, PlanError
from .motion import (
    DEFAULT_BLOCK,
    DEFAULT_RANGE,
    MotionField,
    estimate_motion,
    motion_compensate,
    scatter_sums,
)

MAX_GOP = 16


def _as_int(p):
    return np.ascontiguousarray(p, dtype=np.int64)


def _round_half_away_div(num, den):
    # round(num / den) for den > 0, halves away from zero
    return np.sign(num) * ((np.abs(num) * 2 + den) // (2 * den))


def _field_for(plane, fld: MotionField) -> MotionField:
    if plane.shape == fld.shape:
        return fld
    return fld.for_chroma(plane.shape)


# ---------------------------------------------------------------------------
# single lifting steps on one plane


def mctf_predict(x_even, x_odd, fld: MotionField) -> np.ndarray:
    x_even, x_odd = np.asarray(x_even), np.asarray(x_odd)
    if x_even.shape != x_odd.shape:
        raise ArgumentError("even and odd planes differ in size")
    fld = _field_for(x_even, fld)
    if np.issubdtype(x_even.dtype, np.integer) and np.issubdtype(x_odd.dtype, np.integer):
        return _as_int(x_odd) - motion_compensate(_as_int(x_even), fld)
    return x_odd.astype(np.float64) - motion_compensate(x_even.astype(np.float64), fld)


def _update_term(highpass, fld):
    num, den = scatter_sums(_as_int(highpass), fld)
    out = np.zeros(num.shape, np.int64)
    mask = den > 0
    # l - even = round((num / den) / 2); unconnected pixels stay untouched
    out[mask] = _round_half_away_div(num[mask], 2 * den[mask])
    return out


def mctf_update(x_even, highpass, fld: MotionField) -> np.ndarray:
    x_even, highpass = np.asarray(x_even), np.asarray(highpass)
    if x_even.shape != highpass.shape:
        raise ArgumentError("even and highpass planes differ in size")
    fld = _field_for(x_even, fld)
    return _as_int(x_even) + _update_term(highpass, fld)


def mctf_inverse(lowpass, highpass, fld: MotionField):
    lowpass, highpass = np.asarray(lowpass), np.asarray(highpass)
    if lowpass.shape != highpass.shape:
        raise ArgumentError("lowpass and highpass planes differ in size")
    fld = _field_for(lowpass, fld)
    x_even = _as_int(lowpass) - _update_term(highpass, fld)
    x_odd = _as_int(highpass) + motion_compensate(x_even, fld)
    return x_even, x_odd


# ---------------------------------------------------------------------------
# whole pictures


def predict_picture(even, odd, fld):
    return tuple(mctf_predict(e, o, fld) for e, o in zip(even, odd))


def update_picture(even, high, fld):
    return tuple(mctf_update(e, h, fld) for e, h in zip(even, high))


def inverse_picture(low, high, fld):
    pairs = [mctf_inverse(l, h, fld) for l, h in zip(low, high)]
    return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)


# ---------------------------------------------------------------------------
# GOP structure


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GopPlan:
    gop_size: int

    def __post_init__(self):
        if not is_pow2(self.gop_size) or self.gop_size > MAX_GOP:
            raise PlanError(f"GOP size must be a power of two <= {MAX_GOP}, got {self.gop_size}")

    @property
    def levels(self) -> int:
        return self.gop_size.bit_length() - 1

    def pairs(self, level: int) -> list:
        """(even, odd) source-frame indices feeding level ``level``."""
        if not 1 <= level <= self.levels:
            raise ArgumentError(f"level {level} outside 1..{self.levels}")
        step = 1 << level
        half = step >> 1
        return [(t, t + half) for t in range(0, self.gop_size, step)]

    def lowpass_indices(self, level: int) -> list:
        """Source-frame positions of the level-``level`` lowpass pictures."""
        return list(range(0, self.gop_size, 1 << level))


@dataclass(frozen=True)
class MEParams:
    search_range: int = DEFAULT_RANGE
    block_size: int = DEFAULT_BLOCK
    lambda_mv: Mapping[int, float] = field(default_factory=dict)

    def lam(self, level: int) -> float:
        return float(self.lambda_mv.get(level, 0.0))


@dataclass
class TemporalSubbandPyramid:
    """Outputs of one GOP decomposition.

    ``highpass[j]`` and ``fields[j]`` hold the level-j highpass pictures and
    their motion fields; ``lowpass`` is the single retained picture of the
    deepest level. ``intermediate`` keeps every level's lowpass pictures from
    the forward pass (level 0 = input) for inspection; it is not coded.
    """

    gop_size: int
    lowpass: tuple
    highpass: dict
    fields: dict
    intermediate: dict = field(default_factory=dict, repr=False)

    @property
    def levels(self) -> int:
        return self.gop_size.bit_length() - 1

    def counts(self) -> dict:
        return {
            "lowpass": 1,
            "highpass": sum(len(v) for v in self.highpass.values()),
            "fields": sum(len(v) for v in self.fields.values()),
        }


def _picture(p) -> tuple:
    if hasattr(p, "planes"):
        p = p.planes
    return tuple(_as_int(x) for x in p)


def decompose_gop(
    frames: Sequence,
    plan: GopPlan | int,
    me: MEParams | None = None,
    fields: Mapping[int, Sequence[MotionField]] | None = None,
) -> TemporalSubbandPyramid:
    """Recursive temporal decomposition of one GOP.

    ``fields`` optionally fixes the motion per level instead of estimating it.
    """
    plan = plan if isinstance(plan, GopPlan) else GopPlan(int(plan))
    me = me or MEParams()
    cur = [_picture(f) for f in frames]
    if len(cur) != plan.gop_size:
        raise PlanError(f"GOP of size {plan.gop_size} given {len(cur)} frames")
    inter = {0: list(cur)}
    highs, flds = {}, {}
    for j in range(1, plan.levels + 1):
        lows, hs, fs = [], [], []
        for t in range(0, len(cur), 2):
            even, odd = cur[t], cur[t + 1]
            if fields is not None:
                fld = fields[j][t // 2]
            else:
                fld = estimate_motion(even[0], odd[0], me.search_range, me.lam(j), me.block_size)
            h = predict_picture(even, odd, fld)
            lows.append(update_picture(even, h, fld))
            hs.append(h)
            fs.append(fld)
        highs[j], flds[j] = hs, fs
        cur = lows
        inter[j] = list(lows)
    return TemporalSubbandPyramid(plan.gop_size, cur[0], highs, flds, inter)


def reconstruct_gop(pyr: TemporalSubbandPyramid, dropped_layers: int = 0) -> list:
    """Invert levels J..k+1; returns the level-k lowpass pictures (k=0: the GOP)."""
    levels = pyr.levels
    if not 0 <= dropped_layers <= levels:
        raise ArgumentError(f"dropped_layers={dropped_layers} outside 0..{levels}")
    cur = [pyr.lowpass]
    for j in range(levels, dropped_layers, -1):
        nxt = []
        for t, low in enumerate(cur):
            even, odd = inverse_picture(low, pyr.highpass[j][t], pyr.fields[j][t])
            nxt.extend([even, odd])
        cur = nxt
    return cur
