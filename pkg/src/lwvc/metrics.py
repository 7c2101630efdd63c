"""Quality metrics (PSNR, MS-SSIM), BD-rate and RD-curve CSV bookkeeping."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import signal

from .errors import ArgumentError, DomainError

PSNR_INF = math.inf
MSSSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)


def _frames(x):
    if hasattr(x, "frames"):
        return list(x.frames)
    if hasattr(x, "planes"):
        return [x]
    if isinstance(x, np.ndarray):
        return [(x,)]
    return list(x)


def _planes(f):
    return f.planes if hasattr(f, "planes") else tuple(f)


def squared_error(ref, dist) -> tuple[float, int]:
    """Total squared error and sample count over every plane of every frame."""
    rf, df = _frames(ref), _frames(dist)
    if len(rf) != len(df):
        raise ArgumentError(f"frame count mismatch: {len(rf)} vs {len(df)}")
    sse, n = 0.0, 0
    for a, b in zip(rf, df):
        pa, pb = _planes(a), _planes(b)
        if len(pa) != len(pb):
            raise ArgumentError("plane count mismatch")
        for x, y in zip(pa, pb):
            x, y = np.asarray(x), np.asarray(y)
            if x.shape != y.shape:
                raise ArgumentError(f"plane shape mismatch: {x.shape} vs {y.shape}")
            d = x.astype(np.float64) - y.astype(np.float64)
            sse += float(np.dot(d.ravel(), d.ravel()))
            n += d.size
    return sse, n


def mse(ref, dist) -> float:
    sse, n = squared_error(ref, dist)
    return sse / n if n else 0.0


def frame_mses(ref, dist) -> list:
    return [mse(a, b) for a, b in zip(_frames(ref), _frames(dist))]


def _bit_depth(ref, bit_depth):
    if bit_depth is not None:
        return bit_depth
    return getattr(ref, "bit_depth", None) or getattr(_frames(ref)[0], "bit_depth", 8)


def psnr(ref, dist, bit_depth: int | None = None) -> float:
    """10 log10(MAX^2 / MSE), MSE pooled over all samples; identical inputs give ``inf``."""
    bd = _bit_depth(ref, bit_depth)
    m = mse(ref, dist)
    if m == 0:
        return PSNR_INF
    peak = float((1 << bd) - 1)
    return 10.0 * math.log10(peak * peak / m)


def psnr_611(ref, dist, bit_depth: int | None = None) -> float:
    """(6 PSNR_Y + PSNR_Cb + PSNR_Cr) / 8, each plane pooled over the sequence."""
    bd = _bit_depth(ref, bit_depth)
    rf, df = _frames(ref), _frames(dist)
    vals = []
    for p in range(3):
        v = psnr([(_planes(a)[p],) for a in rf], [(_planes(b)[p],) for b in df], bd)
        vals.append(v)
    if any(math.isinf(v) for v in vals):
        return PSNR_INF
    return (6 * vals[0] + vals[1] + vals[2]) / 8


# ---------------------------------------------------------------------------
# MS-SSIM


def _gaussian_window(size=11, sigma=1.5):
    ax = np.arange(size) - (size - 1) / 2
    g = np.exp(-(ax**2) / (2 * sigma * sigma))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_terms(x, y, peak, win):
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    f = lambda a: signal.fftconvolve(a, win, mode="valid")  # noqa: E731
    mx, my = f(x), f(y)
    sxx = f(x * x) - mx * mx
    syy = f(y * y) - my * my
    sxy = f(x * y) - mx * my
    cs = (2 * sxy + c2) / (sxx + syy + c2)
    lum = (2 * mx * my + c1) / (mx * mx + my * my + c1)
    return float(np.mean(lum * cs)), float(np.mean(cs))


def _pool2(a):
    h, w = a.shape
    a = np.pad(a, ((0, h % 2), (0, w % 2)), mode="symmetric")
    return 0.25 * (a[0::2, 0::2] + a[1::2, 0::2] + a[0::2, 1::2] + a[1::2, 1::2])


def ms_ssim(ref, dist, bit_depth: int | None = None) -> float:
    """Five-scale MS-SSIM on luma, averaged over frames."""
    bd = _bit_depth(ref, bit_depth)
    rf, df = _frames(ref), _frames(dist)
    if len(rf) != len(df):
        raise ArgumentError(f"frame count mismatch: {len(rf)} vs {len(df)}")
    vals = [_ms_ssim_plane(_planes(a)[0], _planes(b)[0], bd) for a, b in zip(rf, df)]
    return float(np.mean(vals))


def _ms_ssim_plane(x, y, bd):
    x = np.asarray(x, np.float64)
    y = np.asarray(y, np.float64)
    if x.shape != y.shape:
        raise ArgumentError(f"plane shape mismatch: {x.shape} vs {y.shape}")
    if min(x.shape) < 176:
        raise ArgumentError(
            f"MS-SSIM needs at least 176x176 luma for five scales, got {x.shape[1]}x{x.shape[0]}; "
            "fewer scales are not supported"
        )
    if np.array_equal(x, y):
        return 1.0
    peak = float((1 << bd) - 1)
    win = _gaussian_window()
    mcs = []
    for s in range(5):
        ssim, cs = _ssim_terms(x, y, peak, win)
        if s < 4:
            mcs.append(max(cs, 0.0))
            x, y = _pool2(x), _pool2(y)
    val = max(ssim, 0.0) ** MSSSIM_WEIGHTS[4]
    for c, wgt in zip(mcs, MSSSIM_WEIGHTS[:4]):
        val *= c**wgt
    return min(val, 1.0)


def ms_ssim_db(value: float) -> float:
    return PSNR_INF if value >= 1.0 else -10.0 * math.log10(1.0 - value)


# ---------------------------------------------------------------------------
# RD curves and BD-rate


@dataclass(frozen=True)
class RDPoint:
    rate: float
    quality: float
    rate_unit: str = "bpp"
    metric: str = "psnr"

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ArgumentError(f"RD point rate must be positive and finite, got {self.rate}")
        if not math.isfinite(self.quality):
            raise ArgumentError("RD point quality must be finite")


@dataclass
class RDCurve:
    points: list
    label: str = ""

    def __post_init__(self):
        self.points = list(self.points)
        rates = [p.rate for p in self.points]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ArgumentError(f"curve {self.label!r}: rates must be strictly increasing")
        qual = [p.quality for p in self.points]
        if any(b <= a for a, b in zip(qual, qual[1:])):
            warnings.warn(f"curve {self.label!r}: quality is not strictly increasing", stacklevel=2)

    @classmethod
    def from_arrays(cls, rates, qualities, label="", rate_unit="bpp", metric="psnr") -> "RDCurve":
        return cls([RDPoint(float(r), float(q), rate_unit, metric) for r, q in zip(rates, qualities)], label)

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points], np.float64)

    @property
    def qualities(self) -> np.ndarray:
        return np.array([p.quality for p in self.points], np.float64)

    @property
    def metric(self) -> str:
        return self.points[0].metric if self.points else "psnr"


def bd_rate(anchor: RDCurve, test: RDCurve) -> float:
    """Average rate difference (percent) at equal quality; negative means ``test`` saves rate.

    Cubic fits of log-rate against quality, integrated over the shared
    quality interval.
    """
    for name, c in (("anchor", anchor), ("test", test)):
        if len(c.points) < 4:
            raise ArgumentError(f"{name} curve needs at least 4 points, has {len(c.points)}")
    qa, qt = anchor.qualities, test.qualities
    lo = max(qa.min(), qt.min())
    hi = min(qa.max(), qt.max())
    if not hi > lo:
        raise DomainError("RD curves have no overlapping quality range")
    pa = np.polyfit(qa, np.log(anchor.rates), 3)
    pt = np.polyfit(qt, np.log(test.rates), 3)
    ia, it = np.polyint(pa), np.polyint(pt)
    int_a = np.polyval(ia, hi) - np.polyval(ia, lo)
    int_t = np.polyval(it, hi) - np.polyval(it, lo)
    avg = (int_t - int_a) / (hi - lo)
    return float((math.exp(avg) - 1.0) * 100.0)


CSV_COLUMNS = ("label", "rate", "rate_unit", "quality", "metric")


def emit_rd_csv(curves: Sequence[RDCurve], labels: Sequence[str] | None = None) -> str:
    if not curves:
        raise ArgumentError("no curves to write")
    labels = list(labels) if labels is not None else [c.label for c in curves]
    return emit_rd_rows((label, p) for label, c in zip(labels, curves) for p in c.points)


def emit_rd_rows(rows) -> str:
    """CSV text for ``(label, RDPoint)`` rows, in the given order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for label, p in rows:
        w.writerow([label, repr(float(p.rate)), p.rate_unit, repr(float(p.quality)), p.metric])
    return buf.getvalue()


def parse_rd_csv(text: str) -> list:
    """Curves keyed by (label, metric), in order of first appearance."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and set(CSV_COLUMNS) - set(rows[0]):
        raise ArgumentError(f"RD CSV needs columns {', '.join(CSV_COLUMNS)}")
    groups: dict = {}
    for r in rows:
        try:
            pt = RDPoint(float(r["rate"]), float(r["quality"]), r["rate_unit"], r["metric"])
        except ValueError as exc:
            raise ArgumentError(f"bad RD CSV row {r}: {exc}") from exc
        groups.setdefault((r["label"], r["metric"]), []).append(pt)
    return [RDCurve(pts, label) for (label, _), pts in groups.items()]


@dataclass
class RDRecord:
    """Bookkeeping for one encode at one q."""

    q: float
    bits: int
    pixels: int
    frames: int
    frame_rate: float
    psnr: float
    msssim: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def bpp(self) -> float:
        return self.bits / (self.pixels * self.frames)

    @property
    def kbps(self) -> float:
        return self.bits / self.frames * self.frame_rate / 1000.0
