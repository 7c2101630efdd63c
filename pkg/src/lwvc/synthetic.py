"""Deterministic synthetic test clips (8-bit unless stated)."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy import ndimage

from .media_io import Frame, VideoSequence, chroma_shape


def _texture(rng, h, w, sigma, amp):
    t = ndimage.gaussian_filter(rng.standard_normal((h, w)), sigma, mode="wrap")
    t /= np.abs(t).max() + 1e-12
    return amp * t


def _canvas(rng, h, w):
    yy, xx = np.mgrid[0:h, 0:w]
    base = 120 + 40 * np.sin(2 * np.pi * xx / max(w, 1) * 1.5) * np.cos(2 * np.pi * yy / max(h, 1))
    base += _texture(rng, h, w, 6.0, 45) + _texture(rng, h, w, 1.2, 18)
    return base


def _to_frame(y, cb, cr, bit_depth=8):
    top = (1 << bit_depth) - 1
    q = lambda a: np.clip(np.rint(a), 0, top).astype(np.int64)  # noqa: E731
    return Frame(q(y), q(cb), q(cr), bit_depth)


def _chroma(plane):
    # 2x2 mean with edge replication, matching 4:2:0 geometry
    h, w = plane.shape
    p = np.pad(plane, ((0, h % 2), (0, w % 2)), mode="edge")
    return 0.25 * (p[0::2, 0::2] + p[1::2, 0::2] + p[0::2, 1::2] + p[1::2, 1::2])


def pan_clip(width=64, height=64, frames=16, dx=1, dy=0, seed=0, noise=0.0) -> VideoSequence:
    """Global translation of a textured canvas by (dx, dy) pixels per frame."""
    rng = np.random.default_rng(seed)
    pad = 2 + frames * max(abs(dx), abs(dy))
    H, W = height + 2 * pad, width + 2 * pad
    luma = _canvas(rng, H, W)
    u = 128 + _texture(rng, H, W, 8.0, 30)
    v = 128 + _texture(rng, H, W, 8.0, 30)
    out = []
    for t in range(frames):
        oy, ox = pad - t * dy, pad - t * dx
        y = luma[oy : oy + height, ox : ox + width]
        if noise:
            y = y + rng.normal(0, noise, y.shape)
        out.append(_to_frame(y, _chroma(u[oy : oy + height, ox : ox + width]), _chroma(v[oy : oy + height, ox : ox + width])))
    return VideoSequence(tuple(out), Fraction(30, 1))


def natural_clip(width=64, height=64, frames=16, seed=0) -> VideoSequence:
    """Slow pan plus an independently moving textured disc and light sensor noise."""
    rng = np.random.default_rng(seed)
    pad = 4 + frames
    H, W = height + 2 * pad, width + 2 * pad
    bg = _canvas(rng, H, W)
    obj = 150 + _texture(rng, height, width, 2.0, 60)
    u = 128 + _texture(rng, H, W, 8.0, 25)
    v = 128 + _texture(rng, H, W, 8.0, 25)
    yy, xx = np.mgrid[0:height, 0:width]
    r = max(3.0, min(width, height) / 6)
    out = []
    for t in range(frames):
        ox = pad - (t // 2)
        y = bg[pad : pad + height, ox : ox + width].copy()
        cb = u[pad : pad + height, ox : ox + width].copy()
        cr = v[pad : pad + height, ox : ox + width].copy()
        cx = width * 0.3 + 1.5 * t
        cy = height * 0.5 + 0.5 * t
        mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        shifted = np.roll(obj, (int(round(0.5 * t)), int(round(1.5 * t))), axis=(0, 1))
        y[mask] = shifted[mask]
        cb[mask] = 100.0
        cr[mask] = 170.0
        y = y + rng.normal(0, 1.0, y.shape)
        out.append(_to_frame(y, _chroma(cb), _chroma(cr)))
    return VideoSequence(tuple(out), Fraction(30, 1))


def static_clip(width=64, height=64, frames=16, seed=0) -> VideoSequence:
    rng = np.random.default_rng(seed)
    y = _canvas(rng, height, width)
    f = _to_frame(y, _chroma(128 + _texture(rng, height, width, 4, 20)), _chroma(128 + _texture(rng, height, width, 4, 20)))
    return VideoSequence((f,) * frames, Fraction(30, 1))


def alternating_clip(width=64, height=64, frames=16, bit_depth=8) -> VideoSequence:
    """Black and white frames in turn: no temporal correlation between neighbors."""
    top = (1 << bit_depth) - 1
    black = Frame.blank(width, height, bit_depth, 0)
    white = Frame.blank(width, height, bit_depth, top)
    return VideoSequence(tuple(white if t % 2 else black for t in range(frames)), Fraction(30, 1))


def noise_clip(width=64, height=64, frames=16, seed=0, bit_depth=8) -> VideoSequence:
    """Independent uniform random frames."""
    rng = np.random.default_rng(seed)
    top = 1 << bit_depth
    ch = chroma_shape(height, width)
    return VideoSequence(
        tuple(
            Frame(rng.integers(0, top, (height, width)), rng.integers(0, top, ch), rng.integers(0, top, ch), bit_depth)
            for _ in range(frames)
        ),
        Fraction(30, 1),
    )
