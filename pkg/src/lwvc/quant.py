"""Continuous-rate control: log-linear parameter interpolation, per-level
step scaling and the deadzone scalar quantizer.

``q`` runs from 0 (lowest quality) to ``q_num - 1`` (highest quality).
The rate-distortion weight grows with ``q``; quantizer step sizes and
motion-cost weights shrink with it.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import ArgumentError, ConfigError

Q_NUM = 21
LAMBDA_MIN = 0.03
LAMBDA_MAX = 0.081

DEFAULT_QP_L = (0.5, 16.0)
DEFAULT_QP_H = (1.0, 64.0)
DEFAULT_Q_SCALE = {1: (1.0, 1.0), 2: (0.85, 0.9), 3: (0.7, 0.8), 4: (0.6, 0.7)}
DEFAULT_MV_LAMBDA = {1: (1.0, 8.0), 2: (1.0, 8.0), 3: (1.0, 8.0), 4: (1.0, 8.0)}


def _check_bounds(name, bounds, allow_equal=False):
    try:
        lo, hi = (float(b) for b in bounds)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: bounds must be a (min, max) pair") from exc
    if not (lo > 0 and hi > 0 and math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(f"{name}: bounds must be positive and finite, got {bounds}")
    if lo > hi or (lo == hi and not allow_equal):
        raise ConfigError(f"{name}: lower bound {lo} must be below upper bound {hi}")
    return lo, hi


def _check_q(q, q_num):
    q = float(q)
    if not (0.0 <= q <= q_num - 1):
        raise ArgumentError(f"q={q} outside [0, {q_num - 1}]")
    return q


def interpolate_bounded(q: float, bounds, q_num: int = Q_NUM) -> float:
    """exp of the linear blend of ln(lo) and ln(hi); q=0 gives lo, q=q_num-1 gives hi."""
    # degenerate (lo == hi) ranges are legal for fixed per-level scales
    lo, hi = _check_bounds("bounds", bounds, allow_equal=True)
    q = _check_q(q, q_num)
    if q == 0 or lo == hi:
        return lo
    if q == q_num - 1:
        return hi
    t = q / (q_num - 1)
    return math.exp(math.log(lo) + t * (math.log(hi) - math.log(lo)))


def _interp_decreasing(q, bounds, q_num):
    # step-like parameters: hi at q=0, lo at the top of the range
    return interpolate_bounded((q_num - 1) - _check_q(q, q_num), bounds, q_num)


def layer_scale_qp(qp: float, level: int, q_scale: float) -> float:
    """Step size for temporal level ``level``: ``qp * q_scale``."""
    if qp <= 0 or q_scale <= 0:
        raise ArgumentError("QP and q_scale must be positive")
    return qp * q_scale


@dataclass(frozen=True)
class QuantConfig:
    q: float = 10.0
    q_num: int = Q_NUM
    lambda_min: float = LAMBDA_MIN
    lambda_max: float = LAMBDA_MAX
    qp_l: tuple = DEFAULT_QP_L
    qp_h: tuple = DEFAULT_QP_H
    q_scale: Mapping[int, tuple] = field(default_factory=lambda: dict(DEFAULT_Q_SCALE))
    mv_lambda: Mapping[int, tuple] = field(default_factory=lambda: dict(DEFAULT_MV_LAMBDA))
    # multiplies lambda(q) * pixels-per-frame into the operational RD weight
    rd_lambda_scale: float = 5.0

    def __post_init__(self):
        if int(self.q_num) != self.q_num or self.q_num < 2:
            raise ConfigError("q_num must be an integer >= 2")
        if not (0 < self.lambda_min < self.lambda_max):
            raise ConfigError("need 0 < lambda_min < lambda_max")
        _check_bounds("qp_l", self.qp_l)
        _check_bounds("qp_h", self.qp_h)
        for j, b in self.q_scale.items():
            _check_bounds(f"q_scale level {j}", b, allow_equal=True)
        for j, b in self.mv_lambda.items():
            _check_bounds(f"mv_lambda level {j}", b, allow_equal=True)
        if self.rd_lambda_scale <= 0:
            raise ConfigError("rd_lambda_scale must be positive")
        if not (0.0 <= float(self.q) <= self.q_num - 1):
            raise ConfigError(f"q={self.q} outside [0, {self.q_num - 1}]")

    def with_q(self, q: float) -> "QuantConfig":
        _check_q(q, self.q_num)
        return replace(self, q=float(q))

    # -- interpolated quantities at the configured q ----------------------

    @property
    def lam(self) -> float:
        return interpolate_lambda(self.q, self)

    def qp(self, lowpass_ll: bool) -> float:
        return _interp_decreasing(self.q, self.qp_l if lowpass_ll else self.qp_h, self.q_num)

    def scale(self, level: int) -> float:
        if level <= 0:
            return 1.0
        return _interp_decreasing(self.q, self._per_level(self.q_scale, level), self.q_num)

    def mv_lambda_at(self, level: int) -> float:
        return _interp_decreasing(self.q, self._per_level(self.mv_lambda, max(level, 1)), self.q_num)

    def step(self, level: int, lowpass_ll: bool) -> float:
        """Quantizer step for a band at temporal ``level`` (0 = intra)."""
        return layer_scale_qp(self.qp(lowpass_ll), level, self.scale(level))

    @staticmethod
    def _per_level(table, level):
        if level in table:
            return table[level]
        # deeper than configured: reuse the deepest entry
        return table[max(table)]


def interpolate_lambda(q: float, cfg: QuantConfig | None = None) -> float:
    cfg = cfg or QuantConfig()
    q = _check_q(q, cfg.q_num)
    if q == 0:
        return cfg.lambda_min
    if q == cfg.q_num - 1:
        return cfg.lambda_max
    t = q / (cfg.q_num - 1)
    return math.exp(math.log(cfg.lambda_min) + t * (math.log(cfg.lambda_max) - math.log(cfg.lambda_min)))


# ---------------------------------------------------------------------------
# Deadzone quantizer


def quantize_deadzone(c, step: float):
    """sign(c) * floor(|c| / step); works on scalars and arrays."""
    if step <= 0:
        raise ArgumentError("quantizer step must be positive")
    c = np.asarray(c, dtype=np.float64)
    idx = np.sign(c) * np.floor(np.abs(c) / step)
    idx = idx.astype(np.int64)
    return int(idx) if idx.ndim == 0 else idx


def dequantize(index, step: float):
    """Midpoint reconstruction; zero stays zero."""
    if step <= 0:
        raise ArgumentError("quantizer step must be positive")
    i = np.asarray(index, dtype=np.int64)
    rec = np.where(i == 0, 0.0, np.sign(i) * (np.abs(i) + 0.5) * step)
    return float(rec) if rec.ndim == 0 else rec


# ---------------------------------------------------------------------------
# Config file (INI key = value)

CONFIG_ENV = "LWVC_CONFIG"


def _pair(text, key):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected two numbers 'min, max', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _levels(section, prefix, key):
    out = {}
    for k, v in section.items():
        if k.startswith(prefix):
            try:
                j = int(k[len(prefix):])
            except ValueError as exc:
                raise ConfigError(f"{key}: bad level key {k!r}") from exc
            out[j] = _pair(v, f"{key}.{k}")
    return out


def quant_config_from_section(section: Mapping[str, str], base: QuantConfig | None = None) -> QuantConfig:
    cfg = base or QuantConfig()
    kw = {}
    try:
        if "q" in section:
            kw["q"] = float(section["q"])
        if "q_num" in section:
            kw["q_num"] = int(section["q_num"])
        if "lambda_min" in section:
            kw["lambda_min"] = float(section["lambda_min"])
        if "lambda_max" in section:
            kw["lambda_max"] = float(section["lambda_max"])
        if "rd_lambda_scale" in section:
            kw["rd_lambda_scale"] = float(section["rd_lambda_scale"])
    except ValueError as exc:
        raise ConfigError(f"[quant] {exc}") from exc
    if "qp_l" in section:
        kw["qp_l"] = _pair(section["qp_l"], "qp_l")
    if "qp_h" in section:
        kw["qp_h"] = _pair(section["qp_h"], "qp_h")
    qs = _levels(section, "q_scale_", "q_scale")
    if qs:
        kw["q_scale"] = {**cfg.q_scale, **qs}
    mv = _levels(section, "mv_lambda_", "mv_lambda")
    if mv:
        kw["mv_lambda"] = {**cfg.mv_lambda, **mv}
    return replace(cfg, **kw)


def read_config_file(path: str | os.PathLike) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parser
