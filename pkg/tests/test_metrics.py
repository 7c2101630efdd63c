import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.lib.stride_tricks import sliding_window_view

from lwvc import metrics as M
from lwvc.errors import ArgumentError, DomainError
from lwvc.media_io import Frame


def _frame(y, fill=0):
    h, w = y.shape
    c = np.full(((h + 1) // 2, (w + 1) // 2), fill)
    return Frame(y, c, c)


def test_psnr_examples():
    a = _frame(np.full((8, 8), 100), 100)
    b = _frame(np.full((8, 8), 101), 101)
    assert M.psnr(a, a) == math.inf
    assert M.psnr(a, b) == pytest.approx(48.1308, abs=1e-4)
    assert M.psnr([(np.zeros((4, 4)),)], [(np.full((4, 4), 2.0),)]) == pytest.approx(42.1102, abs=1e-4)


def test_psnr_sample_weighted_mse():
    a = _frame(np.zeros((4, 4), int), 0)
    b = Frame(np.zeros((4, 4), int), np.full((2, 2), 6), np.zeros((2, 2), int))
    # 4 of 24 samples off by 6 -> MSE 6
    assert M.mse(a, b) == pytest.approx(6.0)
    assert M.psnr(a, b) == pytest.approx(10 * math.log10(255**2 / 6))


def test_psnr_611_weighting():
    a = _frame(np.zeros((4, 4), int), 0)
    b = Frame(np.ones((4, 4), int), np.full((2, 2), 2), np.zeros((2, 2), int))
    py = 10 * math.log10(255**2)
    pc = 10 * math.log10(255**2 / 4)
    assert math.isinf(M.psnr_611(a, b))  # Cr untouched
    b = Frame(np.ones((4, 4), int), np.full((2, 2), 2), np.full((2, 2), 2))
    assert M.psnr_611(a, b) == pytest.approx((6 * py + 2 * pc) / 8)


def test_psnr_geometry_mismatch():
    with pytest.raises(ArgumentError):
        M.psnr(_frame(np.zeros((4, 4), int)), _frame(np.zeros((4, 6), int)))
    with pytest.raises(ArgumentError):
        M.psnr([_frame(np.zeros((4, 4), int))], [])


@given(st.integers(0, 2**31))
def test_psnr_symmetric_and_monotone(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 256, (6, 6))
    b = np.clip(a + rng.integers(-3, 4, a.shape), 0, 255)
    c = np.clip(a + 3 * (b - a), 0, 255)
    pa, pb = M.psnr(_frame(a), _frame(b)), M.psnr(_frame(b), _frame(a))
    assert pa == pb
    if M.mse(_frame(a), _frame(c)) > M.mse(_frame(a), _frame(b)):
        assert M.psnr(_frame(a), _frame(c)) < pa


def _pair(seed=0):
    from scipy import ndimage

    rng = np.random.default_rng(seed)
    x = np.clip(np.rint(128 + 480 * ndimage.gaussian_filter(rng.standard_normal((256, 256)), 3)), 0, 255)
    y = np.clip(x + np.rint(rng.normal(0, 8, x.shape)), 0, 255)
    return x.astype(np.int64), y.astype(np.int64)


def msssim_oracle(x, y, peak=255.0):
    """Window-by-window MS-SSIM with explicit weighted statistics."""
    g = np.exp(-((np.arange(11) - 5) ** 2) / (2 * 1.5**2))
    win = np.outer(g, g) / np.outer(g, g).sum()
    c1, c2 = (0.01 * peak) ** 2, (0.03 * peak) ** 2
    weights = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333]
    out = 1.0
    x, y = x.astype(float), y.astype(float)
    for s in range(5):
        wx = sliding_window_view(x, (11, 11))
        wy = sliding_window_view(y, (11, 11))
        mx = np.einsum("ijkl,kl->ij", wx, win)
        my = np.einsum("ijkl,kl->ij", wy, win)
        vx = np.einsum("ijkl,kl->ij", (wx - mx[..., None, None]) ** 2, win)
        vy = np.einsum("ijkl,kl->ij", (wy - my[..., None, None]) ** 2, win)
        cxy = np.einsum("ijkl,kl->ij", (wx - mx[..., None, None]) * (wy - my[..., None, None]), win)
        cs = np.mean((2 * cxy + c2) / (vx + vy + c2))
        if s == 4:
            lum = (2 * mx * my + c1) / (mx**2 + my**2 + c1)
            ssim = np.mean(lum * (2 * cxy + c2) / (vx + vy + c2))
            out *= ssim ** weights[4]
        else:
            out *= cs ** weights[s]
            x = x.reshape(x.shape[0] // 2, 2, x.shape[1] // 2, 2).mean(axis=(1, 3))
            y = y.reshape(y.shape[0] // 2, 2, y.shape[1] // 2, 2).mean(axis=(1, 3))
    return out


def test_msssim_matches_windowed_oracle():
    x, y = _pair()
    assert M.ms_ssim(_frame(x), _frame(y)) == pytest.approx(msssim_oracle(x, y), abs=1e-4)


def test_msssim_matches_tensorflow_reference():
    tf = pytest.importorskip("tensorflow")
    x, y = _pair(1)
    out = tf.image.ssim_multiscale(tf.constant(x[None, :, :, None], tf.float64),
                                   tf.constant(y[None, :, :, None], tf.float64), 255.0)
    ref = float(np.asarray(out).ravel()[0])
    assert M.ms_ssim(_frame(x), _frame(y)) == pytest.approx(ref, abs=1e-4)


def test_msssim_identity_and_bounds():
    x, y = _pair(2)
    assert M.ms_ssim(_frame(x), _frame(x)) == 1.0
    v = M.ms_ssim(_frame(x), _frame(y))
    assert 0 <= v < 1
    with pytest.raises(ArgumentError, match="176"):
        M.ms_ssim(_frame(x[:100]), _frame(y[:100]))


def _curve(rates, q, label="c"):
    return M.RDCurve.from_arrays(rates, q, label)


RATES = [0.1, 0.2, 0.45, 0.9, 1.7]
QUAL = [30.0, 33.1, 36.0, 38.7, 41.2]


def test_bd_rate_oracles():
    a = _curve(RATES, QUAL)
    assert abs(M.bd_rate(a, a)) < 1e-9
    assert M.bd_rate(a, _curve([2 * r for r in RATES], QUAL)) == pytest.approx(100.0, abs=0.5)
    assert M.bd_rate(a, _curve([0.5 * r for r in RATES], QUAL)) == pytest.approx(-50.0, abs=0.5)


def test_bd_rate_antisymmetric():
    a = _curve(RATES, QUAL)
    b = _curve([r * 0.8 for r in RATES], [q + 0.3 for q in QUAL])
    assert (1 + M.bd_rate(a, b) / 100) * (1 + M.bd_rate(b, a) / 100) == pytest.approx(1.0, abs=0.01)


def test_bd_rate_errors():
    a = _curve(RATES, QUAL)
    with pytest.raises(DomainError):
        M.bd_rate(a, _curve(RATES, [q + 20 for q in QUAL]))
    with pytest.raises(ArgumentError):
        M.bd_rate(a, _curve(RATES[:3], QUAL[:3]))


def test_curve_invariants():
    with pytest.raises(ArgumentError):
        _curve([0.2, 0.1, 0.3, 0.4], [1, 2, 3, 4])
    with pytest.raises(ArgumentError):
        M.RDPoint(0.0, 30.0)
    with pytest.raises(ArgumentError):
        M.RDPoint(1.0, math.inf)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        _curve([0.1, 0.2, 0.3, 0.4], [30, 32, 31, 33])
    assert w


def test_csv_roundtrip():
    a = _curve(RATES[:2], QUAL[:2], "anchor")
    text = M.emit_rd_csv([a])
    assert text.count("\n") == 3
    assert text.splitlines()[0] == "label,rate,rate_unit,quality,metric"
    b = _curve(RATES, QUAL, "test")
    back = M.parse_rd_csv(M.emit_rd_csv([a, b]))
    assert [c.label for c in back] == ["anchor", "test"]
    assert back[0].points == a.points and back[1].points == b.points
    with pytest.raises(ArgumentError):
        M.emit_rd_csv([])
