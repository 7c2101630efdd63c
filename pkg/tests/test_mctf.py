import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lwvc.errors import PlanError
from lwvc.mctf import (
    GopPlan,
    MEParams,
    decompose_gop,
    mctf_inverse,
    mctf_predict,
    mctf_update,
    reconstruct_gop,
)
from lwvc.motion import MotionField, motion_compensate


def round_half_away(v):
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def test_zero_motion_is_integer_haar():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 256, (8, 8))
    b = rng.integers(0, 256, (8, 8))
    fld = MotionField.zeros((8, 8), 4)
    h = mctf_predict(a, b, fld)
    low = mctf_update(a, h, fld)
    np.testing.assert_array_equal(h, b - a)
    np.testing.assert_array_equal(low, a + round_half_away((b - a) / 2))


def test_predict_uses_motion_compensated_even():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 256, (16, 16))
    b = rng.integers(0, 256, (16, 16))
    fld = MotionField(8, rng.integers(-5, 6, (2, 2, 2)), (16, 16))
    np.testing.assert_array_equal(mctf_predict(a, b, fld), b - motion_compensate(a, fld))


def test_unconnected_pixels_not_updated():
    a = np.full((8, 8), 50)
    b = np.full((8, 8), 80)
    fld = MotionField.uniform((8, 8), 8, 0, 4)  # left half of `a` is never referenced
    low = mctf_update(a, mctf_predict(a, b, fld), fld)
    np.testing.assert_array_equal(low[:, :4], 50)
    assert np.all(low[:, 4:] == 65)


@given(seed=st.integers(0, 2**31), h=st.integers(4, 24), w=st.integers(4, 24), bs=st.sampled_from([2, 4, 8]))
def test_single_level_inverse_exact(seed, h, w, bs):
    rng = np.random.default_rng(seed)
    a = rng.integers(-500, 500, (h, w))
    b = rng.integers(-500, 500, (h, w))
    gh, gw = -(-h // bs), -(-w // bs)
    fld = MotionField(bs, rng.integers(-9, 10, (gh, gw, 2)), (h, w))
    hp = mctf_predict(a, b, fld)
    lp = mctf_update(a, hp, fld)
    ea, eb = mctf_inverse(lp, hp, fld)
    np.testing.assert_array_equal(ea, a)
    np.testing.assert_array_equal(eb, b)


def test_gop_plan():
    p = GopPlan(8)
    assert p.levels == 3
    assert p.pairs(1) == [(0, 1), (2, 3), (4, 5), (6, 7)]
    assert p.pairs(3) == [(0, 4)]
    assert p.lowpass_indices(2) == [0, 4]
    assert GopPlan(1).levels == 0
    for bad in (0, 3, 12, 32):
        with pytest.raises(PlanError):
            GopPlan(bad)


def _clip(seed, n, h=16, w=16):
    rng = np.random.default_rng(seed)
    return [tuple(rng.integers(0, 256, s) for s in ((h, w), (h // 2, w // 2), (h // 2, w // 2))) for _ in range(n)]


@pytest.mark.parametrize("g", [1, 2, 4, 8, 16])
def test_structure_counts(g):
    pyr = decompose_gop(_clip(g, g), g, MEParams(4, 8))
    c = pyr.counts()
    assert c == {"lowpass": 1, "highpass": g - 1, "fields": g - 1}
    assert [len(pyr.highpass[j]) for j in range(1, pyr.levels + 1)] == [g >> j for j in range(1, pyr.levels + 1)]


@pytest.mark.parametrize("g", [2, 4, 8, 16])
def test_gop_roundtrip_and_intermediates(g):
    frames = _clip(100 + g, g)
    pyr = decompose_gop(frames, g, MEParams(4, 8, {1: 2.0}))
    rec = reconstruct_gop(pyr)
    for a, b in zip(frames, rec):
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
    for k in range(1, pyr.levels + 1):
        part = reconstruct_gop(pyr, k)
        assert len(part) == g >> k
        for a, b in zip(pyr.intermediate[k], part):
            for x, y in zip(a, b):
                np.testing.assert_array_equal(x, y)


def test_wrong_frame_count():
    with pytest.raises(PlanError):
        decompose_gop(_clip(0, 3), 4)
