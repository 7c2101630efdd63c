import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lwvc.errors import ArgumentError, ConfigError
from lwvc.motion import (
    MotionField,
    estimate_motion,
    inverse_motion_compensate,
    median_predictor,
    motion_compensate,
    mv_component_bits,
    residual_sad,
    scatter_sums,
)


def taps_oracle(y, x, dx, dy, h, w):
    """(row, col, weight/4) samples for one pixel of a half-pel prediction."""
    ry, rx = y + dy / 2.0, x + dx / 2.0
    y0, x0 = math.floor(ry), math.floor(rx)
    fy, fx = ry - y0, rx - x0
    out = []
    for yy, wy in ((y0, 1 - fy), (y0 + 1, fy)):
        for xx, wx in ((x0, 1 - fx), (x0 + 1, fx)):
            if wy * wx > 0:
                out.append((min(max(yy, 0), h - 1), min(max(xx, 0), w - 1), wy * wx))
    return out


def mc_oracle(ref, fld):
    h, w = ref.shape
    out = np.zeros((h, w))
    bs = fld.block_size
    for y in range(h):
        for x in range(w):
            dx, dy = fld.vectors[y // bs, x // bs]
            out[y, x] = sum(ref[a, b] * wt for a, b, wt in taps_oracle(y, x, dx, dy, h, w))
    return out


def scatter_oracle(hp, fld):
    h, w = hp.shape
    num = np.zeros((h, w))
    den = np.zeros((h, w))
    bs = fld.block_size
    for y in range(h):
        for x in range(w):
            dx, dy = fld.vectors[y // bs, x // bs]
            for a, b, wt in taps_oracle(y, x, dx, dy, h, w):
                num[a, b] += wt * hp[y, x]
                den[a, b] += wt
    return num, den


def random_field(rng, shape, bs, rng_mv=9):
    gh, gw = -(-shape[0] // bs), -(-shape[1] // bs)
    return MotionField(bs, rng.integers(-rng_mv, rng_mv + 1, (gh, gw, 2)), shape)


@given(seed=st.integers(0, 2**31), h=st.integers(4, 20), w=st.integers(4, 20), bs=st.sampled_from([2, 4, 8]))
def test_mc_matches_direct_bilinear(seed, h, w, bs):
    rng = np.random.default_rng(seed)
    ref = rng.integers(0, 256, (h, w))
    fld = random_field(rng, (h, w), bs)
    exact = mc_oracle(ref, fld)
    np.testing.assert_allclose(motion_compensate(ref.astype(float), fld), exact, atol=1e-9)
    np.testing.assert_array_equal(motion_compensate(ref, fld), np.floor(exact + 0.5).astype(np.int64))


@given(seed=st.integers(0, 2**31), h=st.integers(4, 16), w=st.integers(4, 16), bs=st.sampled_from([2, 4]))
def test_scatter_matches_direct_loop(seed, h, w, bs):
    rng = np.random.default_rng(seed)
    hp = rng.integers(-100, 100, (h, w))
    fld = random_field(rng, (h, w), bs)
    num, den = scatter_sums(hp, fld)
    onum, oden = scatter_oracle(hp, fld)
    np.testing.assert_allclose(num, 4 * onum)
    np.testing.assert_allclose(den, 4 * oden)
    upd, cov = inverse_motion_compensate(hp, fld)
    np.testing.assert_allclose(cov.weights, oden)
    mask = oden > 0
    np.testing.assert_allclose(upd[mask], onum[mask] / oden[mask])
    assert np.all(upd[~mask] == 0)


def test_zero_field_is_identity():
    ref = np.arange(64).reshape(8, 8)
    fld = MotionField.zeros((8, 8), 4)
    np.testing.assert_array_equal(motion_compensate(ref, fld), ref)
    upd, cov = inverse_motion_compensate(ref, fld)
    np.testing.assert_array_equal(upd, ref)
    assert np.all(cov.weights == 1)


def test_unconnected_pixels_have_zero_coverage():
    # every block looks 4 px to the right: the leftmost columns are never referenced
    fld = MotionField.uniform((8, 8), 8, 0, 4)
    _, cov = inverse_motion_compensate(np.ones((8, 8), int), fld)
    assert not cov.connected[:, :4].any()
    assert cov.connected[:, 4:].all()


def test_mv_component_bits():
    assert [mv_component_bits(r) for r in (0, 1, -1, 2, 3, -4, 7, 8)] == [1, 3, 3, 5, 5, 7, 7, 9]


def test_median_predictor_neighbors():
    vec = np.zeros((2, 3, 2), np.int64)
    vec[0, :, 0] = [1, 5, 9]
    vec[1, 0, 0] = 3
    assert median_predictor(vec, 0, 0) == (0, 0)
    assert median_predictor(vec, 0, 2) == (5, 0)  # first row: left neighbor
    assert median_predictor(vec, 1, 1) == (5, 0)  # median(3, 5, 9)
    vec[1, 1, 0] = 7
    assert median_predictor(vec, 1, 2) == (7, 0)  # right edge: median(7, 9, top-left 5)


def _textured(rng, h, w):
    from scipy import ndimage

    t = ndimage.gaussian_filter(rng.standard_normal((h + 40, w + 40)), 1.5)
    return np.clip(np.rint(128 + 600 * t), 0, 255).astype(np.int64)


@pytest.mark.parametrize("sx,sy", [(2, 0), (-3, 1), (0, -2), (5, 4)])
def test_integer_shift_recovered(sx, sy):
    rng = np.random.default_rng(abs(sx * 7 + sy))
    big = _textured(rng, 48, 48)
    ref = big[20:68, 20:68]
    cur = big[20 + sy : 68 + sy, 20 + sx : 68 + sx]  # cur[y, x] = ref[y + sy, x + sx]
    fld = estimate_motion(ref, cur, 8, 0.0, 8)
    inner = fld.vectors[1:-1, 1:-1].reshape(-1, 2)
    assert np.all(inner[:, 0] == 2 * sx) and np.all(inner[:, 1] == 2 * sy)


def brute_force_sad(ref, cur, bs, by, bx, dx, dy):
    h, w = ref.shape
    s = 0.0
    for y in range(by * bs, min((by + 1) * bs, h)):
        for x in range(bx * bs, min((bx + 1) * bs, w)):
            p = sum(ref[a, b] * wt for a, b, wt in taps_oracle(y, x, dx, dy, h, w))
            s += abs(cur[y, x] - math.floor(p + 0.5))
    return s


@pytest.mark.parametrize("seed", [0, 1])
def test_full_search_optimal_against_brute_force(seed):
    # with no rate term every block's SAD is at most the best integer SAD in range
    # and at least the best SAD over every half-pel position in range
    rng = np.random.default_rng(seed)
    big = _textured(rng, 16, 16)
    ref = big[20:36, 20:36]
    cur = np.clip(big[21:37, 19:35] + rng.integers(-3, 4, (16, 16)), 0, 255)
    R = 3
    fld = estimate_motion(ref, cur, R, 0.0, 8)
    for by in range(2):
        for bx in range(2):
            got = brute_force_sad(ref, cur, 8, by, bx, *fld.vectors[by, bx])
            ints = [brute_force_sad(ref, cur, 8, by, bx, 2 * i, 2 * j) for i in range(-R, R + 1) for j in range(-R, R + 1)]
            halves = [
                brute_force_sad(ref, cur, 8, by, bx, i, j)
                for i in range(-2 * R - 1, 2 * R + 2)
                for j in range(-2 * R - 1, 2 * R + 2)
            ]
            assert min(halves) <= got <= min(ints)


def test_rate_term_prefers_predictor():
    # flat content: every vector has equal SAD, so lambda > 0 must choose zero motion
    ref = np.full((16, 16), 90)
    fld = estimate_motion(ref, ref, 8, 4.0, 8)
    assert not fld.vectors.any()


def test_residual_sad_zero_on_exact_match():
    rng = np.random.default_rng(5)
    ref = _textured(rng, 32, 32)[:32, :32]
    assert residual_sad(ref, ref, estimate_motion(ref, ref, 4)) == 0


def test_estimation_errors():
    z = np.zeros((16, 16), int)
    with pytest.raises(ConfigError):
        estimate_motion(z, z, 4, 0.0, 32)
    with pytest.raises(ConfigError):
        estimate_motion(z, z, 4, 0.0, 3)
    with pytest.raises(ConfigError):
        estimate_motion(z, z, 0)
    with pytest.raises(ArgumentError):
        estimate_motion(z, np.zeros((8, 8), int))


def test_chroma_field_halves_vectors():
    fld = MotionField(8, np.array([[[3, -3], [2, -1]]]), (8, 16))
    c = fld.for_chroma((4, 8))
    assert c.block_size == 4
    np.testing.assert_array_equal(c.vectors, [[[2, -2], [1, -1]]])
