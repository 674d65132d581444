import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dnsm import (Discriminant, DnsmModel, ModelConfig, Polytope, ShapeRaster,
                  eval_halfspace, eval_model, eval_polytope, init_polytopes)
from dnsm.model import disc_polytope, grid_centers, polytope_memberships, sigmoid

import oracles

finite = st.floats(-50, 50, allow_nan=False)


def test_halfspace_examples():
    assert eval_halfspace(Discriminant((0.0, 0.0), 0.0), (0.3, 0.9)) == 0.5
    k = 10.0
    assert eval_halfspace(Discriminant((k, 0.0), 0.0), (1.0, 0.0)) == pytest.approx(
        1 / (1 + math.exp(-10)), rel=1e-12)
    assert eval_halfspace(Discriminant((-k, 0.0), 0.0), (1.0, 0.0)) == pytest.approx(
        4.5397868702434395e-05, rel=1e-9)


@given(w=arrays(float, 2, elements=finite), b=finite,
       x=arrays(float, 2, elements=st.floats(-2, 2)))
def test_sigmoid_sign_matches_indicator(w, b, x):
    z = float(x @ w + b)
    assume(abs(z) > 1e-12)  # closer to 0 the sigmoid rounds to exactly 0.5
    assert (eval_halfspace(Discriminant(w, b), x) >= 0.5) == (z >= 0)


def test_sigmoid_is_stable_at_extremes():
    z = np.array([-800.0, -40.0, 0.0, 40.0, 800.0])
    s = sigmoid(z)
    assert np.all(np.isfinite(s))
    assert s[0] == 0.0 and s[-1] == 1.0
    np.testing.assert_allclose(s + sigmoid(-z), 1.0)


def test_discriminant_rejects_nonfinite():
    with pytest.raises(ValueError):
        Discriminant((np.nan, 0.0), 0.0)
    with pytest.raises(ValueError):
        Discriminant((1.0, 0.0), np.inf)


def test_zero_polytope_is_half_to_the_m():
    for m in (3, 5, 16):
        assert eval_polytope(np.zeros((m, 3)), (0.2, 0.7)) == pytest.approx(0.5 ** m)


def test_disc_polytope_inside_and_outside():
    c, r = np.array([0.5, 0.5]), 0.15  # slope * radius = 9: every face near 1
    p = disc_polytope(c, r, 16, 60.0)
    assert eval_polytope(p, c) >= 0.99
    for angle in np.linspace(0, 2 * np.pi, 7):
        far = c + 2 * r * np.array([np.cos(angle), np.sin(angle)])
        assert eval_polytope(p, far) <= 1e-3


def test_square_polytope_level_set_is_at_apothem():
    kappa, r, c = 60.0, 0.15, np.array([0.5, 0.5])
    p = disc_polytope(c, r, 4, kappa)
    for direction in ([1, 0], [0, 1], [-1, 0], [0, -1]):
        ts = np.linspace(0, 2 * r, 20001)
        g = eval_polytope(p, c + ts[:, None] * np.asarray(direction, float))
        crossing = ts[np.argmax(g < 0.5)]
        assert abs(crossing - r) <= 2 / kappa


def test_polytope_accepts_dataclass_or_array():
    arr = disc_polytope((0.3, 0.4), 0.1, 8, 30.0)
    poly = Polytope.from_array(arr)
    np.testing.assert_array_equal(poly.to_array(), arr)
    x = np.random.default_rng(0).random((10, 2))
    np.testing.assert_allclose(eval_polytope(poly, x), eval_polytope(arr, x))


def test_model_examples():
    arr = disc_polytope((0.5, 0.5), 0.2, 6, 20.0)
    one = DnsmModel(ModelConfig(1, 6), arr[None])
    x = np.random.default_rng(1).random((25, 2))
    np.testing.assert_allclose(eval_model(one, x), eval_polytope(arr, x), rtol=1e-10)

    half = np.zeros((2, 3, 3))
    half[:, 0, 2] = 100.0  # two faces pinned near 1, the third at z = 0
    half[:, 1, 2] = 100.0
    two = DnsmModel(ModelConfig(2, 3), half)
    assert eval_model(two, (0.1, 0.1)) == pytest.approx(0.75)

    big = np.zeros((2, 3, 3))
    big[0, :, 2] = 800.0
    assert eval_model(DnsmModel(ModelConfig(2, 3), big), (0.5, 0.5)) == 1.0


def test_kernel_memberships_match_direct_evaluation():
    rng = np.random.default_rng(2)
    params = rng.normal(scale=8, size=(4, 5, 3))
    m = DnsmModel(ModelConfig(4, 5), params)
    shape = ShapeRaster(rng.random((9, 11)) < 0.5)
    expected = oracles.memberships(m, shape).reshape(4, -1)
    got = polytope_memberships(m, shape.pixel_points())
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-22)


models = st.integers(1, 3).flatmap(lambda n: arrays(
    float, (n, 4, 3), elements=st.floats(-30, 30, allow_nan=False)))
points = arrays(float, (8, 2), elements=st.floats(0, 1))


@given(params=models, x=points)
def test_union_dominates_every_polytope(params, x):
    m = DnsmModel(ModelConfig(len(params), 4), params)
    f = eval_model(m, x)
    g = polytope_memberships(m, x)
    assert np.all(f >= g.max(axis=0) - 1e-15)
    assert np.all((f >= 0) & (f <= 1))


@given(params=models, x=points)
def test_union_matches_inclusion_exclusion(params, x):
    m = DnsmModel(ModelConfig(len(params), 4), params)
    g = [eval_polytope(p, x) for p in params]
    if len(g) == 1:
        expected = g[0]
    elif len(g) == 2:
        expected = g[0] + g[1] - g[0] * g[1]
    else:
        a, b, c = g
        expected = a + b + c - a * b - a * c - b * c + a * b * c
    np.testing.assert_allclose(eval_model(m, x), expected, atol=1e-12)


def hard_segment_violations(params, rng, pairs=200, eps=0.01):
    """Count segments between two points with g >= 0.5 + eps that leave g >= 0.5."""
    pts = rng.random((4000, 2))
    g = eval_polytope(params, pts)
    inside = pts[g >= 0.5 + eps]
    if len(inside) < 2:
        return 0
    bad = 0
    t = np.linspace(0, 1, 41)[:, None]
    for _ in range(pairs):
        a, b = inside[rng.integers(len(inside), size=2)]
        if np.any(eval_polytope(params, a + t * (b - a)) < 0.5):
            bad += 1
    return bad


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31), m=st.integers(3, 16))
def test_hard_polytope_is_convex(seed, m):
    rng = np.random.default_rng(seed)
    params = rng.normal(scale=10, size=(m, 3))
    params[:, 2] = -(params[:, :2] @ rng.random(2)) + rng.uniform(0, 4, m)
    assert hard_segment_violations(params, rng) == 0


def test_raster_frame_roundtrip():
    shape = ShapeRaster(np.ones((6, 10), bool))
    rows, cols = np.indices((6, 10))
    pts = shape.to_normalized(rows, cols)
    r, c = shape.to_pixel(pts)
    np.testing.assert_allclose(r, rows)
    np.testing.assert_allclose(c, cols)
    assert shape.scale == 10 and shape.pixel_area == pytest.approx(0.01)
    assert pts[0, 0].tolist() == [0.05, 0.05]


def test_raster_validation():
    with pytest.raises(ValueError):
        ShapeRaster(np.zeros((4, 4), bool))
    with pytest.raises(ValueError):
        ShapeRaster(np.ones(5, bool))
    shape = ShapeRaster(np.eye(3))
    with pytest.raises(ValueError):
        shape.values[0, 0] = False


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(0)
    with pytest.raises(ValueError):
        ModelConfig(1, m_halfspaces=2)
    with pytest.raises(ValueError):
        ModelConfig(1, dimension=3)
    with pytest.raises(ValueError):
        ModelConfig(1, slope=0.0)
    with pytest.raises(ValueError):
        DnsmModel(ModelConfig(2, 4), np.zeros((2, 3, 3)))


def test_full_image_grid_has_sixteen_points():
    shape = ShapeRaster(np.ones((100, 100), bool))
    centers = grid_centers(shape, 0.25)
    assert len(centers) == 16
    np.testing.assert_allclose(np.unique(centers[:, 0]), [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(np.unique(centers[:, 1]), [0.125, 0.375, 0.625, 0.875])
    m = init_polytopes(shape, 0.1, 0.25, ModelConfig(99, 8))
    assert m.n_polytopes == 16 and m.config.m_halfspaces == 8


def test_single_pixel_gets_one_polytope():
    img = np.zeros((20, 20), bool)
    img[7, 12] = True
    m = init_polytopes(ShapeRaster(img), radius=0.15, spacing=5.0)
    assert m.n_polytopes == 1
    assert eval_model(m, ShapeRaster(img).to_normalized(7, 12)) > 0.99


def test_init_rejects_shapes_the_grid_misses():
    img = np.zeros((40, 40), bool)
    img[0, 0] = img[39, 39] = True  # bbox center falls on background
    with pytest.raises(ValueError, match="spacing"):
        init_polytopes(ShapeRaster(img), radius=0.05, spacing=0.9)


def test_init_is_translation_covariant():
    a = np.zeros((64, 64), bool)
    a[10:30, 12:40] = True
    b = np.roll(np.roll(a, 7, axis=0), 5, axis=1)
    ca = grid_centers(ShapeRaster(a), 0.08)
    cb = grid_centers(ShapeRaster(b), 0.08)
    np.testing.assert_allclose(cb - ca, np.broadcast_to([5 / 64, 7 / 64], ca.shape))


def test_subset_and_parameter_count():
    m = init_polytopes(ShapeRaster(np.ones((50, 50), bool)), 0.1, 0.25)
    sub = m.subset([3, 0])
    np.testing.assert_array_equal(sub.params, m.params[[3, 0]])
    assert sub.n_parameters == 2 * 16 * 3
    with pytest.raises(ValueError):
        m.subset([])
