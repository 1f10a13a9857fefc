import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nufourier.geometry import (
    ConvexBody, InsufficientExtentError, SamplingSet, ball, box, covering_number, gap,
    norm_D, norm_polar, separation, volumes,
)
from nufourier.sampling import gen_grid, gen_jittered

bodies = st.one_of(
    st.builds(box, st.floats(0.1, 3.0), st.integers(1, 2)),
    st.builds(ball, st.floats(0.1, 3.0), st.integers(1, 2)),
)


def test_norm_D_examples():
    assert norm_D(box(0.5, 2), [0.5, 0.0]) == pytest.approx(1.0)
    assert norm_D(ball(2.0, 2), [0.0, 3.0]) == pytest.approx(1.5)
    assert norm_D(box(1.0, 1), [0.0]) == 0.0


def test_norm_polar_examples():
    assert norm_polar(box(0.5, 1), [1.0]) == pytest.approx(0.5)
    assert norm_polar(box(0.5, 2), [1.0, 1.0]) == pytest.approx(1.0)
    assert norm_polar(ball(1.0, 2), [0.0, 2.0]) == pytest.approx(2.0)


def test_volumes_examples():
    assert volumes(box(0.5, 2)) == pytest.approx((1.0, 8.0))
    assert volumes(ball(1.0, 2)) == pytest.approx((math.pi, math.pi))
    # D = [-1, 1] has polar set [-1, 1], so both measures are 2
    assert volumes(box(1.0, 1)) == pytest.approx((2.0, 2.0))


def test_box_polar_volume_against_monte_carlo(rng):
    body = box(0.7, 2)
    z = rng.uniform(-2 / 0.7, 2 / 0.7, size=(400_000, 2))
    frac = np.mean(body.polar_norm(z) <= 1)
    assert frac * (4 / 0.7) ** 2 == pytest.approx(body.polar_volume, rel=0.01)


def test_body_parse_roundtrip():
    b = ConvexBody.parse("box:0.5:2")
    assert b == box(0.5, 2)
    assert ConvexBody.from_dict(b.to_dict()) == b
    with pytest.raises(ValueError):
        ConvexBody.parse("cube:1")


@given(bodies, st.floats(-5, 5), st.data())
def test_homogeneity(body, t, data):
    x = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=body.dim, max_size=body.dim)))
    assert norm_D(body, t * x) == pytest.approx(abs(t) * norm_D(body, x), abs=1e-12)
    assert norm_polar(body, t * x) == pytest.approx(abs(t) * norm_polar(body, x), abs=1e-12)


@given(bodies, st.data())
def test_duality(body, data):
    d = body.dim
    x = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=d, max_size=d)))
    z = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=d, max_size=d)))
    nx, nz = norm_D(body, x), norm_polar(body, z)
    if nx > 0 and nz > 0:
        assert float(x @ z) / (nx * nz) <= 1 + 1e-12


def test_gap_examples():
    Z = gen_grid(1.0, 1, 20)
    assert gap(Z, box(0.5), 10, 0.01).value == pytest.approx(0.25)
    half = gen_grid(0.5, 1, 20)
    assert gap(half, box(0.5), 10, 0.01).value == pytest.approx(0.125)
    Z2 = gen_grid(1.0, 2, 12)
    est = gap(Z2, box(0.5, 2), 4, 0.05)
    assert est.value == pytest.approx(0.5)
    assert est.value <= 0.5 <= est.upper


def test_gap_needs_extent():
    with pytest.raises(InsufficientExtentError):
        gap(gen_grid(1.0, 1, 5), box(0.5), 6, 0.1)


@given(st.integers(0, 10_000))
def test_gap_antitone(seed):
    s = gen_jittered(0.6, 0.3, 2, 8, seed)
    rng = np.random.default_rng(seed)
    extra = rng.uniform(-3, 3, size=(20, 2))
    bigger = SamplingSet(np.vstack([s.points, extra]), 8)
    b = box(0.5, 2)
    assert gap(bigger, b, 3, 0.1).value <= gap(s, b, 3, 0.1).value


@given(st.floats(0.25, 4.0))
def test_gap_scales_linearly(t):
    s = gen_jittered(0.7, 0.3, 2, 8, 3)
    ts = SamplingSet(t * s.points, t * 8)
    b = box(0.5, 2)
    g1 = gap(s, b, 3, 0.125).value
    gt = gap(ts, b, 3 * t, 0.125 * t).value
    assert gt == pytest.approx(t * g1, rel=1e-9)


def test_gap_1d_exact_against_fine_grid(rng):
    s = gen_jittered(0.4, 0.3, 1, 10, 1)
    probes = np.linspace(-5, 5, 200_001)
    brute = np.min(np.abs(probes[:, None] - s.points[None, :, 0]), axis=1).max()
    assert gap(s, box(1.0), 5, 0.1).value == pytest.approx(brute, abs=1e-4)


def test_separation_examples():
    Z = SamplingSet(np.arange(-5, 6.0), 5)
    assert separation(Z, "euclidean") == pytest.approx(1.0)
    assert separation(SamplingSet([0.0, 0.4, 1.0], 1), "euclidean") == pytest.approx(0.4)
    grid = gen_grid(0.3, 2, 3)
    jit = gen_jittered(0.3, 0.0, 2, 3, 0)
    assert separation(jit, "euclidean") == pytest.approx(separation(grid, "euclidean"))
    assert separation(grid, "euclidean") == pytest.approx(0.3)
    assert separation(gen_grid(1.0, 2, 4), body=box(0.5, 2)) == pytest.approx(0.5)


def test_covering_number_examples():
    assert covering_number(gen_grid(1.0, 1, 10), 5) == 2
    assert covering_number(gen_grid(0.5, 1, 10), 5) == 3
    sparse = SamplingSet(np.array([[0.0, 0.0], [1.6, 0.1], [-1.5, 2.0], [3.0, -2.5]]), 6)
    assert covering_number(sparse, 3) == 1
    assert covering_number(gen_grid(1.0, 2, 8), 4) == 4


def test_sampling_set_validation():
    with pytest.raises(ValueError):
        SamplingSet([0.0, 0.0, 1.0], 2)
    with pytest.raises(ValueError):
        SamplingSet([0.0, 3.0], 2)
