import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nufourier.geometry import InsufficientExtentError, SamplingSet, box, separation
from nufourier.sampling import gen_grid, gen_jittered
from nufourier.weights import (
    WeightedSamples, lattice_weights, voronoi_weights, voronoi_weights_1d, voronoi_weights_nd,
)


def test_unit_lattice_1d():
    ws = voronoi_weights_1d(gen_grid(1, 1, 20), box(0.5), 10)
    np.testing.assert_allclose(ws.weights, 1.0, rtol=0, atol=1e-15)
    assert len(ws) == 21


def test_midpoint_weight():
    s = SamplingSet([-1.0, 0.0, 0.4, 1.0, 2.0], 2)
    ws = voronoi_weights_1d(s, box(1.0), 0.5)
    w = dict(zip(ws.points[:, 0], ws.weights))
    assert w[0.4] == pytest.approx(0.5)


@given(st.floats(0.05, 2.0))
def test_scaled_lattice_1d(h):
    ws = voronoi_weights_1d(gen_grid(h, 1, 20 * h + 2 * h), box(0.5), 20 * h)
    np.testing.assert_allclose(ws.weights, h, rtol=1e-12)


def test_1d_needs_margin():
    with pytest.raises(InsufficientExtentError):
        voronoi_weights_1d(gen_grid(1, 1, 5), box(0.5), 5)


@given(st.integers(0, 10_000))
def test_1d_weights_telescope(seed):
    s = gen_jittered(0.5, 0.4, 1, 20, seed)
    ws = voronoi_weights_1d(s, box(0.5), 10)
    x = np.sort(s.points[:, 0])
    inside = np.flatnonzero(np.abs(x) <= 10)
    lo, hi = inside[0], inside[-1]
    assert ws.weights.sum() == pytest.approx(0.5 * (x[hi + 1] + x[hi] - x[lo] - x[lo - 1]))
    assert np.all(ws.weights > 0)


def test_lattice_2d_probes():
    Z2 = gen_grid(1.0, 2, 8)
    ws = voronoi_weights_nd(Z2, box(0.5, 2), 3, resolution_or_samples=2000)
    np.testing.assert_allclose(ws.weights, 1.0, atol=0.01)
    exact = lattice_weights(Z2, box(0.5, 2), 3)
    assert len(exact) == len(ws)
    np.testing.assert_array_equal(exact.weights, 1.0)


def test_probe_partition():
    s = gen_jittered(0.5, 0.3, 2, 8, 2)
    ws = voronoi_weights_nd(s, box(0.5, 2), 3, resolution_or_samples=300)
    m = ws.method
    total = m["probe_count"] * m["probe_cell"]
    assert ws.weights.sum() + m["unreported_measure"] == pytest.approx(total, rel=1e-9)


def test_grid_and_mc_agree():
    s = gen_jittered(1.0, 0.3, 2, 10, 4)
    b = box(0.5, 2)
    g = voronoi_weights_nd(s, b, 3, method="grid", resolution_or_samples=1200)
    mc = voronoi_weights_nd(s, b, 3, method="mc", resolution_or_samples=4_000_000, seed=1)
    np.testing.assert_array_equal(g.points, mc.points)
    rel = np.linalg.norm(g.weights - mc.weights) / np.linalg.norm(g.weights)
    assert rel <= 0.01


def test_weights_independent_of_threads():
    s = gen_jittered(0.4, 0.3, 2, 8, 6)
    b = box(0.5, 2)
    a = voronoi_weights_nd(s, b, 3, resolution_or_samples=400, threads=1)
    c = voronoi_weights_nd(s, b, 3, resolution_or_samples=400, threads=4)
    np.testing.assert_array_equal(a.weights, c.weights)
    m1 = voronoi_weights_nd(s, b, 3, method="mc", resolution_or_samples=300_000, seed=2)
    m4 = voronoi_weights_nd(s, b, 3, method="mc", resolution_or_samples=300_000, seed=2, threads=4)
    np.testing.assert_array_equal(m1.weights, m4.weights)


def test_lattice_lower_bound():
    Z2 = gen_grid(1.0, 2, 8)
    b = box(0.5, 2)
    ws = voronoi_weights_nd(Z2, b, 3, resolution_or_samples=500)
    eta = separation(Z2, body=b)
    floor = (eta / 2) ** 2 * b.polar_volume
    assert np.all(ws.weights > 0)
    assert ws.weights.min() >= floor - 0.01


def test_translation_invariance():
    s = gen_jittered(0.5, 0.3, 2, 8, 7)
    b = box(0.5, 2)
    v = np.array([0.37, -0.21])
    moved = SamplingSet(s.points + v, 9)
    a = voronoi_weights_nd(s, b, 3, resolution_or_samples=400)
    c = voronoi_weights_nd(moved, b, 3, resolution_or_samples=400, center=v)
    np.testing.assert_allclose(c.points - v, a.points, atol=1e-12)
    # a few probes on cell boundaries may flip under rounding
    cell = a.method["probe_cell"]
    assert np.max(np.abs(a.weights - c.weights)) <= 3 * cell


def test_nd_matches_1d():
    s = gen_jittered(0.5, 0.3, 1, 12, 8)
    b = box(0.5)
    exact = voronoi_weights_1d(s, b, 5)
    est = voronoi_weights_nd(s, b, 5, resolution_or_samples=200_000)
    np.testing.assert_allclose(est.points, exact.points)
    step = 2 * est.method["probe_radius"] / 200_000
    assert np.max(np.abs(est.weights - exact.weights)) <= 2 * step


def test_dispatch():
    b2 = box(0.5, 2)
    assert voronoi_weights(gen_grid(0.5, 2, 6), b2, 3).method["kind"] == "lattice"
    assert voronoi_weights(gen_grid(0.5, 1, 6), box(0.5), 3).method["kind"] == "exact1d"
    j = gen_jittered(0.5, 0.2, 2, 6, 0)
    assert voronoi_weights(j, b2, 2, resolution_or_samples=200).method["kind"] == "grid"


def test_too_few_probes():
    with pytest.raises(ValueError):
        voronoi_weights_nd(gen_grid(1.0, 2, 8), box(0.5, 2), 3, resolution_or_samples=50)


def test_save_load_restrict(tmp_path):
    ws = voronoi_weights_1d(gen_jittered(0.5, 0.2, 1, 12, 1), box(1.0), 8)
    ws.save(tmp_path / "w.csv")
    back = WeightedSamples.load(tmp_path / "w.csv")
    np.testing.assert_array_equal(back.points, ws.points)
    np.testing.assert_array_equal(back.weights, ws.weights)
    assert back.gap == ws.gap and back.body == ws.body
    sub = ws.restrict(lo=2, hi=4)
    assert np.all((np.abs(sub.points[:, 0]) > 2) & (np.abs(sub.points[:, 0]) <= 4))
    empty = ws.restrict(lo=8)
    assert len(empty) == 0 and empty.points.shape == (0, 1)
    np.testing.assert_allclose(ws.scaled(3.0).weights, 3 * ws.weights)
