import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from nufourier.geometry import box
from nufourier.measures import bessel_bound
from nufourier.nugs import error_report, reconstruct, sample_function
from nufourier.sampling import gen_jittered
from nufourier.spaces import HaarSpace, LegendreSpace
from nufourier.weights import voronoi_weights_1d


@pytest.fixture(scope="module")
def ws():
    # K = 2 N^2 for N = 8
    return voronoi_weights_1d(gen_jittered(0.45, 0.2, 1, 140, 7), box(1.0), 128)


def random_coeffs(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def test_sample_indicator():
    assert sample_function([1.0], HaarSpace(0), np.array([[0.0]]))[0] == pytest.approx(1.0)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_sample_linear(a, b):
    rng = np.random.default_rng(0)
    amb = LegendreSpace(10)
    f, g = random_coeffs(rng, 11), random_coeffs(rng, 11)
    pts = rng.uniform(-30, 30, (40, 1))
    lhs = sample_function(a * f + b * g, amb, pts)
    rhs = a * sample_function(f, amb, pts) + b * sample_function(g, amb, pts)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)) * 10)


def test_sample_matches_quadrature(rng):
    amb = LegendreSpace(6)
    f = random_coeffs(rng, 7)
    func = lambda x: (amb.evaluate(np.array([x])) @ f)[0]
    for w in (0.0, 1.3, -7.9, 22.4):
        re = quad(lambda x: func(x).real * math.cos(2 * math.pi * w * x) + func(x).imag * math.sin(2 * math.pi * w * x), -1, 1, limit=200)[0]
        im = quad(lambda x: func(x).imag * math.cos(2 * math.pi * w * x) - func(x).real * math.sin(2 * math.pi * w * x), -1, 1, limit=200)[0]
        assert abs(sample_function(f, amb, np.array([[w]]))[0] - (re + 1j * im)) <= 1e-10


def test_sample_cut_at_K(ws):
    f = np.ones(9)
    assert len(sample_function(f, LegendreSpace(8), ws, K=10)) == len(ws.restrict(hi=10))


def test_recovers_in_space_data(ws, rng):
    space = LegendreSpace(8)
    f = random_coeffs(rng, 9)
    res = reconstruct(sample_function(f, space, ws), ws, space)
    assert np.linalg.norm(res.coefficients - f) <= 1e-8 * np.linalg.norm(f)
    assert not res.rank_deficient and res.V_used > 0
    assert res.W_used == pytest.approx(bessel_bound(ws.body, ws.gap))


def test_zero_samples(ws):
    res = reconstruct(np.zeros(len(ws)), ws, LegendreSpace(8))
    np.testing.assert_array_equal(res.coefficients, 0)


def test_truncation_error_bound(ws, rng):
    amb, space = LegendreSpace(24), LegendreSpace(8)
    for _ in range(5):
        f = random_coeffs(rng, 25) / np.arange(1, 26)
        res = reconstruct(sample_function(f, amb, ws), ws, space)
        rep = error_report(f, res, space, amb)
        assert rep["bound_satisfied"]
        assert rep["error"] >= rep["best_approximation"] - 1e-12


def test_pure_noise_bound(ws, rng):
    amb, space = LegendreSpace(24), LegendreSpace(8)
    g = random_coeffs(rng, 25)
    g *= 0.1 / np.linalg.norm(g)
    res = reconstruct(sample_function(g, amb, ws), ws, space)
    rep = error_report(np.zeros(25), res, space, amb, noise=g)
    assert np.linalg.norm(res.coefficients) <= math.sqrt(res.W_used / res.V_used) * 0.1
    assert rep["bound_satisfied"]


def test_in_space_error_is_zero(ws, rng):
    amb, space = LegendreSpace(24), LegendreSpace(8)
    f = np.zeros(25, complex)
    f[:9] = random_coeffs(rng, 9)
    res = reconstruct(sample_function(f, amb, ws), ws, space)
    rep = error_report(f, res, space, amb)
    assert rep["error"] <= 1e-8 and rep["bound"] >= 0


def test_normal_equations(ws, rng):
    amb, space = LegendreSpace(24), LegendreSpace(8)
    y = sample_function(random_coeffs(rng, 25), amb, ws)
    c = reconstruct(y, ws, space).coefficients
    A = space.fourier_rows(ws.points)
    grad = A.conj().T @ (ws.weights * (A @ c - y))
    scale = np.linalg.norm(A.conj().T @ (ws.weights * y))
    assert np.linalg.norm(grad) <= 1e-10 * scale


def test_projection_idempotent(ws, rng):
    amb, space = LegendreSpace(24), LegendreSpace(8)
    c = reconstruct(sample_function(random_coeffs(rng, 25), amb, ws), ws, space).coefficients
    again = reconstruct(sample_function(c, space, ws), ws, space).coefficients
    np.testing.assert_allclose(again, c, atol=1e-10 * np.linalg.norm(c))


@given(st.floats(0.01, 100))
def test_weight_scaling_invariance(t):
    ws = voronoi_weights_1d(gen_jittered(0.45, 0.2, 1, 40, 2), box(1.0), 32)
    rng = np.random.default_rng(3)
    amb, space = LegendreSpace(16), LegendreSpace(5)
    y = sample_function(random_coeffs(rng, 17), amb, ws)
    a = reconstruct(y, ws, space).coefficients
    b = reconstruct(y, ws.scaled(t), space).coefficients
    np.testing.assert_allclose(a, b, atol=1e-10 * np.linalg.norm(a))


def test_rank_deficient_flag():
    ws = voronoi_weights_1d(gen_jittered(0.45, 0.2, 1, 40, 2), box(1.0), 2)
    space = LegendreSpace(12)
    res = reconstruct(np.ones(len(ws)), ws, space)
    assert res.rank_deficient and res.V_used == 0 and math.isinf(res.condition_estimate)
    with pytest.raises(ValueError):
        reconstruct(np.ones(3), ws, space)
