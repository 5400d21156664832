import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from abphase import kernels as K

EPS = 0.01


def test_step_midpoint_and_saturation():
    assert K.step(0.0, EPS) == 0.5
    assert K.step(0.0, 3.7) == 0.5
    assert abs(K.step(10 * EPS, EPS) - 1.0) < 1e-12
    assert K.step(-10 * EPS, EPS) == 0.0


@given(st.floats(-1.0, 1.0), st.floats(1e-3, 0.5))
def test_step_reflection_is_exact(u, eps):
    assert K.step(u, eps) + K.step(-u, eps) == 1.0


def test_delta_peak_closed_form():
    assert K.delta(0.0, EPS) == pytest.approx(1 / (EPS * math.sqrt(2 * math.pi)), rel=1e-15)


def test_delta_normalization():
    val, _ = integrate.quad(lambda u: K.delta(u, EPS), -8 * EPS, 8 * EPS, epsabs=1e-13, epsrel=1e-13)
    assert abs(val - 1.0) < 1e-12


def test_delta_prime_first_moment():
    val, _ = integrate.quad(lambda u: u * K.delta_prime(u, EPS), -8 * EPS, 8 * EPS, epsabs=1e-14)
    assert abs(val + 1.0) < 1e-10
    assert K.delta_prime(0.0, EPS) == 0.0


def test_support_cutoff():
    u = np.array([-8.01, 8.01, 20.0]) * EPS
    assert np.all(K.delta(u, EPS) == 0.0)
    assert np.all(K.delta_prime(u, EPS) == 0.0)


def _fd(f, u, h):
    return (f(u + h) - f(u - h)) / (2 * h)


def test_derivative_chain_against_finite_differences():
    rng = np.random.default_rng(1)
    u = rng.uniform(-4 * EPS, 4 * EPS, 20)
    h = EPS * 1e-4
    for f, df in ((K.step, K.delta), (K.delta, K.delta_prime), (K.delta_prime, K.delta_second)):
        num = _fd(lambda s: f(s, EPS), u, h)
        ana = df(u, EPS)
        scale = np.max(np.abs(ana))
        assert np.max(np.abs(num - ana)) / scale < 1e-6


@settings(max_examples=30)
@given(st.floats(-6.0, 6.0))
def test_delta_is_step_derivative_pointwise(k):
    u = k * EPS
    h = EPS * 1e-4
    assert abs(_fd(lambda s: K.step(s, EPS), u, h) - K.delta(u, EPS)) < 1e-6 * K.delta(0.0, EPS)


def test_delta_sampling_converges_at_second_order():
    # int cos(u) delta_eps(u) du = exp(-eps^2/2) for the untruncated Gaussian
    errs = []
    for eps in (0.1, 0.05, 0.025):
        val, _ = integrate.quad(lambda u: math.cos(u) * K.delta(u, eps), -8 * eps, 8 * eps, epsabs=1e-14)
        errs.append(abs(val - 1.0))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.95


def test_window_is_indicator_difference():
    u = np.linspace(-0.5, 1.5, 41)
    assert np.array_equal(K.window(u, 0.0, 1.0, EPS), K.step(u, EPS) - K.step(u - 1.0, EPS))
    assert K.window(0.5, 0.0, 1.0, EPS) == 1.0
