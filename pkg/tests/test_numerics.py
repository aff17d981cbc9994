from __future__ import annotations

import math
import os

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lapzeta.errors import QuadratureFailure
from lapzeta.quadrature import QuadratureConfig, geometric_breakpoints, integrate
from lapzeta.special import (bessel_i0_scaled, catalan_constant, heat_kernel_power_coefficients,
                             heat_kernel_power_tail, i0e_minus_one, upper_gamma)
from lapzeta.summation import ordered_map, pairwise_sum, resolve_workers


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=0, max_size=300))
def test_pairwise_sum_close_to_fsum(values):
    exact = math.fsum(values)
    scale = math.fsum(abs(v) for v in values)
    assert abs(pairwise_sum(np.array(values)) - exact) <= 4 * np.finfo(float).eps * scale + 1e-300


def test_pairwise_sum_compensates_cancellation():
    vals = np.array([1e16, 1.0, -1e16, 1.0])
    assert pairwise_sum(vals) == 2.0


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv("LAPZETA_THREADS", raising=False)
    assert resolve_workers() == 1
    monkeypatch.setenv("LAPZETA_THREADS", "3")
    assert resolve_workers() == 3
    assert resolve_workers(5) == 5
    monkeypatch.setenv("LAPZETA_THREADS", "zero")
    with pytest.raises(ValueError):
        resolve_workers()


def test_ordered_map_preserves_order():
    assert ordered_map(lambda k: k * k, 50, workers=4) == [k * k for k in range(50)]


@pytest.mark.parametrize("degree", range(0, 30))
def test_gauss_kronrod_exact_on_polynomials(degree):
    # the 15-point Kronrod rule integrates degree <= 22 exactly on one panel
    cfg = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-14)
    val, err = integrate(lambda t: t**degree + 0.0 * t, [0.0, 1.0], cfg)
    assert val == pytest.approx(1.0 / (degree + 1), rel=1e-13)


def test_integrate_against_closed_forms():
    val, _ = integrate(lambda t: np.exp(-t) / np.sqrt(t + 1e-300) * (t > 0), geometric_breakpoints(0.0, 60.0))
    assert val == pytest.approx(math.sqrt(math.pi) * math.erf(math.sqrt(60.0)), rel=1e-9)
    val, _ = integrate(np.log, geometric_breakpoints(1e-12, 1.0))
    assert val == pytest.approx(-1.0 + 1e-12 - 1e-12 * math.log(1e-12), rel=1e-12)


def test_integrate_reports_failure_on_budget():
    cfg = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=4)
    with pytest.raises(QuadratureFailure):
        integrate(lambda t: np.sin(1.0 / t), [1e-3, 1.0], cfg)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0)
    with pytest.raises(ValueError):
        QuadratureConfig(split_point=-1)
    assert QuadratureConfig().tighter(10).abs_tol == pytest.approx(1e-13)


@pytest.mark.parametrize("x", [0.0, 1e-8, 0.3, 1.0, 7.5, 14.999, 15.0, 15.001, 40.0, 300.0, 1e5])
def test_i0_scaled_against_mpmath(x):
    ref = float(mpmath.besseli(0, x) * mpmath.exp(-x))
    assert bessel_i0_scaled(x) == pytest.approx(ref, rel=1e-14)


def test_i0_scaled_examples():
    assert bessel_i0_scaled(0.0) == 1.0
    assert bessel_i0_scaled(1e6) == pytest.approx((2 * math.pi * 1e6) ** -0.5, rel=1e-6)
    import lapzeta.special as S
    x = np.array([15.0])
    series = float((np.exp(-x) * (1 + S._i0_series_minus_one(x)))[0])
    asym = float(S._i0e_asymptotic(x)[0])
    assert series == pytest.approx(asym, rel=1e-12)


def test_i0e_minus_one_small_argument():
    x = 1e-6
    ref = float(mpmath.besseli(0, x) * mpmath.exp(-x) - 1)
    assert i0e_minus_one(x) == pytest.approx(ref, rel=1e-12)


def test_catalan_series_against_mpmath():
    assert catalan_constant() == pytest.approx(float(mpmath.catalan), rel=1e-15)
    alt = math.fsum((-1) ** k / (2 * k + 1) ** 2 for k in range(200000))
    assert catalan_constant() == pytest.approx(alt, abs=1e-10)


@pytest.mark.parametrize("a", [-3.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.7, 2.0])
@pytest.mark.parametrize("z", [0.01, 1.0, 40.0])
def test_upper_gamma_against_mpmath(a, z):
    assert upper_gamma(a, z) == pytest.approx(float(mpmath.gammainc(a, z)), rel=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_heat_kernel_power_series(p):
    t = 60.0
    coeffs = heat_kernel_power_coefficients(p, 14)
    series = (4 * math.pi * t) ** (-p / 2) * sum(c * t**-k for k, c in enumerate(coeffs))
    assert series == pytest.approx(bessel_i0_scaled(2 * t) ** p, rel=1e-14)


@pytest.mark.parametrize("p,mu,power", [(1, 0.0, 0.0), (2, 0.0, 0.0), (3, 0.01, 0.0), (3, 0.0, 1.0)])
def test_heat_kernel_tail_against_mpmath(p, mu, power):
    T = 40.0
    f = lambda t: mpmath.exp(-mu * t) * (mpmath.besseli(0, 2 * t) * mpmath.exp(-2 * t)) ** p * t ** (power - 1)
    mpmath.mp.dps = 30
    ref = float(mpmath.quad(f, [T, 200, 2000, mpmath.inf]))
    mpmath.mp.dps = 15
    val, err = heat_kernel_power_tail(p, T, mu, power)
    assert val == pytest.approx(ref, rel=1e-12)
    assert err < 1e-12 * abs(val) + 1e-14
