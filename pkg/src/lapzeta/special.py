"""Scalar special functions used by the coefficient and verification integrals."""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

SERIES_SWITCH = 15.0
_SERIES_TERMS = 50
_ASYM_TERMS = 30
EULER_GAMMA = 0.5772156649015329


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _i0_series_minus_one(x: np.ndarray) -> np.ndarray:
    """``I0(x) - 1`` by its power series (all terms positive)."""
    q = 0.25 * x * x
    term = np.ones_like(x)
    acc = np.zeros_like(x)
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * k)
        acc = acc + term
    return acc


def _i0e_asymptotic(x: np.ndarray) -> np.ndarray:
    inv = 1.0 / x
    term = np.ones_like(x)
    acc = np.ones_like(x)
    for k in range(1, _ASYM_TERMS):
        term = term * ((2 * k - 1) ** 2 / (8.0 * k)) * inv
        acc = acc + term
    return acc / np.sqrt(2.0 * np.pi * x)


def bessel_i0_scaled(x):
    """``exp(-x) * I0(x)`` for ``x >= 0``.

    Power series below x = 15, Hankel asymptotic series (30 terms) above.
    """
    arr, scalar = _as_array(x)
    if np.any(arr < 0):
        raise ValueError("bessel_i0_scaled needs x >= 0")
    out = np.empty_like(arr)
    lo = arr <= SERIES_SWITCH
    xs = arr[lo]
    out[lo] = np.exp(-xs) * (1.0 + _i0_series_minus_one(xs))
    out[~lo] = _i0e_asymptotic(arr[~lo])
    return float(out) if scalar else out


def i0e_minus_one(x):
    """``exp(-x) I0(x) - 1`` without cancellation near x = 0."""
    arr, scalar = _as_array(x)
    out = np.empty_like(arr)
    lo = arr <= SERIES_SWITCH
    xs = arr[lo]
    out[lo] = np.expm1(-xs) + np.exp(-xs) * _i0_series_minus_one(xs)
    out[~lo] = _i0e_asymptotic(arr[~lo]) - 1.0
    return float(out) if scalar else out


def log_heat_kernel_1d(t):
    """``log(exp(-2t) I0(2t))``: log of the per-axis lattice heat-kernel diagonal."""
    return np.log1p(i0e_minus_one(2.0 * np.asarray(t, dtype=float)))


def catalan_constant() -> float:
    """Catalan's constant from Ramanujan's accelerated series.

    ``G = pi/8 log(2 + sqrt 3) + 3/8 sum_n 1 / ((2n+1)^2 binom(2n, n))``.
    """
    terms = []
    central = 1
    for n in range(40):
        if n:
            central = central * 2 * (2 * n - 1) // n
        terms.append(1.0 / ((2 * n + 1) ** 2 * central))
    return math.pi / 8.0 * math.log(2.0 + math.sqrt(3.0)) + 3.0 / 8.0 * math.fsum(terms)


def heat_kernel_power_coefficients(p: int, terms: int = 14) -> np.ndarray:
    """Coefficients ``c_k`` with ``(e^{-2t} I0(2t))^p ~ (4 pi t)^{-p/2} sum_k c_k t^{-k}``."""
    gamma = np.empty(terms)
    gamma[0] = 1.0
    for k in range(1, terms):
        gamma[k] = gamma[k - 1] * (2 * k - 1) ** 2 / (8.0 * k) / 2.0
    out = np.zeros(terms)
    out[0] = 1.0
    for _ in range(p):
        out = np.convolve(out, gamma)[:terms]
    return out


def upper_gamma(a: float, z: float) -> float:
    """Upper incomplete gamma ``Gamma(a, z)`` for real ``a`` (possibly negative), ``z > 0``."""
    if z <= 0:
        raise ValueError("upper_gamma needs z > 0")
    if a > 0:
        return float(sp.gamma(a) * sp.gammaincc(a, z))
    steps = math.ceil(-a) if a != math.floor(a) else int(-a)
    base = a + steps
    if base == 0:
        g = float(sp.exp1(z))
    else:
        g = float(sp.gamma(base) * sp.gammaincc(base, z))
    ez = math.exp(-z)
    for j in range(steps):
        s = base - 1 - j
        g = (g - z**s * ez) / s
    return g


def power_exp_tail(nu: float, T: float, mu: float = 0.0) -> float:
    """``int_T^inf exp(-mu t) t^(-nu-1) dt`` for ``T > 0`` (``nu > 0`` when ``mu == 0``)."""
    if mu == 0.0:
        if nu <= 0:
            raise ValueError("tail diverges")
        return T ** (-nu) / nu
    return mu**nu * upper_gamma(-nu, mu * T)


def heat_kernel_power_tail(p: int, T: float, mu: float = 0.0, power: float = 0.0,
                           terms: int = 14) -> tuple[float, float]:
    """Asymptotic value of ``int_T^inf exp(-mu t) B(t)^p t^(power-1) dt`` with B = e^{-2t} I0(2t).

    Returns ``(value, error_estimate)``; the estimate is the size of the last retained term.
    """
    coeffs = heat_kernel_power_coefficients(p, terms)
    pref = (4.0 * math.pi) ** (-p / 2.0)
    contrib = [pref * c * power_exp_tail(p / 2.0 + k - power, T, mu) for k, c in enumerate(coeffs)]
    return math.fsum(contrib), abs(contrib[-1])
