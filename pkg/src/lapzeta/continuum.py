"""Heat traces and zeta-regularized determinants of continuum boxes and tori.

The one-dimensional building block is the Gaussian sum
``sum_q exp(-(2 pi q / a)^2 t)`` and its Poisson dual
``a / sqrt(4 pi t) * sum_k exp(-a^2 k^2 / (4 t))``. The Dirichlet box of side
``a`` has heat trace ``(theta_torus(2a) - 1) / 2`` per axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy import special as sp

from .errors import MassNotSupported, NonPositiveT, ZeroMass
from .quadrature import QuadratureConfig, exponential_cutoff, geometric_breakpoints, integrate
from .special import EULER_GAMMA
from .spectra import volume_vectors

DIRECT = "direct-sum"
DUAL = "poisson-dual"
# exp(-69.1) ~ 1e-30: a Gaussian term below this relative to a running value >= 1 is dropped
_CUT = 69.1


@dataclass(frozen=True)
class BoxSpec:
    sides: tuple[float, ...]
    mass: float = 0.0

    def __post_init__(self):
        sides = tuple(float(a) for a in self.sides)
        if not sides:
            raise ValueError("a box needs at least one side")
        if not all(a > 0 and math.isfinite(a) for a in sides):
            raise ValueError(f"side lengths must be positive, got {sides}")
        if not (self.mass >= 0 and math.isfinite(self.mass)):
            raise ValueError("mass must be finite and nonnegative")
        object.__setattr__(self, "sides", sides)
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def d(self) -> int:
        return len(self.sides)

    @property
    def volume(self) -> float:
        return math.prod(self.sides)


@dataclass(frozen=True)
class ThetaValue:
    t: float
    value: float
    regime: str


def _check_t(t: float) -> float:
    t = float(t)
    if not t > 0:
        raise NonPositiveT(f"t must be positive, got {t}")
    return t


def _gauss_tail(c: float, t) -> np.ndarray:
    """``sum_{q>=1} exp(-c q^2 t)`` for an array of t, truncated at the 1e-30 rule plus two terms."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    qmax = int(math.ceil(math.sqrt(_CUT / (c * float(t.min()))))) + 2
    q2 = np.arange(1, qmax + 1, dtype=float) ** 2
    return np.exp(-c * np.outer(t, q2)).sum(axis=1)


def _regime(a: float, t: float) -> str:
    return DIRECT if (2.0 * math.pi / a) ** 2 * t >= 1.0 else DUAL


def theta_circle(a: float, t: float, regime: str | None = None) -> float:
    """``sum_{q in Z} exp(-(2 pi q / a)^2 t)``, direct or Poisson-dual evaluation."""
    t = _check_t(t)
    regime = regime or _regime(a, t)
    if regime == DIRECT:
        return float(1.0 + 2.0 * _gauss_tail((2.0 * math.pi / a) ** 2, t)[0])
    if regime == DUAL:
        return float(a / math.sqrt(4.0 * math.pi * t) * (1.0 + 2.0 * _gauss_tail(a * a / 4.0, 1.0 / t)[0]))
    raise ValueError(f"unknown regime {regime!r}")


def theta_torus_value(box: BoxSpec, t: float, regime: str | None = None) -> ThetaValue:
    t = _check_t(t)
    regimes = [regime or _regime(a, t) for a in box.sides]
    value = math.prod(theta_circle(a, t, r) for a, r in zip(box.sides, regimes))
    if box.mass:
        value *= math.exp(-box.mass**2 * t)
    tag = regimes[0] if len(set(regimes)) == 1 else "mixed"
    return ThetaValue(t, value, tag)


def theta_torus(box: BoxSpec, t: float, regime: str | None = None) -> float:
    """Heat trace of the flat torus with sides ``box.sides`` (times ``exp(-m^2 t)`` if massive)."""
    return theta_torus_value(box, t, regime).value


def theta_hypercube(box: BoxSpec, t: float) -> float:
    """Dirichlet heat trace of the box by inclusion-exclusion over doubled-side tori.

    The alternating subset sum of circle-trace products factors as
    ``prod_i (theta_circle(2 a_i) - 1) / 2``; each factor is taken from the
    direct series when that regime applies, so large t keeps full relative
    accuracy instead of cancelling down to rounding.
    """
    t = _check_t(t)
    if box.mass:
        raise MassNotSupported("the Dirichlet box heat trace is massless")
    factors = []
    for a in box.sides:
        if _regime(2.0 * a, t) == DIRECT:
            factors.append(float(_gauss_tail((math.pi / a) ** 2, t)[0]))
        else:
            factors.append((theta_circle(2.0 * a, t, DUAL) - 1.0) / 2.0)
    return math.prod(factors)


def counterterm_f(box: BoxSpec, t: float) -> float:
    """Small-t singular part ``sum_i (-1)^(d-i) V_i (4 pi t)^(-i/2)`` of the box heat trace."""
    t = _check_t(t)
    V = volume_vectors(box.sides).as_floats()
    d = box.d
    return math.fsum((-1) ** (d - i) * V[i] * (4.0 * math.pi * t) ** (-i / 2.0) for i in range(d + 1))


def _half_line_direct(a: float, t: np.ndarray) -> np.ndarray:
    # Dirichlet interval trace sum_{q>=1} exp(-pi^2 q^2 t / a^2)
    return _gauss_tail((math.pi / a) ** 2, t)


def _theta_minus_f(sides: Sequence[float], t: np.ndarray) -> np.ndarray:
    """``theta_K(t) - f(t)`` as ``sum_{S nonempty} prod_S e_i prod_rest f_i`` (no cancellation)."""
    f_parts, e_parts = [], []
    for a in sides:
        f_parts.append(a / np.sqrt(4.0 * np.pi * t) - 0.5)
        e_parts.append(a / np.sqrt(np.pi * t) * _gauss_tail(a * a, 1.0 / t))
    d = len(sides)
    total = np.zeros_like(t)
    for p in range(1, d + 1):
        for subset in combinations(range(d), p):
            term = np.ones_like(t)
            for i in range(d):
                term = term * (e_parts[i] if i in subset else f_parts[i])
            total = total + term
    return total


@dataclass(frozen=True)
class ZetaDecomposition:
    """Terms of ``zeta'(0)`` as computed; ``log_det = -zeta_prime``."""

    geometry: str
    sides: tuple[float, ...]
    mass: float
    terms: dict
    errors: dict

    @property
    def zeta_prime(self) -> float:
        return math.fsum(self.terms.values())

    @property
    def log_det(self) -> float:
        return -self.zeta_prime

    def as_dict(self) -> dict:
        return {
            "geometry": self.geometry,
            "sides": list(self.sides),
            "mass": self.mass,
            "terms": dict(self.terms),
            "quadrature_error": dict(self.errors),
            "zeta_prime_zero": self.zeta_prime,
            "log_det_zeta": self.log_det,
        }


def zeta_decomposition_box(box: BoxSpec, quad: QuadratureConfig | None = None) -> ZetaDecomposition:
    """Mellin split of ``zeta'(0)`` for the Dirichlet Laplacian on the box.

    ``int_0^1 (theta - f) dt/t + int_1^inf theta dt/t + (-1)^d 2^-d gamma
    - sum_{i=1}^d (-1)^(d-i) (2/i) V_i (4 pi)^(-i/2)``.
    """
    if box.mass:
        raise MassNotSupported("use zeta_prime_zero_massive_torus for massive problems")
    quad = quad or QuadratureConfig()
    d, sides = box.d, box.sides
    split = quad.split_point

    small, small_err = integrate(lambda t: _theta_minus_f(sides, t) / t,
                                 geometric_breakpoints(0.0, split), quad)

    rates = [(math.pi / a) ** 2 for a in sides]
    lam_min = sum(rates)
    prefactor = math.prod(1.0 / -math.expm1(-r * split) for r in rates)
    T = exponential_cutoff(lam_min, prefactor, 1e-3 * quad.abs_tol, 2.0 * split)

    def large_integrand(t):
        out = np.ones_like(t)
        for a in sides:
            out = out * _half_line_direct(a, t)
        return out / t

    large, large_err = integrate(large_integrand, geometric_breakpoints(split, T), quad)

    V = volume_vectors(sides).as_floats()
    # int_0^split f t^(s-1) dt continued to s = 0; at split = 1 the log term drops out
    volume_term = -math.fsum((-1) ** (d - i) * 2.0 / i * V[i] * (4.0 * math.pi * split) ** (-i / 2.0)
                             for i in range(1, d + 1))
    gamma_term = (-1) ** d * (EULER_GAMMA + math.log(split)) / 2**d
    terms = {
        "small_t_integral": small,
        "large_t_integral": large,
        "euler_gamma_term": gamma_term,
        "volume_term": volume_term,
    }
    return ZetaDecomposition("hypercube", sides, 0.0, terms,
                             {"small_t_integral": small_err, "large_t_integral": large_err})


def zeta_prime_zero_box(box: BoxSpec, quad: QuadratureConfig | None = None) -> float:
    """``zeta'(0)`` of the Dirichlet Laplacian on the box; ``log det_zeta = -zeta'(0)``."""
    return zeta_decomposition_box(box, quad).zeta_prime


def gamma_term_massive(d: int, m: float, V: float) -> float:
    """Finite part at s = 0 of ``V (4 pi)^(-d/2) Gamma(s - d/2) m^(d - 2s)`` differentiated in s.

    Odd d: ``V Gamma(-d/2) (m^2 / 4 pi)^(d/2)``. Even d:
    ``(-1)^(d/2) (H_{d/2} - log m^2) / (d/2)! * V m^d / (4 pi)^(d/2)``.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if not m > 0:
        raise ZeroMass("the massive closed form needs m > 0")
    if not V > 0:
        raise ValueError("volume must be positive")
    if d % 2:
        return V * float(sp.gamma(-d / 2.0)) * (m * m / (4.0 * math.pi)) ** (d / 2.0)
    h = d // 2
    harmonic = math.fsum(1.0 / j for j in range(1, h + 1))
    return (-1) ** h * (harmonic - math.log(m * m)) / math.factorial(h) * V * m**d / (4.0 * math.pi) ** h


def _log1p_two_s(a: float, t: np.ndarray) -> np.ndarray:
    """``log(theta_circle(a, t) * sqrt(4 pi t) / a)`` evaluated stably in either regime."""
    out = np.empty_like(t)
    dual = (2.0 * np.pi / a) ** 2 * t < 1.0
    if np.any(dual):
        td = t[dual]
        out[dual] = np.log1p(2.0 * _gauss_tail(a * a / 4.0, 1.0 / td))
    if np.any(~dual):
        tdir = t[~dual]
        theta = 1.0 + 2.0 * _gauss_tail((2.0 * np.pi / a) ** 2, tdir)
        out[~dual] = np.log(theta * np.sqrt(4.0 * np.pi * tdir) / a)
    return out


def zeta_decomposition_massive_torus(box: BoxSpec,
                                     quad: QuadratureConfig | None = None) -> ZetaDecomposition:
    """``zeta'(0)`` of ``Delta + m^2`` on the flat torus.

    ``int_0^inf (theta_m(t) - V (4 pi t)^(-d/2) e^{-m^2 t}) dt/t`` plus the closed-form
    contribution of the subtracted volume term.
    """
    if not box.mass > 0:
        raise ZeroMass("massive torus determinant needs m > 0")
    quad = quad or QuadratureConfig()
    sides, m, d = box.sides, box.mass, box.d
    mu = m * m

    def integrand(t):
        logs = np.zeros_like(t)
        for a in sides:
            logs = logs + _log1p_two_s(a, t)
        lead = math.prod(sides) * (4.0 * np.pi * t) ** (-d / 2.0)
        return np.exp(-mu * t) * lead * np.expm1(logs) / t

    # beyond T the integrand is below exp(-m^2 T) * (theta_0 + V (4 pi T)^(-d/2)) / T
    T = exponential_cutoff(mu, 2.0 + box.volume, 1e-3 * quad.abs_tol, 1.0)
    body, err = integrate(integrand, geometric_breakpoints(0.0, T, first=min(T, 1.0) / 64.0), quad)
    terms = {"theta_integral": body, "gamma_term": gamma_term_massive(d, m, box.volume)}
    return ZetaDecomposition("torus", sides, m, terms, {"theta_integral": err})


def zeta_prime_zero_massive_torus(box: BoxSpec, quad: QuadratureConfig | None = None) -> float:
    return zeta_decomposition_massive_torus(box, quad).zeta_prime
