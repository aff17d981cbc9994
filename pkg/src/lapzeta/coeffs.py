"""Coefficients of the lattice log-determinant expansions.

All integrands are built from ``B(t) = exp(-2t) I0(2t)``, the diagonal of the
one-dimensional lattice heat kernel, and are written in ``expm1``/``log1p``
form so the ``O(t)/t`` behaviour at the origin is evaluated without
subtracting nearly equal quantities. Integrals run numerically up to
``QuadratureConfig.tail_start`` and the remainder comes from the asymptotic
series of ``B(t)^p``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import special as sp

from .errors import OrderTooHigh
from .quadrature import QuadratureConfig, geometric_breakpoints, integrate
from .special import (bessel_i0_scaled, catalan_constant, heat_kernel_power_tail,
                      log_heat_kernel_1d)
from .summation import ordered_map

__all__ = [
    "bessel_i0_scaled", "catalan_constant", "L_coeff", "L_coeff_with_error", "corner_constant",
    "free_corner_constant", "L_massive", "L_massive_with_error", "L_massive_taylor",
    "TaylorTerm", "CoeffEntry", "CoeffTable", "build_coeff_table",
]


def _check_dims(d: int, i: int) -> None:
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if not 1 <= i <= d:
        raise ValueError(f"need 1 <= i <= d, got i={i}, d={d}")


def _numeric_part(fn, quad: QuadratureConfig) -> tuple[float, float]:
    return integrate(fn, geometric_breakpoints(0.0, quad.tail_start), quad)


def L_coeff_with_error(d: int, i: int, quad: QuadratureConfig | None = None,
                       s: float = 0.0) -> tuple[float, float]:
    """``L^d_i(s) = -int_0^inf ((-1-e^{-4t})^{d-i} e^{-s^2 t} B^i - (-2)^{d-i} e^{-t}) dt/t`` and its error."""
    _check_dims(d, i)
    quad = quad or QuadratureConfig()
    j = d - i
    sign = float((-2) ** j)
    mu = float(s) ** 2

    def integrand(t):
        expo = -mu * t + j * np.log1p(0.5 * np.expm1(-4.0 * t)) + i * log_heat_kernel_1d(t)
        return -sign * (np.expm1(expo) - np.expm1(-t)) / t

    body, err = _numeric_part(integrand, quad)
    T = quad.tail_start
    tail, tail_err = heat_kernel_power_tail(i, T, mu)
    tail = -((-1) ** j * tail - sign * float(sp.exp1(T)))
    return body + tail, err + tail_err


def L_coeff(d: int, i: int, quad: QuadratureConfig | None = None, s: float = 0.0) -> float:
    return L_coeff_with_error(d, i, quad, s)[0]


def corner_constant(d: int) -> float:
    """``(-1)^d 2^-d sum_{i=1}^d log(4i) C(d, i)``, the corner term of the Dirichlet expansion."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    s = math.fsum(math.log(4 * i) * math.comb(d, i) for i in range(1, d + 1))
    return (-1) ** d * s / 2**d


def free_corner_constant(d: int) -> float:
    """``2^-d sum_{j=1}^d log(4j) (-1)^j C(d, j)``, the free-boundary analogue."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return math.fsum(math.log(4 * j) * (-1) ** j * math.comb(d, j) for j in range(1, d + 1)) / 2**d


def L_massive_with_error(d: int, mass: float, quad: QuadratureConfig | None = None) -> tuple[float, float]:
    """``-int_0^inf (exp(-m^2 t) B(t)^d - e^{-t}) dt/t`` with m the lattice mass, and its error."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if not mass >= 0:
        raise ValueError("mass must be nonnegative")
    quad = quad or QuadratureConfig()
    mu = float(mass) ** 2

    def integrand(t):
        expo = -mu * t + d * log_heat_kernel_1d(t)
        return -(np.expm1(expo) - np.expm1(-t)) / t

    body, err = _numeric_part(integrand, quad)
    T = quad.tail_start
    tail, tail_err = heat_kernel_power_tail(d, T, mu)
    return body - tail + float(sp.exp1(T)), err + tail_err


def L_massive(d: int, mass: float, quad: QuadratureConfig | None = None) -> float:
    return L_massive_with_error(d, mass, quad)[0]


class TaylorTerm(NamedTuple):
    order: int
    coefficient: float
    value: float


def _even_taylor_coefficient(d: int, j: int, quad: QuadratureConfig) -> float:
    # d^{2j}/dm^{2j} exp(-m^2 t) at m = 0 is (2j)! (-t)^j / j!; the 1/(2j)! of Taylor cancels.
    def integrand(t):
        return t ** (j - 1) * np.exp(d * log_heat_kernel_1d(t))

    body, _ = _numeric_part(integrand, quad)
    tail, _ = heat_kernel_power_tail(d, quad.tail_start, power=j)
    return -((-1) ** j) / math.factorial(j) * (body + tail)


def L_massive_taylor(d: int, mass: float, order: int | None = None,
                     quad: QuadratureConfig | None = None) -> list[TaylorTerm]:
    """Small-mass Taylor terms ``c_k m^k`` of :func:`L_massive`, k = 0..order.

    Only orders below d exist (the differentiated integrals diverge beyond).
    Odd orders vanish identically at zero mass and are returned as exact 0.
    """
    if d < 2:
        raise ValueError("the Taylor structure is stated for d >= 2")
    order = d - 1 if order is None else int(order)
    if order >= d:
        raise OrderTooHigh(f"order {order} >= d = {d}: derivative integrals diverge")
    if order < 0:
        raise ValueError("order must be nonnegative")
    quad = quad or QuadratureConfig()
    out = [TaylorTerm(0, L_coeff(d, d, quad), L_coeff(d, d, quad))]
    for k in range(1, order + 1):
        if k % 2:
            out.append(TaylorTerm(k, 0.0, 0.0))
        else:
            c = _even_taylor_coefficient(d, k // 2, quad)
            out.append(TaylorTerm(k, c, c * mass**k))
    return out


class CoeffEntry(NamedTuple):
    value: float
    err: float


def _g17(x: float) -> str:
    return format(x, ".17g")


@dataclass(frozen=True)
class CoeffTable:
    """Immutable cache of ``L^d_i(0)`` for i = 1..d with error estimates."""

    d: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, i: int) -> float:
        return self.entries[i].value

    def values(self) -> list[float]:
        return [self.entries[i].value for i in range(1, self.d + 1)]

    def to_json(self) -> str:
        body = ", ".join(
            f'"{i}": {{"value": {_g17(e.value)}, "err": {_g17(e.err)}}}'
            for i, e in sorted(self.entries.items()))
        return f'{{"d": {self.d}, "entries": {{{body}}}}}'

    @classmethod
    def from_json(cls, text: str) -> "CoeffTable":
        raw = json.loads(text)
        entries = {int(k): CoeffEntry(float(v["value"]), float(v["err"]))
                   for k, v in raw["entries"].items()}
        return cls(int(raw["d"]), entries)

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def build_coeff_table(d: int, quad: QuadratureConfig | None = None,
                      workers: int | None = None) -> CoeffTable:
    quad = quad or QuadratureConfig()
    results = ordered_map(lambda k: L_coeff_with_error(d, k + 1, quad), d, workers)
    return CoeffTable(d, {i + 1: CoeffEntry(*r) for i, r in enumerate(results)})
