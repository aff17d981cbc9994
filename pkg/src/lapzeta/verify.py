"""Checks of the lattice expansions against exact spectra and continuum determinants.

Residual reports decompose ``exact log det - prediction`` per scale u with the
lattice sizes ``n_i = round(a_i u)`` (Python's round-half-to-even).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special as sp

from .coeffs import (CoeffTable, L_massive, build_coeff_table, corner_constant,
                     free_corner_constant)
from .continuum import BoxSpec, zeta_decomposition_box, zeta_decomposition_massive_torus
from .errors import TooLarge, ZeroMass
from .quadrature import QuadratureConfig, exponential_cutoff, geometric_breakpoints, integrate
from .special import heat_kernel_power_tail, log_heat_kernel_1d
from .spectra import (BoundaryCondition, LatticeSpec, logdet_exact, product_spectrum,
                      volume_vectors)
from .summation import ordered_map

MAX_THETA_POINTS = 10**6


def sizes_for_scale(sides: Sequence[float], u: float) -> tuple[int, ...]:
    sizes = tuple(int(round(a * u)) for a in sides)
    if any(n < 1 for n in sizes):
        raise ValueError(f"scale u={u} gives an empty axis for sides {tuple(sides)}")
    return sizes


# ---------------------------------------------------------------- heat traces


def discrete_theta_relation_check(sizes: Sequence[int], t: float) -> tuple[float, float]:
    """Dirichlet lattice heat trace, directly and via doubled periodic lattices.

    ``rhs = 2^-d sum_S (-1 - e^{-4t})^(d-|S|) Theta_torus(2 n_S)(t)``.
    """
    sizes = tuple(int(n) for n in sizes)
    d = len(sizes)
    if d > 4 or math.prod(sizes) > MAX_THETA_POINTS:
        raise TooLarge("exact heat-trace check limited to d <= 4 and prod(n) <= 10^6")
    lhs = product_spectrum(LatticeSpec(sizes, BoundaryCondition.DIRICHLET)).theta(t)
    w = -1.0 - math.exp(-4.0 * t)
    terms = []
    for p in range(d + 1):
        for subset in combinations(range(d), p):
            if p:
                torus = LatticeSpec(tuple(2 * sizes[i] for i in subset), BoundaryCondition.PERIODIC)
                th = product_spectrum(torus).theta(t)
            else:
                th = 1.0
            terms.append(w ** (d - p) * th)
    return lhs, math.fsum(terms) / 2**d


def _heat_kernel(t: np.ndarray) -> np.ndarray:
    return np.exp(log_heat_kernel_1d(t))


def _axis_defect(n: int, t: np.ndarray) -> np.ndarray:
    """``Theta_path(n) - n B - w`` via ``2n sum_{k>=1} e^{-2t} I_{2kn}(2t)``."""
    x = 2.0 * t
    out = np.zeros_like(t)
    k = 1
    while True:
        term = sp.ive(2 * k * n, x)
        out = out + term
        if np.all(term <= 1e-18 * np.maximum(out, 1e-300)) or k > 10000:
            break
        k += 1
    return 2.0 * n * out


def dirichlet_theta_defect(sizes: Sequence[int], t) -> np.ndarray:
    """``Theta(t) - g(t) - (-1)^d e^{-t}`` for the Dirichlet lattice, evaluated without cancellation.

    ``g(t) = sum_i V_i (-1 - e^{-4t})^(d-i) B(t)^i`` is the part of the trace
    that the bulk/boundary coefficients account for.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    sizes = [int(n) for n in sizes]
    d = len(sizes)
    B = _heat_kernel(t)
    w = -0.5 * (1.0 + np.exp(-4.0 * t))
    main = [n * B + w for n in sizes]
    eps = [_axis_defect(n, t) for n in sizes]
    total = np.zeros_like(t)
    for p in range(1, d + 1):
        for subset in combinations(range(d), p):
            term = np.ones_like(t)
            for i in range(d):
                term = term * (eps[i] if i in subset else main[i])
            total = total + term
    corner = np.expm1(d * np.log1p(0.5 * np.expm1(-4.0 * t))) - np.expm1(-t)
    return total + (-1) ** d * corner


def _dirichlet_defect_direct(sizes: Sequence[int], t: np.ndarray) -> np.ndarray:
    d = len(sizes)
    vals, mult = product_spectrum(LatticeSpec(tuple(sizes), BoundaryCondition.DIRICHLET)).to_arrays()
    theta = (mult[None, :] * np.exp(-np.outer(t, vals))).sum(axis=1)
    V = volume_vectors(sizes).as_floats()
    logB = log_heat_kernel_1d(t)
    w = -1.0 - np.exp(-4.0 * t)
    g = sum(V[i] * w ** (d - i) * np.exp(i * logB) for i in range(1, d + 1))
    return theta - g - (-1) ** d * np.exp(-t)


# ---------------------------------------------------------------- H_N(0)


def H_at_zero(spec: LatticeSpec, table: CoeffTable | None = None,
              quad: QuadratureConfig | None = None) -> tuple[float, float]:
    """Remainder of ``log det`` after the bulk/boundary terms, two ways.

    ``algebraic = log det - sum_i V_i L_i(0)``;
    ``integral = -int_0^inf (Theta - g - (-1)^d e^{-t}) dt/t``.
    """
    if spec.bc is not BoundaryCondition.DIRICHLET or spec.mass_squared or spec.rescale:
        raise ValueError("H_N(0) is defined for the massless unscaled Dirichlet lattice")
    quad = quad or QuadratureConfig()
    d, sizes = spec.d, spec.sizes
    table = table or build_coeff_table(d, quad)
    if table.d != d:
        raise ValueError("coefficient table dimension does not match the lattice")
    V = volume_vectors(sizes).as_floats()
    algebraic = logdet_exact(spec) - math.fsum(V[i] * table[i] for i in range(1, d + 1))

    count = math.prod(n - 1 for n in sizes)
    split = quad.split_point
    small, err_small = integrate(lambda t: dirichlet_theta_defect(sizes, t) / t,
                                 geometric_breakpoints(0.0, split), quad)
    if count:
        lam_min = sum(4.0 * math.sin(math.pi / (2.0 * n)) ** 2 for n in sizes if n > 1)
        T = exponential_cutoff(lam_min, float(count), 1e-3 * quad.abs_tol, quad.tail_start)
    else:
        T = quad.tail_start
    large, err_large = integrate(lambda t: _dirichlet_defect_direct(sizes, t) / t,
                                 geometric_breakpoints(split, T), quad)
    tail_parts = [-(-1) ** d * float(sp.exp1(T))]
    for p in range(1, d + 1):
        tail_parts.append(-V[p] * (-1) ** (d - p) * heat_kernel_power_tail(p, T)[0])
    integral = -(small + large + math.fsum(tail_parts))
    return algebraic, integral


# ---------------------------------------------------------------- expansion reports


@dataclass(frozen=True)
class ExpansionRecord:
    u: float
    sizes: tuple
    exact_logdet: float
    terms: dict
    predicted: float
    residual: float

    @classmethod
    def build(cls, u, sizes, exact, terms: dict) -> "ExpansionRecord":
        predicted = math.fsum(terms.values())
        return cls(float(u), tuple(sizes), exact, dict(terms), predicted, exact - predicted)

    def recomputed_residual(self) -> float:
        return self.exact_logdet - math.fsum(self.terms.values())

    def as_dict(self) -> dict:
        return {"u": self.u, "sizes": list(self.sizes), "exact_logdet": self.exact_logdet,
                "terms": dict(self.terms), "predicted": self.predicted, "residual": self.residual}


@dataclass(frozen=True)
class ExpansionReport:
    geometry: str
    sides: tuple
    mass: float
    fingerprint: str
    records: tuple
    summary: dict = field(default_factory=dict)

    @property
    def residuals(self) -> list[float]:
        return [r.residual for r in self.records]

    @property
    def increments(self) -> list[float]:
        res = self.residuals
        return [abs(b - a) for a, b in zip(res, res[1:])]

    def cauchy_decreasing(self) -> bool:
        inc = self.increments
        return len(inc) >= 1 and all(b < a for a, b in zip(inc, inc[1:]))

    def as_dict(self) -> dict:
        return {"geometry": self.geometry, "sides": list(self.sides), "mass": self.mass,
                "coefficient_fingerprint": self.fingerprint,
                "records": [r.as_dict() for r in self.records], "summary": dict(self.summary)}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["u", "logdet", "predicted", "residual"])
        for r in self.records:
            writer.writerow([format(x, ".17g") for x in (r.u, r.exact_logdet, r.predicted, r.residual)])
        return buf.getvalue()


def richardson_limit(us: Sequence[float], values: Sequence[float]) -> float:
    """Extrapolate a sequence converging like ``c u^-p`` using its last three points.

    Falls back to the last value when the observed order is not usable.
    """
    if len(values) < 3:
        return float(values[-1])
    (u0, u1, u2), (v0, v1, v2) = us[-3:], values[-3:]
    d1, d2 = v1 - v0, v2 - v1
    if d1 == 0 or d2 == 0 or d1 * d2 < 0 or abs(d2) >= abs(d1):
        return float(v2)
    r1, r2 = u1 / u0, u2 / u1
    if not math.isclose(r1, r2, rel_tol=1e-9):
        return float(v2)
    factor = (abs(d1) / abs(d2))
    return float(v2 + d2 / (factor - 1.0))


def hypercube_expansion_report(box: BoxSpec, u_grid: Sequence[float], table: CoeffTable | None = None,
                               quad: QuadratureConfig | None = None,
                               workers: int | None = None) -> ExpansionReport:
    """Residuals of the Dirichlet lattice expansion

    ``log det = sum_i V_i L_i(0) - (-1)^d 2^-d log u^2 + log det_zeta + corner_constant(d) + o(1)``.
    """
    if box.mass:
        raise ValueError("the hypercube expansion is massless")
    quad = quad or QuadratureConfig()
    d = box.d
    table = table or build_coeff_table(d, quad)
    zeta_logdet = zeta_decomposition_box(box, quad).log_det
    corner = corner_constant(d)

    def point(k: int) -> ExpansionRecord:
        u = float(u_grid[k])
        sizes = sizes_for_scale(box.sides, u)
        V = volume_vectors(sizes).as_floats()
        exact = logdet_exact(LatticeSpec(sizes, BoundaryCondition.DIRICHLET))
        terms = {
            "bulk_boundary": math.fsum(V[i] * table[i] for i in range(1, d + 1)),
            "log_u": -(-1) ** d / 2**d * math.log(u * u),
            "zeta": zeta_logdet,
            "corner": corner,
        }
        return ExpansionRecord.build(u, sizes, exact, terms)

    records = tuple(ordered_map(point, len(u_grid), workers))
    us = [r.u for r in records]
    limit = richardson_limit(us, [r.residual for r in records])
    summary = {"log_det_zeta": zeta_logdet, "corner_constant": corner,
               "residual_limit_estimate": limit, "estimated_constant": corner + limit}
    if d == 2:
        # two published values for the d = 2 constant; report the distance to each
        candidates = {"binomial_corner_sum": corner, "quarter_log2": -0.25 * math.log(2.0)}
        summary["constant_candidates"] = candidates
        summary["distance_to_candidates"] = {k: corner + limit - v for k, v in candidates.items()}
    return ExpansionReport("hypercube", box.sides, 0.0, table.fingerprint, records, summary)


def massive_torus_report(box: BoxSpec, u_grid: Sequence[float], quad: QuadratureConfig | None = None,
                         workers: int | None = None) -> ExpansionReport:
    """Massive periodic lattices with lattice mass ``m / u``.

    Per u, the remainder ``H = log det - (prod n_i) L_massive(d, m/u)`` is compared with
    its continuum limit ``log det_zeta(Delta + m^2) + gamma_term``; the residual is the
    difference and should converge to 0.
    """
    if not box.mass > 0:
        raise ZeroMass("massive torus report needs m > 0")
    quad = quad or QuadratureConfig()
    d = box.d
    dec = zeta_decomposition_massive_torus(box, quad)
    gamma = dec.terms["gamma_term"]
    target = dec.log_det + gamma

    def point(k: int) -> ExpansionRecord:
        u = float(u_grid[k])
        sizes = sizes_for_scale(box.sides, u)
        mt = box.mass / u
        exact = logdet_exact(LatticeSpec(sizes, BoundaryCondition.PERIODIC, mass_squared=mt * mt))
        terms = {"volume": math.prod(sizes) * L_massive(d, mt, quad), "zeta": dec.log_det,
                 "gamma_term": gamma}
        return ExpansionRecord.build(u, sizes, exact, terms)

    records = tuple(ordered_map(point, len(u_grid), workers))
    us = [r.u for r in records]
    summary = {"log_det_zeta": dec.log_det, "gamma_term": gamma, "H_limit": target,
               "H_values": [r.exact_logdet - r.terms["volume"] for r in records],
               "residual_limit_estimate": richardson_limit(us, [r.residual for r in records])}
    return ExpansionReport("torus", box.sides, box.mass, "massive", records, summary)


# ---------------------------------------------------------------- finite parts


def reg_integral_partie_finie(d: int, lam: float) -> float:
    """Hadamard finite part of ``-2 int_0^inf z^(2d-1) / (z^2 + lam)^d dz``.

    With ``w = z^2 + lam`` the integrand becomes ``-(w - lam)^(d-1) w^-d dw``;
    expanding the binomial, the ``w^-1`` piece gives ``log lam`` minus a pure
    ``log R`` divergence, and each ``w^(-1-k)`` piece (k >= 1) gives
    ``-C(d-1, k) (-1)^k / k`` plus terms vanishing as R grows.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    parts = [math.log(lam)]
    for k in range(1, d):
        parts.append(-math.comb(d - 1, k) * (-1) ** k / k)
    return math.fsum(parts)


def h_minus_2d(d: int, z: float, n: int, bc) -> float:
    """Leading ``z^-2d``-order term of the Euler-Maclaurin expansion in closed form.

    Free: ``2^-d sum_k C(d,k) (z^2 + 4 k n^2)^-d``.
    Dirichlet: ``2^-d sum_j (-1)^j C(d,j) (z^2 + 4 n^2 j)^-d``.
    """
    bc = BoundaryCondition.parse(bc)
    if bc is BoundaryCondition.PERIODIC:
        raise ValueError("closed form is for free and Dirichlet boundaries")
    sign = -1 if bc is BoundaryCondition.DIRICHLET else 1
    terms = []
    for k in range(d + 1):
        base = z * z + 4.0 * k * n * n
        if base <= 0:
            raise ValueError("z^2 + shift must be positive")
        terms.append(sign**k * math.comb(d, k) * base ** (-d))
    return math.fsum(terms) / 2**d


def corner_constant_termwise(d: int) -> float:
    """``-2 fp int z^(2d-1) h_{-2d}(z, 1) dz`` over the j >= 1 terms, each by its finite part."""
    return math.fsum((-1) ** j * math.comb(d, j) * reg_integral_partie_finie(d, 4.0 * j)
                     for j in range(1, d + 1)) / 2**d


def corner_constant_resummed(d: int) -> float:
    """``sum_k (-1)^(d-k) C(d,k) c_free(k)``: Dirichlet corner constant from free ones."""
    return math.fsum((-1) ** (d - k) * math.comb(d, k) * free_corner_constant(k) for k in range(1, d + 1))


# ---------------------------------------------------------------- exact 2-d identities


class Ratio2D(NamedTuple):
    lhs: float
    rhs_paper: float
    rhs_corrected: float


def _log_axis_factor(n: int, shift: float) -> float:
    q = np.arange(1, n)
    return float(np.log(shift + 4.0 * np.sin(np.pi * q / (2.0 * n)) ** 2).sum())


def ratio_2d(n1: int, n2: int, m2: float) -> Ratio2D:
    """Massive torus ``(2n1, 2n2)`` determinant over the fourth power of the Dirichlet ``(n1, n2)`` one.

    ``lhs`` comes from both spectra by brute force. ``rhs_paper`` is the product
    ``(8+m^2)(4+m^2)^2 prod (6+m^2-2cos)^2 (2+m^2-2cos)^2`` over both axes;
    ``rhs_corrected`` multiplies it by the zero-momentum eigenvalue m^2.
    """
    if not m2 > 0:
        raise ZeroMass("the torus determinant vanishes without mass")
    n1, n2 = int(n1), int(n2)
    if n1 < 1 or n2 < 1:
        raise ValueError("sizes must be positive")
    log_torus = logdet_exact(LatticeSpec((2 * n1, 2 * n2), BoundaryCondition.PERIODIC, mass_squared=m2))
    log_dir = logdet_exact(LatticeSpec((n1, n2), BoundaryCondition.DIRICHLET, mass_squared=m2))
    lhs = math.exp(log_torus - 4.0 * log_dir)
    log_products = 2.0 * sum(_log_axis_factor(n, 4.0 + m2) + _log_axis_factor(n, m2) for n in (n1, n2))
    printed = (8.0 + m2) * (4.0 + m2) ** 2 * math.exp(log_products)
    return Ratio2D(lhs, printed, m2 * printed)


class ChebyshevProducts(NamedTuple):
    product_full_cycle: float
    rhs_closed_form: float
    product_half_index: float


def chebyshev_product(n: int, x: float) -> ChebyshevProducts:
    """Cycle product ``prod_{k<n} (2x - 2cos(2 pi k/n))``, its closed form, and the half-index product."""
    if n < 1:
        raise ValueError("n must be positive")
    if x < 1:
        raise ValueError("x must be >= 1")
    k = np.arange(n)
    full = float(np.prod(2.0 * (x - 1.0) + 4.0 * np.sin(np.pi * k / n) ** 2))
    k = np.arange(1, n)
    half = float(np.prod(2.0 * (x - 1.0) + 4.0 * np.sin(np.pi * k / (2.0 * n)) ** 2))
    s = math.sqrt(x * x - 1.0)
    closed = (x + s) ** n + (x - s) ** n - 2.0
    return ChebyshevProducts(full, closed, half)


def chebyshev_u(n: int, x: float) -> float:
    """``((x+s)^n - (x-s)^n) / (2s)`` with ``s = sqrt(x^2 - 1)``; equals n at x = 1."""
    s = math.sqrt(x * x - 1.0)
    if s == 0.0:
        return float(n)
    return ((x + s) ** n - (x - s) ** n) / (2.0 * s)
