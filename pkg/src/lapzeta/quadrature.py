"""Vectorized adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

Semi-infinite integrals are handled by the callers: they integrate
numerically up to a cutoff and add an analytic tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureFailure

# Kronrod abscissae on [-1, 1] (non-negative half); odd positions are Gauss nodes.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])  # 15 points, ascending
_KWEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[[13, 11, 9]] = _WG[:3]
_GWEIGHTS[7] = _WG[3]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and cutoffs shared by all semi-infinite integrals.

    ``tail_start`` is where numerical integration stops and an analytic tail
    (leading asymptotic terms of the integrand) takes over.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    split_point: float = 1.0
    tail_start: float = 40.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if not self.split_point > 0:
            raise ValueError("split_point must be positive")
        if not self.tail_start > self.split_point:
            raise ValueError("tail_start must exceed split_point")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")

    def tighter(self, factor: float = 10.0) -> "QuadratureConfig":
        return QuadratureConfig(self.abs_tol / factor, self.rel_tol / factor,
                                self.split_point, self.tail_start, self.max_subdivisions)


def _gk15(f, a: np.ndarray, b: np.ndarray):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    t = center[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(t.ravel()), dtype=float).reshape(t.shape)
    if not np.all(np.isfinite(y)):
        raise QuadratureFailure("integrand returned non-finite values")
    k = half * (y @ _KWEIGHTS)
    g = half * (y @ _GWEIGHTS)
    absk = np.abs(half) * (np.abs(y) @ _KWEIGHTS)
    floor = 50.0 * _EPS * absk
    return k, np.maximum(np.abs(k - g), floor), floor


def integrate(f: Callable[[np.ndarray], np.ndarray], breakpoints: Sequence[float],
              config: QuadratureConfig | None = None) -> tuple[float, float]:
    """Integrate a vectorized ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    Returns ``(value, error_estimate)``. Panels whose Kronrod/Gauss discrepancy
    exceeds their share of the tolerance are bisected until the summed
    estimate meets ``max(abs_tol, rel_tol * |value|)`` or every panel is limited
    by rounding.
    """
    cfg = config or QuadratureConfig()
    pts = np.asarray(breakpoints, dtype=float)
    if pts.ndim != 1 or pts.size < 2 or np.any(np.diff(pts) <= 0):
        raise ValueError("breakpoints must be strictly increasing with at least two entries")
    a, b = pts[:-1].copy(), pts[1:].copy()
    vals, errs, floors = _gk15(f, a, b)
    while True:
        total = math.fsum(vals)
        total_err = math.fsum(errs)
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if total_err <= tol:
            return total, total_err
        if a.size >= cfg.max_subdivisions:
            raise QuadratureFailure(
                f"tolerance {tol:.3g} not met with {a.size} panels (estimate {total_err:.3g})")
        # panels already at their rounding floor cannot improve by bisection
        refinable = errs > floors
        if not np.any(refinable):
            return total, total_err
        share = tol / a.size
        split = (errs > share) & refinable
        if not np.any(split):
            split = refinable & (errs == errs[refinable].max())
        room = cfg.max_subdivisions - a.size
        idx = np.flatnonzero(split)
        if idx.size > room:
            idx = idx[np.argsort(errs[idx])[::-1][:room]]
        keep = np.ones(a.size, dtype=bool)
        keep[idx] = False
        mid = 0.5 * (a[idx] + b[idx])
        na = np.concatenate([a[idx], mid])
        nb = np.concatenate([mid, b[idx]])
        nv, ne, nf = _gk15(f, na, nb)
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        floors = np.concatenate([floors[keep], nf])
        order = np.argsort(a, kind="stable")
        a, b, vals, errs, floors = a[order], b[order], vals[order], errs[order], floors[order]


def geometric_breakpoints(lo: float, hi: float, first: float | None = None) -> list[float]:
    """Breakpoints on ``[lo, hi]`` doubling from ``first`` (default: a small step above lo).

    With ``lo == 0`` the panels grow geometrically away from the origin; otherwise
    they double from ``lo``.
    """
    if hi <= lo:
        raise ValueError("need hi > lo")
    pts = [lo]
    if lo == 0.0:
        x = first if first is not None else min(hi, 1.0) / 64.0
    else:
        x = 2.0 * lo
    while x < hi:
        pts.append(x)
        x *= 2.0
    pts.append(hi)
    return pts


def exponential_cutoff(rate: float, prefactor: float, tol: float, start: float = 1.0) -> float:
    """Smallest ``T >= start`` (on a 1.25x ladder) with ``prefactor * exp(-rate T) / (rate T) < tol``.

    That quantity bounds ``int_T^inf prefactor * exp(-rate t) dt / t``.
    """
    if not (rate > 0 and tol > 0):
        raise ValueError("rate and tol must be positive")
    T = max(start, 1e-3)
    while prefactor * math.exp(-rate * T) / (rate * T) > tol:
        T *= 1.25
    return T
