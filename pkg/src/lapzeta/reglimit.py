"""Regularized limits by least-squares fitting of ``sum a_{alpha,k} n^alpha log^k n``.

The regularized limit of a sequence with such an expansion is its
``(alpha=0, k=0)`` coefficient. :class:`RegularizedLimit` follows the
scikit-learn estimator protocol: ``X`` is a column of sizes n, ``y`` the
sampled values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .coeffs import corner_constant
from .errors import IllConditioned, InsufficientSamples
from .spectra import BoundaryCondition, LatticeSpec, logdet_exact

CONDITION_LIMIT = 1e12

Basis = list[tuple[float, int]]


def default_basis(d: int, extra_negative: int = 0) -> Basis:
    """``{n^d..n} + {n^k log n : k = 0..d} + {1}``, optionally with ``n^-1..n^-extra``."""
    if d < 1:
        raise ValueError("d must be positive")
    basis: Basis = [(float(a), 0) for a in range(d, 0, -1)]
    basis += [(float(k), 1) for k in range(d + 1)]
    basis.append((0.0, 0))
    basis += [(-float(j), 0) for j in range(1, extra_negative + 1)]
    return basis


def _validate_basis(basis) -> Basis:
    out = [(float(a), int(k)) for a, k in basis]
    if len(set(out)) != len(out):
        raise ValueError("basis elements must be distinct")
    if any(k < 0 for _, k in out):
        raise ValueError("log powers must be nonnegative")
    if (0.0, 0) not in out:
        raise ValueError("basis must contain the constant term (0, 0)")
    return out


def design_matrix(n: np.ndarray, basis: Basis) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    logn = np.log(n)
    return np.column_stack([n**a * logn**k for a, k in basis])


class RegularizedLimit(BaseEstimator, RegressorMixin):
    """Least-squares fit of a polyhomogeneous expansion in n.

    Parameters
    ----------
    basis : list of (alpha, k) or None
        Exponent/log-power pairs. ``None`` means :func:`default_basis` of ``d``.
    d : int
        Dimension used for the default basis.
    condition_limit : float
        Largest accepted condition number of the column-scaled design matrix.
    """

    def __init__(self, basis=None, d: int = 1, condition_limit: float = CONDITION_LIMIT):
        self.basis = basis
        self.d = d
        self.condition_limit = condition_limit

    def _basis(self) -> Basis:
        return _validate_basis(default_basis(self.d) if self.basis is None else self.basis)

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=1, y_numeric=True)
        basis = self._basis()
        if X.shape[0] < 2 * len(basis):
            raise InsufficientSamples(
                f"{X.shape[0]} samples for {len(basis)} basis functions; need at least {2 * len(basis)}")
        A = design_matrix(X[:, 0], basis)
        norms = np.linalg.norm(A, axis=0)
        As = A / norms
        cond = float(np.linalg.cond(As))
        if not cond <= self.condition_limit:
            raise IllConditioned(f"design condition number {cond:.3g} exceeds {self.condition_limit:.3g}")
        sol, *_ = np.linalg.lstsq(As, y, rcond=None)
        self.basis_ = basis
        self.coef_ = sol / norms
        self.condition_ = cond
        self.residual_norm_ = float(np.linalg.norm(As @ sol - y))
        self.a00_ = float(self.coef_[basis.index((0.0, 0))])
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return design_matrix(X[:, 0], self.basis_) @ self.coef_

    def to_model(self) -> "FitModel":
        check_is_fitted(self, "coef_")
        return FitModel(tuple(self.basis_), tuple(float(c) for c in self.coef_), self.a00_,
                        self.condition_, self.residual_norm_)


@dataclass(frozen=True)
class FitModel:
    basis: tuple
    coefficients: tuple
    a00: float
    fit_condition: float
    fit_residual_norm: float

    def as_dict(self) -> dict:
        return {
            "basis": [[a, k] for a, k in self.basis],
            "coefficients": list(self.coefficients),
            "a00": self.a00,
            "fit_condition": self.fit_condition,
            "fit_residual_norm": self.fit_residual_norm,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def reg_limit_fit(samples: Sequence[tuple[float, float]], basis=None, d: int = 1) -> FitModel:
    """Fit ``value(n)`` over ``samples = [(n, value), ...]`` and return the model with ``a00``."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be (n, value) pairs")
    return RegularizedLimit(basis=basis, d=d).fit(arr[:, :1], arr[:, 1]).to_model()


def quarter_octave_grid(start: int, stop: int) -> list[int]:
    """Distinct integers ``round(start * 2^(k/4))`` up to ``stop``."""
    out: list[int] = []
    k = 0
    while True:
        n = int(round(start * 2.0 ** (k / 4.0)))
        if n > stop:
            return out
        if not out or n != out[-1]:
            out.append(n)
        k += 1


def cube_scaled_logdet(d: int, n: int, workers: int | None = None) -> float:
    """``log det(n^2 Delta)`` for the Dirichlet cube of side n in d dimensions."""
    ld = logdet_exact(LatticeSpec((n,) * d, BoundaryCondition.DIRICHLET), workers=workers)
    return ld + (n - 1) ** d * math.log(float(n) ** 2)


@dataclass(frozen=True)
class CubeLimitResult:
    d: int
    grid: tuple
    model: FitModel
    log_det_zeta: float

    def as_dict(self) -> dict:
        return {"d": self.d, "grid": list(self.grid), "fit": self.model.as_dict(),
                "corner_constant": corner_constant(self.d), "log_det_zeta": self.log_det_zeta}


def cube_regularized_limit(d: int, grid: Sequence[int], basis=None,
                           workers: int | None = None) -> CubeLimitResult:
    """Regularized limit of ``log det(n^2 Delta)`` on the unit d-cube.

    The scaled lattice determinant has regularized limit
    ``log det_zeta + corner_constant(d)``, so the zeta determinant is
    ``a00 - corner_constant(d)``.
    """
    samples = [(n, cube_scaled_logdet(d, n, workers)) for n in grid]
    model = reg_limit_fit(samples, basis=basis, d=d)
    return CubeLimitResult(d, tuple(int(n) for n in grid), model, model.a00 - corner_constant(d))
