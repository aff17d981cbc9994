"""Exact lattice Laplacian determinants, continuum zeta determinants, and checks between them."""

from __future__ import annotations

__version__ = "0.1.0"

from .coeffs import (CoeffTable, L_coeff, L_massive, L_massive_taylor, bessel_i0_scaled,
                     build_coeff_table, catalan_constant, corner_constant, free_corner_constant)
from .continuum import (BoxSpec, ThetaValue, counterterm_f, gamma_term_massive, theta_hypercube,
                        theta_torus, zeta_prime_zero_box, zeta_prime_zero_massive_torus)
from .errors import *  # noqa: F401,F403
from .quadrature import QuadratureConfig
from .reglimit import FitModel, RegularizedLimit, reg_limit_fit
from .spectra import (BoundaryCondition, LatticeSpec, Spectrum, VolumeVector, axis_eigenvalues,
                      dirichlet_free_logdet_relation, logdet_exact, product_spectrum, volume_vectors)
from .verify import (ExpansionReport, H_at_zero, chebyshev_product, discrete_theta_relation_check,
                     h_minus_2d, hypercube_expansion_report, massive_torus_report, ratio_2d,
                     reg_integral_partie_finie)
