"""Numerical companion for fully nonlinear elliptic maximum principles.

Elementary symmetric functions and Garding cones, the dual function
rho*_k, grid envelopes and contact sets, and a manufactured-solution
harness for Alexandrov-Bakelman-Pucci type estimates.
"""
from .abp import (
    EstimateReport,
    ManufacturedProblem,
    apply_operator,
    estimate_report,
    gronwall_factor,
    gronwall_recurrence_check,
    sample_operator_field,
    weighted_lq_norm,
)
from .dual_cone import (
    DualEvalResult,
    Status,
    dual_membership,
    is_dual_interior,
    rho_star,
    rho_star_values,
    upper_bound_1_7,
)
from .ellipticity import chi, ellipticity_profile, rho_star_lower_bound
from .envelope import (
    ContactSetResult,
    gradient_estimate_check,
    k_convexity_test,
    upper_k_envelope,
)
from .grid import GridDomain, GridFunction, SymmetricMatrixField, ball_domain, box_domain, unit_square
from .spectral import eigen_decompose, eigenvalues
from .sym_poly import ConeLabel, Membership, elementary_symmetric, gamma_k_membership, rho_k

__version__ = "0.1.0"
