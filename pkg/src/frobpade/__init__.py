"""Frobenius-Pade approximants of Markov functions and their spectral curves.

The package computes Frobenius-Pade approximants of Cauchy transforms with
respect to an orthonormal polynomial system, solves the cubic algebraic
curve governing their asymptotics, extracts the associated vector
equilibrium measures and compares the two in numerical experiments.
"""
__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, DomainError, FrobPadeError, NumericalError
from .orthoexp import MeasureSpec, Weight, cauchy_transform, gauss_rule, recurrence_coeffs
from .approximant import (Approximant, FrobeniusIndex, MarkovTarget, PoleTarget, PolyTarget,
                          build_frobenius_matrix, eval_C, eval_linear_form, eval_P, eval_Q,
                          solve_frobenius, zeros_of_Q)
from .spectral_curve import (CubicCurve, CurveCase, b_sigma_c_degenerate, branches_at,
                             solve_curve, trace_divergence_boundary)
from .equilibrium import (EquilibriumData, Region, classify_point, densities_from_curve,
                          equilibrium, equilibrium_oracle, log_phi_modulus)
from .harness import (RaySpec, convergence_rate_experiment, solve_ray,
                      szego_stabilization_experiment, zero_distribution_experiment)
from .config import RunConfig

__all__ = [
    "Approximant", "ConfigError", "ConvergenceError", "CubicCurve", "CurveCase", "DomainError",
    "EquilibriumData", "FrobPadeError", "FrobeniusIndex", "MarkovTarget", "MeasureSpec",
    "NumericalError", "PoleTarget", "PolyTarget", "RaySpec", "Region", "RunConfig", "Weight",
    "b_sigma_c_degenerate", "branches_at", "build_frobenius_matrix", "cauchy_transform",
    "classify_point", "convergence_rate_experiment", "densities_from_curve", "equilibrium",
    "equilibrium_oracle", "eval_C", "eval_P", "eval_Q", "eval_linear_form", "gauss_rule",
    "log_phi_modulus", "recurrence_coeffs", "solve_curve", "solve_frobenius", "solve_ray",
    "szego_stabilization_experiment", "trace_divergence_boundary", "zero_distribution_experiment",
    "zeros_of_Q",
]
