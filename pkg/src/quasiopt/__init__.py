"""Heuristic regularization-parameter choice for linear ill-posed problems.

Problems are given by their singular system.  The package provides spectral
filters, the quasi-optimality functionals ``psi`` and ``psi_kappa``, discrete
parameter-choice rules, aggregation of grid approximants, noise-condition
diagnostics and a reproducible experiment harness.
"""

from .aggregation import (AggregationResult, active_indices, aggregate, build_gram,
                          estimate_p, oracle_aggregate, solve_coefficients)
from .errors import *  # noqa: F401,F403
from .noise import (Distribution, NoiseConditionReport, NoiseSpec, Verdict,
                    condition_ratios, generate_noise, make_rng,
                    stochastic_sup_ratio_study, sufficient_condition_verdict)
from .regularization import (RegularizedSolution, Source, error_norm, filtered_coeffs,
                             functional_value, mollified_norm, regularize)
from .rules import (ParameterGrid, RuleSelection, correction_factors, geometric_alphas,
                    grid_argmin_psi, iterated_qo_select, lfs_select, psi, psi_kappa,
                    psi_values, qo_select)
from .spectral import (FilterFamily, IndexFunction, SpectralProblem,
                       check_filter_assumptions, diagonal_geometric_spectrum,
                       eigenvalues, filter_eval, make_problem, mild_spectrum,
                       residual_eval, severe_spectrum, theta_inverse)

__version__ = "0.1.0"
