"""Regularized solutions and the norms used to judge them."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NonPositiveAlpha
from .spectral import FilterFamily, IndexFunction, SpectralProblem, eigenvalues

__all__ = [
    "Source",
    "RegularizedSolution",
    "filtered_coeffs",
    "regularize",
    "error_norm",
    "functional_value",
    "mollified_norm",
]


class Source(str, enum.Enum):
    CLEAN = "clean"
    NOISY = "noisy"
    NOISE = "noise"  # y_noisy - y_clean, used by the propagation bounds


@dataclass(frozen=True, eq=False)
class RegularizedSolution:
    """Coefficients of ``x_alpha = g_alpha(T*T) T* y`` in the right singular basis."""

    alpha: float
    coeffs: np.ndarray
    source: Source

    def __len__(self):
        return self.coeffs.size


def filtered_coeffs(singular_values, data, filt: FilterFamily, alphas):
    """``g_alpha(lambda_k**2) * lambda_k * data_k`` for one alpha or an array of them.

    With an array of ``M`` alphas the result has shape ``(M, n)``.
    """
    lam = np.asarray(singular_values, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    if np.any(alphas <= 0):
        raise NonPositiveAlpha("alpha must be > 0")
    data = np.asarray(data, dtype=np.float64)
    if data.shape != lam.shape:
        raise LengthMismatch(f"data has shape {data.shape}, expected {lam.shape}")
    if alphas.ndim == 0:
        return filt(alphas, eigenvalues(lam)) * lam * data
    return filt(alphas[:, None], eigenvalues(lam)[None, :]) * (lam * data)[None, :]


def regularize(problem: SpectralProblem, filt: FilterFamily, alpha: float,
               source=Source.NOISY) -> RegularizedSolution:
    source = Source(source)
    if not alpha > 0:
        raise NonPositiveAlpha("alpha must be > 0")
    coeffs = filtered_coeffs(problem.singular_values, problem.data(source), filt, alpha)
    coeffs.setflags(write=False)
    return RegularizedSolution(float(alpha), coeffs, source)


def _coeffs(obj):
    return obj.coeffs if isinstance(obj, RegularizedSolution) else np.asarray(obj, float)


def error_norm(problem: SpectralProblem, sol) -> float:
    """Euclidean distance between ``x_true`` and the solution coefficients."""
    c = _coeffs(sol)
    if c.shape != problem.x_true.shape:
        raise LengthMismatch(f"solution has length {c.size}, expected {problem.n}")
    return float(np.linalg.norm(problem.x_true - c))


def functional_value(f_coeffs, sol) -> float:
    f = np.asarray(f_coeffs, dtype=np.float64)
    c = _coeffs(sol)
    if f.shape != c.shape:
        raise LengthMismatch(f"functional has length {f.size}, solution {c.size}")
    return float(f @ c)


def mollified_norm(kappa: IndexFunction, problem: SpectralProblem, sol_a, sol_b) -> float:
    """``||kappa(T*T)(a - b)||``.

    Raises LogDomainError if ``kappa`` is logarithmic and the spectrum reaches
    past ``1/e``.
    """
    a, b = _coeffs(sol_a), _coeffs(sol_b)
    if a.shape != b.shape or a.shape != problem.singular_values.shape:
        raise LengthMismatch("solutions and problem dimensions differ")
    weights = kappa(eigenvalues(problem.singular_values))
    return float(np.linalg.norm(weights * (a - b)))
