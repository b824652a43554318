"""Quasi-optimality functionals and the discrete parameter-choice rules.

Grid positions are 0-based throughout: ``grid.alphas[0]`` is the largest
parameter.  Selections from consecutive differences therefore choose an index
in ``1..M-1``; ``criterion_values[0]`` is ``nan`` so that
``criterion_values[chosen_index]`` is the minimum.  Ties go to the smallest
index, i.e. the more strongly regularized candidate.  Values within the
rounding floor of the differenced quantity (a few ulps of the largest
approximant) count as ties, so exact ties are not decided by rounding noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyGrid, GridTooSmall, LengthMismatch, NonPositiveAlpha, \
    ZeroNormApproximant
from .regularization import RegularizedSolution, Source, filtered_coeffs
from .spectral import FilterFamily, IndexFunction, SpectralProblem, eigenvalues

__all__ = [
    "ParameterGrid",
    "RuleSelection",
    "geometric_alphas",
    "psi_values",
    "psi",
    "psi_kappa",
    "grid_argmin_psi",
    "qo_select",
    "lfs_select",
    "correction_factors",
    "iterated_qo_select",
]


def geometric_alphas(alpha1: float, q: float, M: int) -> np.ndarray:
    """``alpha_j = alpha1 * q**j`` for ``j = 0..M-1``."""
    if not alpha1 > 0:
        raise NonPositiveAlpha("alpha1 must be > 0")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if M < 1:
        raise EmptyGrid("M must be >= 1")
    return alpha1 * q ** np.arange(M, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class ParameterGrid:
    """Geometric parameter grid with one regularized solution per node."""

    alpha1: float
    q: float
    M: int
    alphas: np.ndarray
    matrix: np.ndarray  # (M, n); row j holds the coefficients of x_{alpha_j}

    @classmethod
    def build(cls, problem: SpectralProblem, filt: FilterFamily, alpha1: float,
              q: float, M: int, source=Source.NOISY) -> "ParameterGrid":
        alphas = geometric_alphas(alpha1, q, M)
        matrix = filtered_coeffs(problem.singular_values, problem.data(source),
                                 filt, alphas)
        return cls.from_matrix(alphas, matrix, alpha1=alpha1, q=q)

    @classmethod
    def from_matrix(cls, alphas, matrix, alpha1=None, q=None) -> "ParameterGrid":
        """Wrap precomputed approximants; rows must follow ``alphas``."""
        alphas = np.array(alphas, dtype=np.float64)
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != alphas.size:
            raise LengthMismatch("matrix must have one row per alpha")
        if alphas.size > 1 and np.any(np.diff(alphas) >= 0):
            raise ValueError("alphas must be strictly decreasing")
        if alpha1 is None:
            alpha1 = float(alphas[0])
        if q is None:
            q = float(alphas[1] / alphas[0]) if alphas.size > 1 else float("nan")
        alphas.setflags(write=False)
        matrix.setflags(write=False)
        return cls(float(alpha1), float(q), int(alphas.size), alphas, matrix)

    @property
    def solutions(self) -> tuple:
        return tuple(RegularizedSolution(float(a), row, Source.NOISY)
                     for a, row in zip(self.alphas, self.matrix))

    def index_of(self, alpha: float) -> int:
        hits = np.flatnonzero(np.isclose(self.alphas, alpha, rtol=1e-12, atol=0.0))
        if hits.size == 0:
            raise ValueError(f"alpha={alpha!r} is not a grid node")
        return int(hits[0])


@dataclass(frozen=True, eq=False)
class RuleSelection:
    chosen_index: int
    chosen_alpha: float
    criterion_values: np.ndarray  # length M, nan at position 0


def psi_values(problem: SpectralProblem, filt: FilterFamily, alphas,
               source=Source.NOISY, kappa: Optional[IndexFunction] = None):
    """Vectorized ``psi`` (or ``psi_kappa`` when ``kappa`` is given) over ``alphas``."""
    alphas = np.asarray(alphas, dtype=np.float64)
    if np.any(alphas <= 0):
        raise NonPositiveAlpha("alpha must be > 0")
    lam2 = eigenvalues(problem.singular_values)
    data2 = problem.data(Source(source)) ** 2
    weight = lam2 * data2
    if kappa is not None:
        weight = weight * kappa(lam2) ** 2
    A = alphas.reshape(-1, 1)
    g = filt(A, lam2[None, :])
    r = filt.residual(A, lam2[None, :])
    out = np.sqrt(np.sum((r * g) ** 2 * weight[None, :], axis=1))
    return out.reshape(alphas.shape)


def psi(problem, filt, alpha, source=Source.NOISY) -> float:
    """Quasi-optimality functional ``psi(alpha, data)``."""
    if not alpha > 0:
        raise NonPositiveAlpha("alpha must be > 0")
    return float(psi_values(problem, filt, alpha, source))


def psi_kappa(problem, filt, kappa: IndexFunction, alpha, source=Source.NOISY) -> float:
    """``psi`` with spectral weight ``kappa(lambda)**2``."""
    if not alpha > 0:
        raise NonPositiveAlpha("alpha must be > 0")
    return float(psi_values(problem, filt, alpha, source, kappa=kappa))


def grid_argmin_psi(problem, filt, kappa: Optional[IndexFunction],
                    fine_grid: Sequence[float], source=Source.NOISY):
    """Minimize ``psi`` (or ``psi_kappa``) over a finite grid.

    Returns ``(alpha, value)``; among equal minima the largest alpha wins.
    """
    grid = np.asarray(fine_grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise EmptyGrid("fine_grid is empty")
    values = psi_values(problem, filt, grid, source, kappa=kappa)
    best = values.min()
    tied = np.flatnonzero(values == best)
    j = tied[np.argmax(grid[tied])]
    return float(grid[j]), float(values[j])


def _tie_floor(matrix, f=None):
    """Absolute rounding floor of differences of rows of ``matrix`` (optionally paired with ``f``)."""
    n = matrix.shape[1]
    scale = float(np.max(np.linalg.norm(matrix, axis=1))) if matrix.size else 0.0
    if f is not None:
        scale *= float(np.linalg.norm(f))
    return 4.0 * n * np.finfo(np.float64).eps * scale


def _select(alphas, criterion, stop, floor=0.0):
    M = alphas.size
    if M < 2:
        raise GridTooSmall("rule needs at least two grid nodes")
    stop = M if stop is None else int(stop)
    if not 2 <= stop <= M:
        raise GridTooSmall(f"stop={stop} leaves no candidate in 1..{M - 1}")
    values = np.full(M, np.nan)
    values[1:] = criterion
    window = values[1:stop]
    j = 1 + int(np.flatnonzero(window <= window.min() + floor)[0])
    return RuleSelection(j, float(alphas[j]), values)


def _difference_norms(matrix):
    return np.linalg.norm(np.diff(matrix, axis=0), axis=1)


def qo_select(grid: ParameterGrid, stop: Optional[int] = None) -> RuleSelection:
    """Discrete quasi-optimality: minimal ``||x_j - x_{j-1}||`` over ``j < stop``."""
    return _select(grid.alphas, _difference_norms(grid.matrix), stop,
                   _tie_floor(grid.matrix))


def lfs_select(grid: ParameterGrid, f_coeffs, stop: Optional[int] = None) -> RuleSelection:
    """Quasi-optimality for the functional ``f``: minimal ``|<f, x_j - x_{j-1}>|``."""
    f = np.asarray(f_coeffs, dtype=np.float64)
    if f.shape != grid.matrix.shape[1:]:
        raise LengthMismatch(f"functional has length {f.size}, "
                             f"expected {grid.matrix.shape[1]}")
    criterion = np.abs(np.diff(grid.matrix, axis=0) @ f)
    return _select(grid.alphas, criterion, stop, _tie_floor(grid.matrix, f))


def correction_factors(grid: ParameterGrid, reference) -> np.ndarray:
    """``c_i = <reference, x_i> / ||x_i||**2`` for every grid approximant."""
    ref = reference.coeffs if isinstance(reference, RegularizedSolution) \
        else np.asarray(reference, dtype=np.float64)
    if ref.shape != grid.matrix.shape[1:]:
        raise LengthMismatch("reference length differs from grid solutions")
    # row-wise np.dot keeps the evaluation order identical to the Gram matrix
    norms2 = np.array([np.dot(row, row) for row in grid.matrix])
    if np.any(norms2 == 0):
        raise ZeroNormApproximant("a grid approximant has zero norm")
    return np.array([np.dot(ref, row) for row in grid.matrix]) / norms2


def iterated_qo_select(grid: ParameterGrid, factors, stop: Optional[int] = None
                       ) -> RuleSelection:
    """Quasi-optimality on the corrected family ``factors[i] * x_i``."""
    factors = np.asarray(factors, dtype=np.float64)
    if factors.shape != (grid.M,):
        raise LengthMismatch(f"need {grid.M} factors, got {factors.size}")
    family = factors[:, None] * grid.matrix
    return _select(grid.alphas, _difference_norms(family), stop, _tie_floor(family))
