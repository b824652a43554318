"""Aggregation of grid approximants through the linear functional strategy.

The best combination ``sum_j c_j x_j`` of the approximants solves ``G c = p``
with the Gram matrix ``G`` (computable) and ``p_i = <x, x_i>`` (not
computable).  Each ``p_i`` is estimated by evaluating the functional ``x_i``
at the approximant picked for it by :func:`~quasiopt.rules.lfs_select`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptySubset, LengthMismatch, ZeroMatrix
from .regularization import RegularizedSolution
from .rules import ParameterGrid, lfs_select

__all__ = [
    "AggregationResult",
    "active_indices",
    "build_gram",
    "estimate_p",
    "solve_coefficients",
    "aggregate",
    "oracle_aggregate",
]

DEFAULT_REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AggregationResult:
    active_indices: np.ndarray
    gram: np.ndarray
    p_estimated: np.ndarray
    coefficients: np.ndarray
    aggregate_coeffs: np.ndarray
    solve_rank: int
    functional_indices: Optional[np.ndarray] = None  # lfs choice per functional

    @property
    def s(self) -> int:
        return int(self.active_indices.size)


def _rows(solutions) -> np.ndarray:
    if isinstance(solutions, np.ndarray):
        rows = np.atleast_2d(np.asarray(solutions, dtype=np.float64))
    else:
        rows = [s.coeffs if isinstance(s, RegularizedSolution) else s for s in solutions]
        if len(rows) == 0:
            raise EmptySubset("no solutions given")
        rows = np.vstack([np.asarray(r, dtype=np.float64) for r in rows])
    if rows.shape[0] == 0:
        raise EmptySubset("no solutions given")
    return rows


def build_gram(solutions) -> np.ndarray:
    """Pairwise inner products of the given approximants (exactly symmetric)."""
    rows = _rows(solutions)
    s = rows.shape[0]
    gram = np.empty((s, s))
    for i in range(s):
        for j in range(i, s):
            gram[i, j] = gram[j, i] = np.dot(rows[i], rows[j])
    return gram


def active_indices(grid: ParameterGrid, alpha_selected: float) -> np.ndarray:
    """Grid positions with ``alpha_j >= alpha_selected``."""
    j = grid.index_of(alpha_selected)
    return np.arange(j + 1)


def estimate_p(grid: ParameterGrid, active: Sequence[int], return_indices=False):
    """Estimate ``p_i = <x, x_i>`` by ``<x_{kappa_i}, x_i>`` for each active ``i``.

    ``kappa_i`` is the grid position chosen by ``lfs_select`` for the
    functional ``x_i``; every functional gets its own selection.
    """
    active = np.asarray(active, dtype=int)
    if active.size == 0:
        raise EmptySubset("active set is empty")
    p = np.empty(active.size)
    chosen = np.empty(active.size, dtype=int)
    for pos, i in enumerate(active):
        sel = lfs_select(grid, grid.matrix[i])
        chosen[pos] = sel.chosen_index
        p[pos] = np.dot(grid.matrix[sel.chosen_index], grid.matrix[i])
    return (p, chosen) if return_indices else p


def solve_coefficients(gram, p, rel_tol: float = DEFAULT_REL_TOL):
    """Truncated spectral pseudo-inverse solve of ``gram @ c = p``.

    Eigenpairs below ``rel_tol * lambda_max`` are discarded.  Returns the
    minimal-norm solution on the retained subspace and its dimension.
    """
    gram = np.asarray(gram, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or p.shape != gram.shape[:1]:
        raise LengthMismatch("gram must be square and match p")
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    w, V = np.linalg.eigh(gram)
    w_max = w[-1]
    keep = w > rel_tol * w_max if w_max > 0 else np.zeros_like(w, dtype=bool)
    if not keep.any():
        raise ZeroMatrix("no eigenvalue above the truncation threshold")
    Vr = V[:, keep]
    coeffs = Vr @ ((Vr.T @ p) / w[keep])
    return coeffs, int(keep.sum())


def _combine(rows, coeffs):
    return coeffs @ rows


def _aggregate(grid, active, p, rel_tol, functional_indices=None):
    rows = grid.matrix[active]
    gram = build_gram(rows)
    coeffs, rank = solve_coefficients(gram, p, rel_tol)
    return AggregationResult(active, gram, p, coeffs, _combine(rows, coeffs), rank,
                             functional_indices)


def aggregate(grid: ParameterGrid, alpha_selected: float,
              rel_tol: float = DEFAULT_REL_TOL, over: str = "active") -> AggregationResult:
    """Aggregate approximants with LFS-estimated right-hand side.

    ``over="active"`` combines the approximants with ``alpha_j >= alpha_selected``;
    ``over="all"`` uses the whole grid.
    """
    if over == "active":
        active = active_indices(grid, alpha_selected)
    elif over == "all":
        active = np.arange(grid.M)
    else:
        raise ValueError(f"over must be 'active' or 'all', got {over!r}")
    p, chosen = estimate_p(grid, active, return_indices=True)
    return _aggregate(grid, active, p, rel_tol, chosen)


def oracle_aggregate(grid: ParameterGrid, x_true, rel_tol: float = DEFAULT_REL_TOL,
                     alpha_selected: Optional[float] = None) -> AggregationResult:
    """Aggregation with the exact ``p_i = <x_true, x_i>`` (reference only)."""
    x = np.asarray(x_true, dtype=np.float64)
    if x.shape != grid.matrix.shape[1:]:
        raise LengthMismatch("x_true length differs from grid solutions")
    active = np.arange(grid.M) if alpha_selected is None \
        else active_indices(grid, alpha_selected)
    p = np.array([np.dot(x, grid.matrix[i]) for i in active])
    return _aggregate(grid, active, p, rel_tol)
