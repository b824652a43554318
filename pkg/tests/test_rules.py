import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from quasiopt.errors import EmptyGrid, GridTooSmall, LengthMismatch, NonPositiveAlpha, \
    ZeroNormApproximant
from quasiopt.experiments import ExperimentConfig, _sample, run_single
from quasiopt.noise import condition_ratios
from quasiopt.regularization import Source, mollified_norm, regularize
from quasiopt.rules import (ParameterGrid, correction_factors, geometric_alphas,
                            grid_argmin_psi, iterated_qo_select, lfs_select, psi,
                            psi_kappa, psi_values, qo_select)
from quasiopt.spectral import FilterFamily, IndexFunction, make_problem, mild_spectrum

TIK = FilterFamily.tikhonov()


def one_mode(y=1.0, lam2=1.0):
    lam = math.sqrt(lam2)
    return make_problem([lam], [y / lam], [0.0], 0.0)


# -- psi ----------------------------------------------------------------------------

def test_psi_single_mode():
    assert psi(one_mode(), TIK, 1.0, Source.CLEAN) == pytest.approx(0.25, rel=1e-15)


def test_psi_zero_data():
    p = make_problem([1.0, 0.5], [0.0, 0.0], [0.0, 0.0], 0.0)
    assert psi(p, TIK, 0.3) == 0.0
    assert psi_kappa(p, TIK, IndexFunction.power(0.5), 0.3) == 0.0


def test_psi_two_modes_oracle():
    lam = [1.0, 0.5]
    y = [1.0, 2.0]
    p = make_problem(lam, np.array(y) / lam, [0, 0], 0.0)
    assert psi(p, TIK, 0.5, Source.CLEAN) == pytest.approx(oracles.psi(lam, y, 0.5),
                                                         rel=1e-14)


def test_psi_kappa_examples():
    p = make_problem([1.0, 0.5], [1.0, -1.0], [0.1, 0.0], 0.1)
    assert psi_kappa(p, TIK, IndexFunction.constant(), 0.2) == psi(p, TIK, 0.2)
    single = one_mode(lam2=0.25)
    expected = math.sqrt(0.25 * (1 - 0.2) ** 2 * 0.25 * 0.8 ** 2 * 1)
    assert psi_kappa(single, TIK, IndexFunction.power(0.5), 1.0, Source.CLEAN) == \
        pytest.approx(expected, rel=1e-14)


def test_psi_rejects_alpha():
    with pytest.raises(NonPositiveAlpha):
        psi(one_mode(), TIK, -1.0)


# -- grid argmin --------------------------------------------------------------------------

def test_grid_argmin_ties_to_largest_alpha():
    p = make_problem([1.0, 0.5], [0.0, 0.0], [0.0, 0.0], 0.0)
    alpha, value = grid_argmin_psi(p, TIK, None, [0.01, 1.0, 0.1])
    assert (alpha, value) == (1.0, 0.0)


def test_grid_argmin_known_node():
    # one mode: psi(alpha) = alpha*lam/(alpha+lam)**2 * |y| peaks at alpha = lam;
    # with the grid on one side the minimum is at the node farthest from lam
    p = one_mode(lam2=0.01)
    grid = np.geomspace(1.0, 0.02, 30)
    vals = psi_values(p, TIK, grid, Source.CLEAN)
    alpha, value = grid_argmin_psi(p, TIK, None, grid, Source.CLEAN)
    assert alpha == grid[np.argmin(vals)] == 1.0
    with pytest.raises(EmptyGrid):
        grid_argmin_psi(p, TIK, None, [])


def test_grid_argmin_on_table_grid():
    cfg = ExperimentConfig()
    problem, _ = _sample(cfg, 0)
    alphas = geometric_alphas(0.1, 0.5, 20)
    alpha, _ = grid_argmin_psi(problem, TIK, None, alphas)
    assert alpha in alphas


# -- discrete rules -----------------------------------------------------------------------

def grid_from(rows, alphas=None):
    rows = np.asarray(rows, dtype=float)
    if alphas is None:
        alphas = 0.5 ** np.arange(rows.shape[0])
    return ParameterGrid.from_matrix(alphas, rows)


def test_qo_two_nodes():
    sel = qo_select(grid_from([[1.0, 0.0], [0.5, 0.5]]))
    assert sel.chosen_index == 1
    assert math.isnan(sel.criterion_values[0])


def test_qo_identical_solutions():
    sel = qo_select(grid_from([[1.0, 2.0]] * 5))
    assert sel.chosen_index == 1
    np.testing.assert_array_equal(sel.criterion_values[1:], 0.0)


def test_qo_too_small():
    with pytest.raises(GridTooSmall):
        qo_select(grid_from([[1.0]]))


def test_qo_on_harness_run_matches_exhaustive():
    rep = run_single(ExperimentConfig(), 0)
    cfg = ExperimentConfig()
    problem, _ = _sample(cfg, 0)
    grid = ParameterGrid.build(problem, TIK, 0.1, 0.5, 20)
    sols = [list(r) for r in grid.matrix]
    idx, crit = oracles.qo_index(sols)
    sel = qo_select(grid)
    assert sel.chosen_index == idx == rep.ell
    np.testing.assert_allclose(sel.criterion_values[1:], crit, rtol=1e-12)


def test_lfs_orthogonal_functional():
    g = grid_from([[1.0, 0.0], [2.0, 0.0], [5.0, 0.0]])
    sel = lfs_select(g, [0.0, 1.0])
    assert sel.chosen_index == 1
    np.testing.assert_array_equal(sel.criterion_values[1:], 0.0)
    with pytest.raises(LengthMismatch):
        lfs_select(g, [1.0])


def test_lfs_one_mode_equals_qo():
    g = grid_from([[1.0], [0.2], [0.15], [0.0]])
    assert lfs_select(g, [1.0]).chosen_index == qo_select(g).chosen_index == 2


def test_lfs_per_functional_indices():
    cfg = ExperimentConfig()
    problem, _ = _sample(cfg, 3)
    grid = ParameterGrid.build(problem, TIK, 0.1, 0.5, 20)
    sols = [list(r) for r in grid.matrix]
    for i in range(grid.M):
        idx, _ = oracles.lfs_index(sols, sols[i])
        assert lfs_select(grid, grid.matrix[i]).chosen_index == idx


def test_correction_factor_examples():
    g = grid_from([[1.0, 0.0], [0.0, 2.0]])
    c = correction_factors(g, [1.0, 0.0])
    np.testing.assert_array_equal(c, [1.0, 0.0])
    with pytest.raises(ZeroNormApproximant):
        correction_factors(grid_from([[1.0, 0.0], [0.0, 0.0]]), [1.0, 0.0])


def test_oracle_correction_minimizes_scalar_error():
    cfg = ExperimentConfig()
    problem, _ = _sample(cfg, 1)
    grid = ParameterGrid.build(problem, TIK, 0.1, 0.5, 20)
    c = correction_factors(grid, problem.x_true)
    for i in (0, 5, 12, 19):
        xi = grid.matrix[i]

        def err(t):
            return np.linalg.norm(problem.x_true - t * xi)

        lo, hi = c[i] - 1.0, c[i] + 1.0
        phi = (math.sqrt(5) - 1) / 2
        for _ in range(200):  # golden-section scan
            a, b = hi - phi * (hi - lo), lo + phi * (hi - lo)
            if err(a) < err(b):
                hi = b
            else:
                lo = a
        assert c[i] == pytest.approx(0.5 * (lo + hi), abs=1e-7)


def test_iterated_qo_examples():
    g = grid_from([[1.0, 0.0], [0.6, 0.3], [0.5, 0.35], [0.1, 0.9]])
    assert iterated_qo_select(g, np.ones(4)).chosen_index == qo_select(g).chosen_index
    zero = iterated_qo_select(g, np.zeros(4))
    assert zero.chosen_index == 1
    np.testing.assert_array_equal(zero.criterion_values[1:], 0.0)
    with pytest.raises(LengthMismatch):
        iterated_qo_select(g, np.ones(3))


def test_stop_restricts_candidates():
    g = grid_from([[1.0], [0.5], [0.4], [0.39]])
    assert qo_select(g).chosen_index == 3
    assert qo_select(g, stop=3).chosen_index == 2
    with pytest.raises(GridTooSmall):
        qo_select(g, stop=1)


# -- invariants ---------------------------------------------------------------------------

small_problems = st.integers(1, 10).flatmap(lambda n: st.tuples(
    st.lists(st.floats(1e-3, 1.0), min_size=n, max_size=n),
    st.lists(st.floats(-5, 5), min_size=n, max_size=n),
    st.lists(st.floats(-0.1, 0.1), min_size=n, max_size=n)))


@settings(max_examples=200, deadline=None)
@given(small_problems, st.floats(1e-6, 1.0))
def test_psi_lower_bounds(prob, alpha):
    lam, x, e = prob
    lam = sorted(lam, reverse=True)
    p = make_problem(lam, x, e, 0.1)
    clean = regularize(p, TIK, alpha, Source.CLEAN).coeffs
    noisy = regularize(p, TIK, alpha, Source.NOISY).coeffs
    err_clean = np.linalg.norm(clean - p.x_true)
    assert psi(p, TIK, alpha, Source.CLEAN) <= err_clean * (1 + 1e-12) + 1e-300
    bound = err_clean + np.linalg.norm(noisy - clean)
    assert psi(p, TIK, alpha, Source.NOISY) <= bound * (1 + 1e-12) + 1e-300
    kappa = IndexFunction.power(0.4)  # <= 1 on a spectrum inside (0, 1]
    assert psi_kappa(p, TIK, kappa, alpha) <= psi(p, TIK, alpha) * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(small_problems, st.floats(1e-3, 1e3), st.integers(2, 8))
def test_scale_equivariance(prob, c, M):
    lam, x, e = prob
    lam = sorted(lam, reverse=True)
    p = make_problem(lam, x, e, 0.1)
    q = p.with_noisy(c * p.y_noisy)
    g1 = ParameterGrid.build(p, TIK, 1.0, 0.5, M)
    g2 = ParameterGrid.build(q, TIK, 1.0, 0.5, M)
    a, b = qo_select(g1), qo_select(g2)
    np.testing.assert_allclose(b.criterion_values[1:], c * a.criterion_values[1:],
                               rtol=1e-12, atol=1e-300)
    f = np.ones(len(lam))
    assert lfs_select(g1, f).chosen_index == lfs_select(g2, f).chosen_index
    assert qo_select(g1).chosen_index == qo_select(g1).chosen_index


def test_mollified_noise_bound_stable_under_refinement():
    n = 400
    lam = mild_spectrum(n, 3.0)
    k = np.arange(1, n + 1)
    e = 1e-3 * k ** -1.0 * np.where(k % 2, 1.0, -1.0)
    p = make_problem(lam, np.zeros(n), e, 1e-3)
    kappa = IndexFunction.power(0.25)
    rep = condition_ratios(lam, e, kappa, n - 1)
    assert np.isfinite(rep.sup_ratio_kappa)

    def worst(alphas):
        out = 0.0
        for a in alphas:
            num = mollified_norm(kappa, p, regularize(p, TIK, a, Source.NOISE),
                                 np.zeros(n))
            den = psi_kappa(p, TIK, kappa, a, Source.NOISE)
            out = max(out, num / den)
        return out

    coarse = worst(np.geomspace(1.0, lam[-1] ** 2, 40))
    fine = worst(np.geomspace(1.0, lam[-1] ** 2, 79))
    assert np.isfinite(coarse) and fine <= 1.05 * coarse
