import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasiopt.errors import (BracketDoesNotStraddle, EmptyGrid, LengthMismatch,
                             LogDomainError, NonPositiveArgument, NonPositiveSingularValue)
from quasiopt.spectral import (FilterFamily, IndexFunction, check_filter_assumptions,
                               diagonal_geometric_spectrum, eigenvalues, filter_eval,
                               make_problem, mild_spectrum, residual_eval,
                               severe_spectrum, theta_inverse)

pos = st.floats(min_value=1e-8, max_value=1e4, allow_nan=False, allow_infinity=False)


# -- make_problem -------------------------------------------------------------

def test_make_problem_zero_noise():
    p = make_problem([1.0], [2.0], [0.0], 0.0)
    assert p.y_clean.tolist() == [2.0]
    assert p.y_noisy.tolist() == [2.0]


def test_make_problem_componentwise():
    p = make_problem([0.5, 0.25], [1.0, 1.0], [0.1, -0.1], 0.2)
    np.testing.assert_allclose(p.y_noisy, [0.6, 0.15], rtol=0, atol=1e-15)
    np.testing.assert_allclose(p.noise, [0.1, -0.1], atol=1e-15)


def test_make_problem_geometric_setup():
    lam = diagonal_geometric_spectrum(100, 0.5)
    # t_kk = a**k: singular values a**k, eigenvalues a**(2k)
    np.testing.assert_allclose(lam, 0.5 ** np.arange(1, 101), rtol=1e-15)
    rng = np.random.default_rng(0)
    x = np.arange(1, 101) ** -2.0 * rng.uniform(-1, 1, 100)
    p = make_problem(lam, x, np.zeros(100), 0.01)
    assert p.n == 100
    assert eigenvalues(p.singular_values)[-1] == pytest.approx(0.5 ** 200)


def test_make_problem_rejects_bad_input():
    with pytest.raises(NonPositiveSingularValue):
        make_problem([1.0, 0.0], [1, 1], [0, 0], 0.1)
    with pytest.raises(NonPositiveSingularValue):
        make_problem([0.5, 1.0], [1, 1], [0, 0], 0.1)
    with pytest.raises(LengthMismatch):
        make_problem([1.0, 0.5], [1], [0, 0], 0.1)


def test_problem_is_immutable():
    p = make_problem([1.0, 0.5], [1.0, 2.0], [0.0, 0.0], 0.1)
    with pytest.raises(ValueError):
        p.x_true[0] = 3.0


def test_spectra():
    np.testing.assert_allclose(eigenvalues(mild_spectrum(4, 3.0)),
                               np.arange(1, 5) ** -3.0, rtol=1e-14)
    np.testing.assert_allclose(eigenvalues(severe_spectrum(5, 0.9)),
                               0.9 ** np.arange(1, 6), rtol=1e-14)
    with pytest.raises(ValueError):
        severe_spectrum(2000, 0.5)  # 2000 bits of dynamic range


# -- filters ----------------------------------------------------------------------

def test_tikhonov_value():
    assert filter_eval(FilterFamily.tikhonov(), 1.0, 1.0) == 0.5
    assert residual_eval(FilterFamily.tikhonov(), 1.0, 1.0) == 0.5


def test_iterated_order_one_is_tikhonov():
    it = FilterFamily.iterated_tikhonov(1)
    assert filter_eval(it, 0.3, 0.7) == pytest.approx(1.0, rel=1e-14)


def test_iterated_order_two_value():
    it = FilterFamily.iterated_tikhonov(2)
    assert filter_eval(it, 1.0, 1.0) == pytest.approx(0.75, rel=1e-14)
    assert it.qualification == 2


def test_filter_rejects_nonpositive():
    with pytest.raises(NonPositiveArgument):
        filter_eval(FilterFamily.tikhonov(), 0.0, 1.0)
    with pytest.raises(NonPositiveArgument):
        filter_eval(FilterFamily.tikhonov(), 1.0, -1.0)


@settings(max_examples=300, deadline=None)
@given(alpha=pos, lam=pos, order=st.integers(1, 6))
def test_filter_bounds(alpha, lam, order):
    for filt, c1 in ((FilterFamily.tikhonov(), 0.5),
                     (FilterFamily.iterated_tikhonov(order), order)):
        g = filt(alpha, lam)
        assert -1e-15 <= lam * g <= 1 + 1e-15
        assert math.sqrt(lam) * g <= c1 / math.sqrt(alpha) * (1 + 1e-12)
        if lam < alpha:
            n = filt.order or 1
            assert filt.residual(alpha, lam) >= 0.5 ** n * (1 - 1e-12)
            assert g >= (1 - 0.5 ** n) / alpha * (1 - 1e-12)
            assert g <= n / alpha * (1 + 1e-12)


@settings(max_examples=300, deadline=None)
@given(alpha=pos, lam=pos)
def test_iterated_one_matches_tikhonov_everywhere(alpha, lam):
    a = FilterFamily.iterated_tikhonov(1)(alpha, lam)
    b = FilterFamily.tikhonov()(alpha, lam)
    assert a == pytest.approx(b, rel=1e-14)


def test_custom_filter():
    filt = FilterFamily.custom(lambda a, l: 1.0 / (a + l), qualification=1.0)
    assert filt(1.0, 1.0) == 0.5
    assert filt.residual(1.0, 1.0) == pytest.approx(0.5)


# -- index functions ------------------------------------------------------------

def test_power_at_one():
    assert IndexFunction.power(0.7)(1.0) == 1.0


def test_log_domain():
    f = IndexFunction.log(1.0)
    assert f(math.exp(-2)) == pytest.approx(0.5)
    with pytest.raises(LogDomainError):
        f(0.5)


@settings(max_examples=200, deadline=None)
@given(mu=st.floats(0.05, 3), nu=st.floats(0.05, 3),
       ts=st.lists(st.floats(1e-12, 0.36), min_size=2, max_size=20))
def test_index_functions_monotone_and_composites(mu, nu, ts):
    ts = np.sort(np.asarray(ts))
    p, l = IndexFunction.power(mu), IndexFunction.log(nu)
    for f in (p, l, IndexFunction.constant(), p.product(l)):
        v = f(ts)
        assert np.all(v >= 0)
        assert np.all(np.diff(v) >= -1e-15 * np.abs(v[1:]))
    np.testing.assert_array_equal(p.product(l)(ts), ts ** mu * (-np.log(ts)) ** -nu)
    comp = l.compose(p)  # log(power(t)); power maps (0, 0.36] into (0, 1)
    inner = ts ** mu
    ok = inner <= math.exp(-1)
    if ok.any():
        np.testing.assert_array_equal(comp(ts[ok]), (-np.log(inner[ok])) ** -nu)


# -- theta inverse --------------------------------------------------------------

def test_theta_inverse_closed_forms():
    assert theta_inverse(IndexFunction.power(1), 1e-3) == pytest.approx(1e-2, rel=1e-11)
    assert theta_inverse(IndexFunction.power(2), 0.01) == pytest.approx(0.01 ** 0.4, rel=1e-11)
    assert 0.01 ** 0.4 == pytest.approx(0.1585, abs=1e-4)


def test_theta_inverse_bracket():
    with pytest.raises(BracketDoesNotStraddle):
        theta_inverse(IndexFunction.power(1), 10.0, (0.0, 1.0))


@settings(max_examples=200, deadline=None)
@given(mu=st.floats(0.1, 3), t=st.floats(1e-6, 1.0))
def test_theta_inverse_roundtrip(mu, t):
    phi = IndexFunction.power(mu)
    delta = float(phi(t)) * math.sqrt(t)
    assert theta_inverse(phi, delta) == pytest.approx(t, rel=1e-10)


# -- assumption report ---------------------------------------------------------

ALPHAS = np.geomspace(1.0, 1e-8, 60)
LAMS = np.geomspace(1.0, 1e-10, 80)


def test_check_filter_tikhonov_passes():
    rep = check_filter_assumptions(FilterFamily.tikhonov(), ALPHAS, LAMS,
                                   IndexFunction.power(0.5), IndexFunction.power(0.25))
    assert rep.passed, rep.failed()
    assert rep.declared_covers is True
    assert rep.items["c1"].measured <= 0.5 + 1e-12
    assert rep.k_infimum > 0


def test_check_filter_qualification_exceeded():
    rep = check_filter_assumptions(FilterFamily.tikhonov(), ALPHAS, LAMS,
                                   IndexFunction.power(1.5), IndexFunction.constant())
    assert "c5" in rep.failed()
    assert rep.declared_covers is False
    # the violation grows as the alpha grid reaches further down
    coarse = check_filter_assumptions(FilterFamily.tikhonov(), ALPHAS[:20], LAMS,
                                      IndexFunction.power(1.5), IndexFunction.constant())
    assert rep.items["c5"].measured > 10 * coarse.items["c5"].measured


def test_check_filter_empty_grid():
    with pytest.raises(EmptyGrid):
        check_filter_assumptions(FilterFamily.tikhonov(), [], LAMS,
                                 IndexFunction.power(0.5), IndexFunction.power(0.25))


def test_check_filter_iterated_covers_higher_smoothness():
    rep = check_filter_assumptions(FilterFamily.iterated_tikhonov(2), ALPHAS, LAMS,
                                   IndexFunction.power(1.5), IndexFunction.constant())
    assert rep.passed, rep.failed()
