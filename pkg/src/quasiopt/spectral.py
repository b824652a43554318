"""Diagonalized problem model, spectral filters and index functions.

Every problem is held through its singular system: singular values
``lambda_k`` of ``T`` and coefficient vectors in the singular bases.  Filters
are always evaluated at the eigenvalues ``lambda_k**2`` of ``T*T``; the one
place where that conversion happens is :func:`eigenvalues`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    BracketDoesNotStraddle,
    EmptyGrid,
    LengthMismatch,
    LogDomainError,
    NonPositiveArgument,
    NonPositiveSingularValue,
    OutOfRange,
)

__all__ = [
    "SpectralProblem",
    "FilterFamily",
    "IndexFunction",
    "AssumptionItem",
    "AssumptionReport",
    "make_problem",
    "eigenvalues",
    "filter_eval",
    "residual_eval",
    "check_filter_assumptions",
    "theta_inverse",
    "mild_spectrum",
    "severe_spectrum",
    "diagonal_geometric_spectrum",
]

# exp2(-1000) is still a normal binary64 number; deeper spectra underflow.
MAX_SPECTRUM_BITS = 1000


def _as_vector(values, name):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise LengthMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    """A linear problem ``y = T x`` expressed in the singular system of ``T``.

    Attributes
    ----------
    singular_values : (n,) ndarray
        Positive, nonincreasing singular values ``lambda_k``.
    x_true : (n,) ndarray
        Coefficients of the exact solution in the right singular basis.
    y_clean : (n,) ndarray
        Coefficients of ``T x``; ``y_clean[k] = lambda_k * x_true[k]``.
    y_noisy : (n,) ndarray
        Coefficients of the observed data.
    delta : float
        Nominal noise level.
    """

    singular_values: np.ndarray
    x_true: np.ndarray
    y_clean: np.ndarray
    y_noisy: np.ndarray
    delta: float

    def __post_init__(self):
        lam = _as_vector(self.singular_values, "singular_values")
        n = lam.size
        vectors = {}
        for name in ("x_true", "y_clean", "y_noisy"):
            vec = _as_vector(getattr(self, name), name)
            if vec.size != n:
                raise LengthMismatch(f"{name} has length {vec.size}, expected {n}")
            vectors[name] = vec
        _check_spectrum(lam)
        if self.delta < 0:
            raise NonPositiveArgument("delta must be nonnegative")
        expected = lam * vectors["x_true"]
        scale = np.maximum(np.abs(expected), np.finfo(float).tiny)
        if np.any(np.abs(vectors["y_clean"] - expected) > 1e-12 * scale):
            raise LengthMismatch("y_clean is not singular_values * x_true")
        object.__setattr__(self, "singular_values", _frozen(lam))
        for name, vec in vectors.items():
            object.__setattr__(self, name, _frozen(vec))
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def n(self) -> int:
        return self.singular_values.size

    @property
    def noise(self) -> np.ndarray:
        """Data error ``y_noisy - y_clean``."""
        return self.y_noisy - self.y_clean

    def data(self, source) -> np.ndarray:
        """Return the data vector named by ``source`` (clean, noisy or noise)."""
        source = str(getattr(source, "value", source)).lower()
        if source == "clean":
            return self.y_clean
        if source == "noisy":
            return self.y_noisy
        if source == "noise":
            return self.noise
        raise ValueError(f"unknown data source {source!r}")

    def with_noisy(self, y_noisy) -> "SpectralProblem":
        return SpectralProblem(self.singular_values, self.x_true, self.y_clean,
                               y_noisy, self.delta)


def _check_spectrum(lam):
    if lam.size == 0:
        raise LengthMismatch("empty spectrum")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise NonPositiveSingularValue("singular values must be finite and > 0")
    if np.any(np.diff(lam) > 0):
        raise NonPositiveSingularValue("singular values must be nonincreasing")


def make_problem(singular_values, x_true, noise_coeffs, delta) -> SpectralProblem:
    """Build ``y = Tx`` and ``y_delta = y + noise`` from a singular system.

    ``noise_coeffs`` is taken as already scaled to the intended noise level.
    Components beyond ``len(singular_values)`` are rejected; callers modelling
    a rectangular operator must drop them first (they are annihilated by T*).
    """
    lam = _as_vector(singular_values, "singular_values")
    x = _as_vector(x_true, "x_true")
    noise = _as_vector(noise_coeffs, "noise_coeffs")
    if not (lam.size == x.size == noise.size):
        raise LengthMismatch(
            f"lengths differ: singular_values={lam.size}, x_true={x.size}, "
            f"noise={noise.size}")
    _check_spectrum(lam)
    y = lam * x
    return SpectralProblem(lam, x, y, y + noise, delta)


def eigenvalues(singular_values) -> np.ndarray:
    """Eigenvalues of ``T*T``: the only argument filters ever receive."""
    lam = np.asarray(singular_values, dtype=np.float64)
    return lam * lam


def mild_spectrum(n: int, beta: float) -> np.ndarray:
    """Singular values with ``lambda_k**2 = k**(-beta)``."""
    if beta <= 0:
        raise OutOfRange("beta must be > 0")
    k = np.arange(1, n + 1, dtype=np.float64)
    return k ** (-beta / 2.0)


def severe_spectrum(n: int, a: float) -> np.ndarray:
    """Singular values with ``lambda_k**2 = a**k``."""
    if not 0 < a < 1:
        raise OutOfRange("a must lie in (0, 1)")
    if n * math.log2(1.0 / a) >= MAX_SPECTRUM_BITS:
        raise OutOfRange(
            f"a**n underflows: n*log2(1/a) = {n * math.log2(1 / a):.1f} "
            f">= {MAX_SPECTRUM_BITS}")
    k = np.arange(1, n + 1, dtype=np.float64)
    return a ** (k / 2.0)


def diagonal_geometric_spectrum(n: int, a: float) -> np.ndarray:
    """Singular values of the diagonal matrix ``t_kk = a**k``.

    The eigenvalues of ``T*T`` are ``a**(2k)``, i.e. ``severe_spectrum(n, a**2)``.
    """
    return severe_spectrum(n, a * a)


# -- filters -----------------------------------------------------------------

def _tikhonov(alpha, lam):
    return 1.0 / (alpha + lam)


def _tikhonov_residual(alpha, lam):
    return alpha / (alpha + lam)


def _iterated(order):
    def g(alpha, lam):
        # 1 - (alpha/(alpha+lam))**n without cancellation for lam << alpha
        return -np.expm1(-order * np.log1p(lam / alpha)) / lam

    def r(alpha, lam):
        return np.exp(-order * np.log1p(lam / alpha))

    return g, r


@dataclass(frozen=True)
class FilterFamily:
    """A spectral filter ``g_alpha(lambda)`` with its declared qualification.

    Use :meth:`tikhonov`, :meth:`iterated_tikhonov` or :meth:`custom` to build
    one.  Calling the instance evaluates ``g_alpha`` elementwise;
    :meth:`residual` evaluates ``1 - lambda * g_alpha(lambda)``.
    """

    kind: str
    qualification: float
    order: int = 1
    evaluator: Callable = field(default=_tikhonov, repr=False, compare=False)
    residual_evaluator: Optional[Callable] = field(default=None, repr=False,
                                                   compare=False)

    @classmethod
    def tikhonov(cls) -> "FilterFamily":
        return cls("tikhonov", 1.0, 1, _tikhonov, _tikhonov_residual)

    @classmethod
    def iterated_tikhonov(cls, order: int) -> "FilterFamily":
        order = int(order)
        if order < 1:
            raise OutOfRange("iterated Tikhonov needs order >= 1")
        if order == 1:
            return cls("iterated_tikhonov", 1.0, 1, _tikhonov, _tikhonov_residual)
        g, r = _iterated(order)
        return cls("iterated_tikhonov", float(order), order, g, r)

    @classmethod
    def custom(cls, evaluator: Callable, qualification: float,
               residual: Optional[Callable] = None) -> "FilterFamily":
        if qualification <= 0:
            raise OutOfRange("qualification must be > 0")
        return cls("custom", float(qualification), 1, evaluator, residual)

    def __call__(self, alpha, lam):
        return self.evaluator(alpha, lam)

    def residual(self, alpha, lam):
        if self.residual_evaluator is not None:
            return self.residual_evaluator(alpha, lam)
        return 1.0 - lam * self.evaluator(alpha, lam)


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if np.any(np.asarray(value) <= 0):
            raise NonPositiveArgument(f"{name} must be > 0")


def filter_eval(filt: FilterFamily, alpha, lam):
    """``g_alpha(lam)`` with argument checks.  ``lam`` is an eigenvalue of T*T."""
    _check_positive(alpha=alpha, lam=lam)
    return filt(alpha, lam)


def residual_eval(filt: FilterFamily, alpha, lam):
    """``1 - lam * g_alpha(lam)``."""
    _check_positive(alpha=alpha, lam=lam)
    return filt.residual(alpha, lam)


# -- index functions ---------------------------------------------------------

_LOG_TMAX = math.exp(-1.0)


@dataclass(frozen=True)
class IndexFunction:
    """Monotone smoothness function: power, logarithmic, constant or composite.

    ``IndexFunction.log(nu)`` is ``t -> log(1/t)**(-nu)`` and is only defined
    on ``(0, 1/e]``; evaluating it elsewhere raises :class:`LogDomainError`.
    Products and compositions are built with :meth:`product` and
    :meth:`compose` (``outer.compose(inner)`` is ``outer(inner(t))``).
    """

    kind: str
    exponent: float = 0.0
    parts: tuple = ()

    @classmethod
    def power(cls, mu: float) -> "IndexFunction":
        if mu <= 0:
            raise OutOfRange("power exponent must be > 0")
        return cls("power", float(mu))

    @classmethod
    def log(cls, nu: float) -> "IndexFunction":
        if nu <= 0:
            raise OutOfRange("log exponent must be > 0")
        return cls("log", float(nu))

    @classmethod
    def constant(cls) -> "IndexFunction":
        return cls("constant")

    def product(self, other: "IndexFunction") -> "IndexFunction":
        return IndexFunction("product", parts=(self, other))

    def compose(self, inner: "IndexFunction") -> "IndexFunction":
        return IndexFunction("composition", parts=(self, inner))

    @property
    def t_max(self) -> float:
        if self.kind == "log":
            return _LOG_TMAX
        if self.kind == "product":
            return min(p.t_max for p in self.parts)
        if self.kind == "composition":
            return self.parts[1].t_max
        return math.inf

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "power":
            out = t ** self.exponent
        elif self.kind == "constant":
            out = np.ones_like(t)
        elif self.kind == "log":
            if np.any((t <= 0) | (t > _LOG_TMAX)):
                raise LogDomainError(
                    "log index function is defined on (0, 1/e] only")
            out = (-np.log(t)) ** (-self.exponent)
        elif self.kind == "product":
            out = self.parts[0](t) * self.parts[1](t)
        elif self.kind == "composition":
            out = self.parts[0](self.parts[1](t))
        else:
            raise ValueError(f"unknown index function kind {self.kind!r}")
        return out[()] if out.ndim == 0 else out

    def __repr__(self):
        if self.kind in ("power", "log"):
            return f"IndexFunction.{self.kind}({self.exponent:g})"
        if self.kind == "constant":
            return "IndexFunction.constant()"
        op = "*" if self.kind == "product" else "o"
        return f"({self.parts[0]!r} {op} {self.parts[1]!r})"


def theta_inverse(phi: IndexFunction, delta: float, bracket=(0.0, 1.0),
                  rtol: float = 1e-12, max_iter: int = 4000) -> float:
    """Invert ``theta(t) = phi(t) * sqrt(t)`` by monotone bisection.

    Returns ``t`` in ``bracket`` with ``|theta(t) - delta| <= rtol * delta``,
    or the best point found once the bracket cannot be split further.
    """
    if delta <= 0:
        raise NonPositiveArgument("delta must be > 0")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 <= lo < hi:
        raise BracketDoesNotStraddle(f"invalid bracket {bracket!r}")

    def theta(t):
        return float(phi(t)) * math.sqrt(t) if t > 0 else 0.0

    f_lo, f_hi = theta(lo), theta(hi)
    if not f_lo <= delta <= f_hi:
        raise BracketDoesNotStraddle(
            f"theta({lo:g})={f_lo:g}, theta({hi:g})={f_hi:g} do not straddle {delta:g}")
    best, best_err = (lo, abs(f_lo - delta)) if abs(f_lo - delta) < abs(f_hi - delta) \
        else (hi, abs(f_hi - delta))
    for _ in range(max_iter):
        if best_err <= rtol * delta:
            break
        # geometric midpoint once the bracket is off zero: halves decades, not width
        mid = math.sqrt(lo * hi) if lo > 0 and hi / lo > 4 else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        f_mid = theta(mid)
        err = abs(f_mid - delta)
        if err < best_err:
            best, best_err = mid, err
        if f_mid < delta:
            lo = mid
        else:
            hi = mid
    return best


# -- Assumption checks -------------------------------------------------------

@dataclass(frozen=True)
class AssumptionItem:
    """One measured filter/index-function constant against its bound."""

    name: str
    measured: float
    bound: float
    sense: str  # "<=" (upper cap) or ">=" (lower floor)
    passed: Optional[bool]


@dataclass(frozen=True)
class AssumptionReport:
    items: Mapping[str, AssumptionItem]
    k_infimum: float
    declared_covers: Optional[bool]

    @property
    def passed(self) -> bool:
        return all(item.passed is not False for item in self.items.values())

    def failed(self) -> list:
        return [name for name, item in self.items.items() if item.passed is False]

    def to_dict(self) -> dict:
        return {
            "items": {name: {"measured": it.measured, "bound": it.bound,
                             "sense": it.sense, "passed": it.passed}
                      for name, it in self.items.items()},
            "k_infimum": self.k_infimum,
            "declared_covers": self.declared_covers,
            "passed": self.passed,
        }


DEFAULT_CAPS = {
    "lambda_g_min": 0.0,
    "lambda_g_max": 1.0,
    "c1": 10.0,
    "c2": 1e-6,
    "c3": 1e-6,
    "c4": 10.0,
    "c5": 10.0,
    "c6": 10.0,
    "c7": 10.0,
}

_SENSE = {"lambda_g_min": ">=", "c2": ">=", "c3": ">="}


def _declared_covers(filt, phi, kappa):
    """Compare declared qualification with power exponents, when both are powers."""
    def exponent(f):
        if f.kind == "power":
            return f.exponent
        if f.kind == "constant":
            return 0.0
        return None

    mu, gamma = exponent(phi), exponent(kappa)
    if mu is None or gamma is None:
        return None
    return mu + gamma <= filt.qualification and gamma <= 0.5


def check_filter_assumptions(filt: FilterFamily, alpha_grid: Sequence[float],
                             lambda_grid: Sequence[float], phi: IndexFunction,
                             kappa: IndexFunction,
                             caps: Optional[Mapping[str, float]] = None
                             ) -> AssumptionReport:
    """Measure the filter/index-function constants over finite grids.

    ``lambda_grid`` holds eigenvalues of ``T*T``.  Each constant is the worst
    case found over the grid and is compared to ``caps`` (upper caps, or lower
    floors for ``lambda_g_min``, ``c2`` and ``c3``).  Items with no admissible
    grid pair (e.g. no ``lambda < alpha``) are reported with ``passed=None``.
    """
    alphas = np.asarray(alpha_grid, dtype=np.float64).ravel()
    lams = np.asarray(lambda_grid, dtype=np.float64).ravel()
    if alphas.size == 0 or lams.size == 0:
        raise EmptyGrid("alpha_grid and lambda_grid must be nonempty")
    _check_positive(alpha_grid=alphas, lambda_grid=lams)
    bounds = dict(DEFAULT_CAPS)
    bounds.update(caps or {})

    A = alphas[:, None]
    L = lams[None, :]
    g = filt(A, L)
    r = filt.residual(A, L)
    lam_g = L * g
    below = L < A  # lambda in (0, alpha)

    measured = {
        "lambda_g_min": float(lam_g.min()),
        "lambda_g_max": float(lam_g.max()),
        "c1": float(np.max(np.sqrt(L) * g * np.sqrt(A))),
    }
    if below.any():
        measured["c2"] = float(r[below].min())
        measured["c3"] = float((A * g)[below].min())
        measured["c4"] = float((A * g)[below].max())
    else:
        measured.update(c2=math.nan, c3=math.nan, c4=math.nan)

    phi_l = phi(L)
    phi_a = phi(A)
    kap_l = kappa(L)
    kap_a = kappa(A)
    measured["c5"] = float(np.max(np.max(np.abs(phi_l * r), axis=1) / phi_a[:, 0]))
    measured["c6"] = float(np.max(
        np.max(np.abs(kap_l * phi_l * r), axis=1) / (kap_a * phi_a)[:, 0]))
    above = L > A
    if above.any():
        lhs = np.where(above, kap_l / np.sqrt(L), -np.inf).max(axis=1)
        rhs = (kap_a / np.sqrt(A))[:, 0]
        ok = np.isfinite(lhs)
        measured["c7"] = float(np.max(lhs[ok] / rhs[ok]))
    else:
        measured["c7"] = math.nan

    items = {}
    for name, value in measured.items():
        sense = _SENSE.get(name, "<=")
        bound = float(bounds[name])
        if math.isnan(value):
            passed = None
        elif name == "lambda_g_max":
            passed = value <= bound * (1 + 1e-12)
        elif sense == "<=":
            passed = value <= bound
        else:
            passed = value >= bound
        items[name] = AssumptionItem(name, value, bound, sense, passed)

    k_inf = float(np.min(np.min(r * g / A, axis=0)))
    return AssumptionReport(items, k_inf, _declared_covers(filt, phi, kappa))
