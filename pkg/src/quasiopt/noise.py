"""Noise models and empirical checks of the Muckenhoupt-type noise condition.

For data error ``e = y_delta - y`` in the left singular basis, the condition at
truncation level ``n`` compares::

    lhs_n = lambda_n**4 * sum_{k<=n} lambda_k**-2 * w_k * e_k**2
    rhs_n =               sum_{k>n}  lambda_k**2  * w_k * e_k**2

with ``w_k = 1`` (plain) or ``w_k = kappa(lambda_k**2)**2`` (weighted).  The
condition holds when ``lhs_n / rhs_n`` stays bounded in ``n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BadDecay, BadEpsilon, LengthMismatch, NMaxTooLarge, OutOfRange
from .spectral import IndexFunction, eigenvalues, mild_spectrum, severe_spectrum

__all__ = [
    "Distribution",
    "NoiseSpec",
    "NoiseConditionReport",
    "Verdict",
    "make_rng",
    "draw",
    "generate_noise",
    "condition_ratios",
    "sufficient_condition_verdict",
    "default_dimension",
    "stochastic_sup_ratio_study",
]


class Distribution(str, enum.Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"  # standardized to unit variance: U(-sqrt 3, sqrt 3)
    UNIFORM_SEPARATED = "uniform_separated"  # |xi| ~ U(eps, 1), random sign
    UNIFORM_BAND = "uniform_band"  # |xi| ~ U(eps, 1/eps), random sign


def make_rng(*key: int) -> np.random.Generator:
    """Philox stream keyed by integers; distinct keys give independent streams."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def draw(distribution, size: int, rng: np.random.Generator,
         epsilon: Optional[float] = None) -> np.ndarray:
    dist = Distribution(distribution)
    if dist is Distribution.GAUSSIAN:
        return rng.standard_normal(size)
    if dist is Distribution.RADEMACHER:
        return rng.choice(np.array([-1.0, 1.0]), size)
    if dist is Distribution.UNIFORM:
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)
    if epsilon is None or not 0 < epsilon < 1:
        raise BadEpsilon(f"{dist.value} needs epsilon in (0, 1), got {epsilon!r}")
    upper = 1.0 if dist is Distribution.UNIFORM_SEPARATED else 1.0 / epsilon
    magnitude = rng.uniform(epsilon, upper, size)
    return magnitude * rng.choice(np.array([-1.0, 1.0]), size)


@dataclass(frozen=True)
class NoiseSpec:
    """Recipe for a data-error vector ``e_k = sigma_k * xi_k``.

    ``kind="poly"`` is deterministic: ``xi_k`` is a sign pattern
    (``"alternating"``, ``"positive"`` or ``"random"``, the last drawn from the
    seeded stream).  ``kind="stochastic"`` draws ``xi_k`` from ``distribution``.
    In both cases ``sigma_k = delta * k**(-nu/2)``.
    """

    kind: str = "stochastic"
    nu: float = 2.0
    distribution: Distribution = Distribution.GAUSSIAN
    epsilon: Optional[float] = None
    signs: str = "random"
    normalize_to_delta: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("poly", "stochastic"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        object.__setattr__(self, "distribution", Distribution(self.distribution))
        if self.kind == "poly" and not self.nu > 0:
            raise BadDecay("polynomial noise needs nu > 0")
        if self.kind == "stochastic" and self.nu < 0:
            raise BadDecay("stochastic noise needs nu >= 0")
        if self.signs not in ("alternating", "positive", "random"):
            raise ValueError(f"unknown sign pattern {self.signs!r}")
        if self.distribution in (Distribution.UNIFORM_SEPARATED, Distribution.UNIFORM_BAND):
            if self.epsilon is None or not 0 < self.epsilon < 1:
                raise BadEpsilon("epsilon must lie in (0, 1)")


def generate_noise(spec: NoiseSpec, n: int, delta: float,
                   rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Coefficients of ``y_delta - y``; deterministic for a given seed.

    ``rng`` overrides the stream derived from ``spec.seed``.
    """
    if n < 1:
        raise LengthMismatch("n must be >= 1")
    if not delta > 0:
        raise OutOfRange("delta must be > 0")
    if rng is None:
        rng = make_rng(spec.seed)
    k = np.arange(1, n + 1, dtype=np.float64)
    sigma = delta * k ** (-spec.nu / 2.0)
    if spec.kind == "poly":
        if spec.signs == "alternating":
            xi = np.where(k % 2 == 1, 1.0, -1.0)
        elif spec.signs == "positive":
            xi = np.ones(n)
        else:
            xi = rng.choice(np.array([-1.0, 1.0]), n)
    else:
        xi = draw(spec.distribution, n, rng, spec.epsilon)
    noise = sigma * xi
    if spec.normalize_to_delta:
        noise *= delta / np.linalg.norm(noise)
    return noise


@dataclass(frozen=True, eq=False)
class NoiseConditionReport:
    ratios_plain: np.ndarray  # index n-1 holds the ratio at truncation level n
    ratios_kappa: np.ndarray
    sup_ratio_plain: float
    sup_ratio_kappa: float
    n_max: int
    degenerate_tail_at: Optional[int]
    tail_truncation_warning: bool = False
    discarded_tail_estimate: float = field(default=0.0)

    def to_rows(self):
        """``(n, ratio_plain, ratio_kappa)`` rows for CSV output."""
        return [(n + 1, float(p), float(q))
                for n, (p, q) in enumerate(zip(self.ratios_plain, self.ratios_kappa))]


def _ratios(lam2, weighted_e2, n_max):
    low = np.cumsum(weighted_e2[:n_max] / lam2[:n_max])
    tail_terms = lam2 * weighted_e2
    tail = np.cumsum(tail_terms[::-1])[::-1]  # tail[k] = sum over indices >= k
    lhs = lam2[:n_max] ** 2 * low
    rhs = tail[1:n_max + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(rhs > 0, lhs / rhs, np.inf)
    # 0/0 cannot be read as a violation; treat it as a vacuous level
    ratios = np.where((rhs == 0) & (lhs == 0), 0.0, ratios)
    return ratios, rhs


def _tail_estimate(terms):
    """Geometric extrapolation of the sum beyond the last term from two end blocks."""
    block = max(1, terms.size // 10)
    last = terms[-block:].sum()
    prev = terms[-2 * block:-block].sum() if terms.size >= 2 * block else 0.0
    if prev <= 0 or last <= 0:
        return 0.0
    rate = last / prev
    return math.inf if rate >= 1 else last * rate / (1 - rate)


def condition_ratios(spectrum, noise, kappa: Optional[IndexFunction] = None,
                     n_max: Optional[int] = None) -> NoiseConditionReport:
    """Evaluate both noise-condition ratios for ``n = 1..n_max``.

    ``spectrum`` holds singular values ``lambda_k``.  Tail sums are truncated
    at ``len(spectrum)``; ``tail_truncation_warning`` is set when an
    extrapolated estimate of the discarded tail exceeds ``1e-3`` of the
    retained tail at ``n_max``.
    """
    lam = np.asarray(spectrum, dtype=np.float64)
    e = np.asarray(noise, dtype=np.float64)
    if lam.shape != e.shape:
        raise LengthMismatch("spectrum and noise lengths differ")
    dim = lam.size
    if n_max is None:
        n_max = dim - 1
    if not 1 <= n_max < dim:
        raise NMaxTooLarge(f"n_max={n_max} must lie in [1, {dim - 1}]")
    lam2 = eigenvalues(lam)
    e2 = e * e
    plain, rhs = _ratios(lam2, e2, n_max)
    if kappa is None:
        weighted = plain
    else:
        weighted, _ = _ratios(lam2, e2 * kappa(lam2) ** 2, n_max)
    zero = np.flatnonzero(rhs == 0)
    degenerate = int(zero[0]) + 1 if zero.size else None
    tail_est = _tail_estimate(lam2 * e2)
    warn = bool(rhs[-1] > 0 and tail_est > 1e-3 * rhs[-1])
    return NoiseConditionReport(plain, weighted, float(np.max(plain)),
                                float(np.max(weighted)), int(n_max), degenerate,
                                warn, float(tail_est))


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    UNKNOWN = "unknown"


def sufficient_condition_verdict(spectrum_kind: str, param: float, nu: float,
                                 gamma: Optional[float] = None,
                                 kappa_kind: Optional[str] = None) -> Verdict:
    """Look up the deterministic sufficient conditions for polynomial noise.

    ``spectrum_kind`` is ``"mild"`` (``param`` is beta) or ``"severe"``
    (``param`` is a).  ``kappa_kind`` is None, ``"power"`` or ``"log"``.
    ``UNKNOWN`` means no listed sufficient condition applies, not that the
    condition fails.
    """
    if not nu > 0:
        raise OutOfRange("nu must be > 0")
    if spectrum_kind == "mild":
        if not param > 0:
            raise OutOfRange("beta must be > 0")
    elif spectrum_kind == "severe":
        if not 0 < param < 1:
            raise OutOfRange("a must lie in (0, 1)")
    else:
        raise OutOfRange(f"unknown spectrum kind {spectrum_kind!r}")
    if kappa_kind not in (None, "power", "log"):
        raise OutOfRange(f"unknown kappa kind {kappa_kind!r}")
    if kappa_kind is not None and gamma is None:
        raise OutOfRange("gamma is required with a kappa")

    ok = nu > 1
    if spectrum_kind == "mild":
        beta = param
        if kappa_kind is None:
            ok = ok and beta > nu - 1
        elif kappa_kind == "power":
            ok = ok and gamma > 0 and beta > 2 * gamma * beta + nu - 1
        else:
            ok = False
    else:
        if kappa_kind == "power":
            ok = ok and 0 < gamma < 1
        elif kappa_kind == "log":
            ok = ok and gamma > 0
    return Verdict.HOLDS if ok else Verdict.UNKNOWN


def _spectrum(kind, param, dim):
    if kind == "mild":
        return mild_spectrum(dim, param)
    if kind == "severe":
        return severe_spectrum(dim, param)
    raise OutOfRange(f"unknown spectrum kind {kind!r}")


def default_dimension(kind: str, param: float, nu: float, n_max: int) -> int:
    """Problem dimension large enough that the truncated tail is negligible.

    Chosen so the expected discarded tail is below ``1e-4`` of the retained one.
    """
    if kind == "mild":
        decay = param + nu - 1  # tail sum ~ n**-decay
        return int(math.ceil(n_max * 10 ** (4.0 / max(decay, 0.5)))) + 1
    if kind == "severe":
        return n_max + int(math.ceil(math.log(1e-4) / math.log(param))) + 1
    raise OutOfRange(f"unknown spectrum kind {kind!r}")


def stochastic_sup_ratio_study(spectrum_kind: str, param: float, spec: NoiseSpec,
                               n_max_list: Sequence[int], n_seeds: int,
                               kappa: Optional[IndexFunction] = None,
                               dimension: Optional[int] = None) -> list:
    """Median/max over seeds of the plain sup ratio, for each truncation depth.

    Each seed draws one noise sequence long enough for the deepest level and
    every ``n_max`` reuses its prefix, so the table shows how the supremum of
    one realization grows with ``n``.
    """
    if n_seeds < 1:
        raise OutOfRange("n_seeds must be >= 1")
    n_max_list = sorted(int(n) for n in n_max_list)
    if not n_max_list:
        raise OutOfRange("n_max_list is empty")
    dims = {n: dimension or default_dimension(spectrum_kind, param, spec.nu, n)
            for n in n_max_list}
    big = max(dims.values())
    lam_full = _spectrum(spectrum_kind, param, big)
    sups = {n: [] for n in n_max_list}
    sups_k = {n: [] for n in n_max_list}
    for i in range(n_seeds):
        noise = generate_noise(spec, big, 1.0, rng=make_rng(spec.seed, i))
        for n in n_max_list:
            d = dims[n]
            rep = condition_ratios(lam_full[:d], noise[:d], kappa, n)
            sups[n].append(rep.sup_ratio_plain)
            sups_k[n].append(rep.sup_ratio_kappa)
    rows = []
    for n in n_max_list:
        vals = np.asarray(sups[n])
        rows.append({
            "n_max": n,
            "dimension": dims[n],
            "median": float(np.median(vals)),
            "max": float(np.max(vals)),
            "min": float(np.min(vals)),
            "median_kappa": float(np.median(sups_k[n])),
        })
    return rows
