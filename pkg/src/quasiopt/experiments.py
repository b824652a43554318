"""End-to-end experiments: aggregation study, rate fits, noise-condition sweeps.

All defaults of :class:`ExperimentConfig` reproduce the diagonal test problem
``t_kk = a**k`` with ``a = 0.5``, ``n = 100``, ``m = 150``, ``x_j = j**-2 eta_j``,
``delta = 0.01`` and the grid ``alpha_j = 0.1 * 0.5**j``, ``M = 20``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .aggregation import aggregate, oracle_aggregate
from .errors import (BadRunIndex, ConfigError, InsufficientSweep, NonMonotoneSpectrum,
                     ParseError, QuasiOptError)
from .noise import (Distribution, NoiseSpec, Verdict, generate_noise, make_rng,
                    stochastic_sup_ratio_study, sufficient_condition_verdict)
from .regularization import filtered_coeffs
from .rules import (ParameterGrid, correction_factors, grid_argmin_psi,
                    iterated_qo_select, qo_select)
from .spectral import (FilterFamily, IndexFunction, diagonal_geometric_spectrum,
                       make_problem, mild_spectrum, severe_spectrum)

__all__ = [
    "ProblemConfig", "NoiseConfig", "GridConfig", "RuleConfig", "RunConfig",
    "ExperimentConfig", "RunReport", "ExperimentResult",
    "run_single", "run_aggregation_experiment", "run_figure_curves",
    "RateStudyConfig", "RateStudyResult", "run_rate_study",
    "NoiseCase", "NoiseStudyConfig", "run_noise_study", "growth_csv", "ratio_curve_csv",
    "curves_csv",
    "SvdData", "ingest_svd", "load_config_document",
]

ERROR_NAMES = ("e_qo", "e_best", "e_qo2", "e_best2", "e_agg")


# -- config plumbing ---------------------------------------------------------

def _from_dict(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = getattr(cls(), name)
        if is_dataclass(default):
            value = _from_dict(type(default), value, f"{where}.{name}")
        elif isinstance(default, tuple) and isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _is_int(value):
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _is_num(value):
    return isinstance(value, (int, float, np.number)) and not isinstance(value, bool) \
        and math.isfinite(value)


@dataclass(frozen=True)
class ProblemConfig:
    spectrum: str = "diagonal"  # t_kk = a**k; "severe": lambda_k**2 = a**k; "mild"
    a: float = 0.5
    beta: Optional[float] = None
    n: int = 100
    m: int = 150
    mu: float = 2.0

    def validate(self):
        _require(self.spectrum in ("diagonal", "severe", "mild"),
                 f"problem.spectrum must be diagonal, severe or mild, got {self.spectrum!r}")
        _require(_is_int(self.n) and self.n >= 1, "problem.n must be a positive integer")
        _require(_is_int(self.m) and self.m >= self.n, "problem.m must be an integer >= n")
        _require(_is_num(self.mu) and self.mu > 0, "problem.mu must be > 0")
        if self.spectrum == "mild":
            _require(_is_num(self.beta) and self.beta > 0, "problem.beta must be > 0")
        else:
            _require(_is_num(self.a) and 0 < self.a < 1, "problem.a must lie in (0, 1)")
            bits = (2 if self.spectrum == "diagonal" else 1) * self.n * math.log2(1 / self.a)
            _require(bits < 1000, "problem spectrum underflows binary64 "
                                  f"(needs {bits:.0f} bits, limit 1000)")

    def singular_values(self):
        if self.spectrum == "diagonal":
            return diagonal_geometric_spectrum(self.n, self.a)
        if self.spectrum == "severe":
            return severe_spectrum(self.n, self.a)
        return mild_spectrum(self.n, self.beta)


@dataclass(frozen=True)
class NoiseConfig:
    distribution: str = "uniform_separated"
    epsilon: Optional[float] = None  # None: use delta
    nu: float = 0.0
    delta: float = 0.01
    normalize: bool = True

    def validate(self):
        try:
            Distribution(self.distribution)
        except ValueError:
            raise ConfigError(f"noise.distribution: unknown {self.distribution!r}") from None
        _require(_is_num(self.delta) and self.delta >= 0, "noise.delta must be >= 0")
        _require(_is_num(self.nu) and self.nu >= 0, "noise.nu must be >= 0")
        _require(isinstance(self.normalize, bool), "noise.normalize must be a boolean")
        if self.distribution in ("uniform_separated", "uniform_band"):
            eps = self.resolved_epsilon()
            _require(eps is None or (_is_num(eps) and 0 < eps < 1),
                     "noise.epsilon must lie in (0, 1)")

    def resolved_epsilon(self):
        if self.epsilon is not None:
            return self.epsilon
        return self.delta if self.delta > 0 else None


@dataclass(frozen=True)
class GridConfig:
    alpha1: float = 0.1
    q: float = 0.5
    M: int = 20

    def validate(self):
        _require(_is_num(self.alpha1) and self.alpha1 > 0, "grid.alpha1 must be > 0")
        _require(_is_num(self.q) and 0 < self.q < 1, "grid.q must lie in (0, 1)")
        _require(_is_int(self.M) and self.M >= 2, "grid.M must be an integer >= 2")


@dataclass(frozen=True)
class RuleConfig:
    filter: str = "tikhonov"
    order: int = 1
    rel_tol: float = 1e-10
    aggregate_over: str = "active"
    iterated_within_active: bool = False

    def validate(self):
        _require(self.filter in ("tikhonov", "iterated_tikhonov"),
                 "rules.filter must be tikhonov or iterated_tikhonov")
        _require(_is_int(self.order) and self.order >= 1, "rules.order must be >= 1")
        _require(_is_num(self.rel_tol) and 0 < self.rel_tol < 1,
                 "rules.rel_tol must lie in (0, 1)")
        _require(self.aggregate_over in ("active", "all"),
                 "rules.aggregate_over must be active or all")
        _require(isinstance(self.iterated_within_active, bool),
                 "rules.iterated_within_active must be a boolean")

    def filter_family(self):
        if self.filter == "tikhonov":
            return FilterFamily.tikhonov()
        return FilterFamily.iterated_tikhonov(self.order)


@dataclass(frozen=True)
class RunConfig:
    n_runs: int = 10
    seed: int = 0
    out: Optional[str] = None
    formats: tuple = ("csv", "json")
    workers: int = 1
    figure_run: int = 0

    def validate(self):
        _require(_is_int(self.n_runs) and self.n_runs >= 1, "run.n_runs must be >= 1")
        _require(_is_int(self.seed) and 0 <= self.seed < 2 ** 64,
                 "run.seed must be an unsigned 64-bit integer")
        _require(set(self.formats) <= {"csv", "json"} and len(self.formats) > 0,
                 "run.formats must be a subset of [csv, json]")
        _require(_is_int(self.workers) and self.workers >= 1, "run.workers must be >= 1")
        _require(_is_int(self.figure_run) and 0 <= self.figure_run < self.n_runs,
                 "run.figure_run must index an existing run")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    rules: RuleConfig = field(default_factory=RuleConfig)
    run: RunConfig = field(default_factory=RunConfig)

    @classmethod
    def from_dict(cls, data) -> "ExperimentConfig":
        cfg = _from_dict(cls, data, "aggregate")
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = asdict(self)
        out["run"]["formats"] = list(self.run.formats)
        return out

    def validate(self):
        for part in (self.problem, self.noise, self.grid, self.rules, self.run):
            part.validate()

    def replace(self, **sections) -> "ExperimentConfig":
        """Copy with section overrides given as dicts, e.g. ``run={"n_runs": 3}``."""
        data = self.to_dict()
        for name, updates in sections.items():
            data[name].update(updates)
        return ExperimentConfig.from_dict(data)


# -- aggregation experiment --------------------------------------------------

@dataclass(frozen=True, eq=False)
class RunReport:
    run_index: int
    e_qo: float
    e_best: float
    e_qo2: float
    e_best2: float
    e_agg: float
    e_oracle: float
    ell: int
    k: int
    s: int
    kappa_indices: tuple
    solve_rank: int
    discarded_noise_energy: float
    curves: dict

    def row(self) -> dict:
        return {
            "run": self.run_index,
            **{name: getattr(self, name) for name in ERROR_NAMES},
            "e_oracle": self.e_oracle,
            "ell": self.ell,
            "k": self.k,
            "s": self.s,
            "solve_rank": self.solve_rank,
            "kappa_indices": " ".join(str(i) for i in self.kappa_indices),
            "discarded_noise_energy": self.discarded_noise_energy,
        }


def _sample(config: ExperimentConfig, run_index: int):
    p, nz = config.problem, config.noise
    lam = p.singular_values()
    k = np.arange(1, p.n + 1, dtype=np.float64)
    x = k ** (-p.mu) * make_rng(config.run.seed, run_index, 0).uniform(-1.0, 1.0, p.n)
    if nz.delta > 0:
        spec = NoiseSpec(kind="stochastic", nu=nz.nu, distribution=nz.distribution,
                         epsilon=nz.resolved_epsilon(), normalize_to_delta=nz.normalize)
        noise = generate_noise(spec, p.m, nz.delta,
                               rng=make_rng(config.run.seed, run_index, 1))
    else:
        noise = np.zeros(p.m)
    # components n..m-1 lie in Ran(T)^perp and are annihilated by T*
    discarded = float(noise[p.n:] @ noise[p.n:])
    return make_problem(lam, x, noise[:p.n], nz.delta), discarded


def run_single(config: ExperimentConfig, run_index: int) -> RunReport:
    """One realization: sample, select, correct, aggregate and measure."""
    problem, discarded = _sample(config, run_index)
    g = config.grid
    grid = ParameterGrid.build(problem, config.rules.filter_family(), g.alpha1, g.q, g.M)
    x = problem.x_true
    X = grid.matrix

    qo = qo_select(grid)
    ell = qo.chosen_index
    factors = correction_factors(grid, X[ell])
    stop = ell + 1 if config.rules.iterated_within_active else None
    it = iterated_qo_select(grid, factors, stop=stop)
    agg = aggregate(grid, grid.alphas[ell], config.rules.rel_tol, config.rules.aggregate_over)
    oracle = oracle_aggregate(grid, x, config.rules.rel_tol,
                              alpha_selected=grid.alphas[ell]
                              if config.rules.aggregate_over == "active" else None)

    error = np.linalg.norm(X - x, axis=1)
    error2 = np.linalg.norm(factors[:, None] * X - x, axis=1)
    curves = {
        "alpha": grid.alphas.copy(),
        "error": error,
        "error2": error2,
        "qo": qo.criterion_values,
        "qo2": it.criterion_values,
    }
    return RunReport(
        run_index=run_index,
        e_qo=float(error[ell]),
        e_best=float(error.min()),
        e_qo2=float(error2[it.chosen_index]),
        e_best2=float(error2.min()),
        e_agg=float(np.linalg.norm(x - agg.aggregate_coeffs)),
        e_oracle=float(np.linalg.norm(x - oracle.aggregate_coeffs)),
        ell=ell,
        k=it.chosen_index,
        s=agg.s,
        kappa_indices=tuple(int(i) for i in agg.functional_indices),
        solve_rank=agg.solve_rank,
        discarded_noise_energy=discarded,
        curves=curves,
    )


def _run_star(args):
    return run_single(*args)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    runs: tuple

    @property
    def summary(self) -> dict:
        means = {name: math.fsum(getattr(r, name) for r in self.runs) / len(self.runs)
                 for name in ERROR_NAMES + ("e_oracle",)}
        return {
            "n_runs": len(self.runs),
            "means": means,
            "mean_s": math.fsum(r.s for r in self.runs) / len(self.runs),
            "mean_solve_rank": math.fsum(r.solve_rank for r in self.runs) / len(self.runs),
            "mean_discarded_noise_energy":
                math.fsum(r.discarded_noise_energy for r in self.runs) / len(self.runs),
            "noise_reading": "normalized" if self.config.noise.normalize else "raw",
            "config": self.config.to_dict(),
        }

    def table(self, run_index: Optional[int] = None) -> str:
        """Plain-text table: mean of each error and its value in one run."""
        if run_index is None:
            run_index = self.config.run.figure_run
        means = self.summary["means"]
        run = self.runs[run_index]
        lines = [f"{'error':<10}{'mean value':>12}{f'run {run_index}':>12}"]
        for name in ERROR_NAMES:
            lines.append(f"{name:<10}{means[name]:>12.4f}{getattr(run, name):>12.4f}")
        return "\n".join(lines) + "\n"

    def runs_csv(self) -> str:
        buf = io.StringIO()
        rows = [r.row() for r in self.runs]
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v
                             for k, v in row.items()})
        return buf.getvalue()

    def summary_json(self) -> str:
        return json.dumps(self.summary, indent=2, sort_keys=True) + "\n"

    def runs_json(self) -> str:
        return json.dumps([r.row() for r in self.runs], indent=2, sort_keys=True) + "\n"

    def write(self, out_dir, formats: Sequence[str] = ("csv", "json")) -> list:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []

        def put(name, text):
            path = out / name
            path.write_text(text)
            written.append(path)

        if "csv" in formats:
            put("runs.csv", self.runs_csv())
            put(f"figure_run{self.config.run.figure_run}.csv",
                curves_csv(self.runs[self.config.run.figure_run].curves))
        if "json" in formats:
            put("runs.json", self.runs_json())
            put("summary.json", self.summary_json())
        put("table1.txt", self.table())
        return written


def run_aggregation_experiment(config: Optional[ExperimentConfig] = None) -> ExperimentResult:
    config = config or ExperimentConfig()
    config.validate()
    indices = range(config.run.n_runs)
    if config.run.workers > 1:
        with ProcessPoolExecutor(max_workers=config.run.workers) as pool:
            runs = tuple(pool.map(_run_star, [(config, i) for i in indices]))
    else:
        runs = tuple(run_single(config, i) for i in indices)
    return ExperimentResult(config, runs)


def _fmt(value):
    return "" if value is None or (isinstance(value, float) and math.isnan(value)) \
        else repr(float(value))


def curves_csv(curves: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = ("alpha", "error", "error2", "qo", "qo2")
    writer.writerow(cols)
    for row in zip(*(curves[c] for c in cols)):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def run_figure_curves(config: ExperimentConfig, run_index: int) -> str:
    """CSV ``alpha,error,error2,qo,qo2`` for one run; qo columns empty on row 0."""
    if not _is_int(run_index) or not 0 <= run_index < config.run.n_runs:
        raise BadRunIndex(f"run index {run_index!r} outside 0..{config.run.n_runs - 1}")
    return curves_csv(run_single(config, run_index).curves)


# -- rate study ---------------------------------------------------------------

@dataclass(frozen=True)
class RateStudyConfig:
    beta: float = 3.0
    n: int = 4000
    mu: float = 0.5
    gamma: float = 0.25
    nu: float = 2.0
    deltas: tuple = (1e-2, 1e-3, 1e-4, 1e-5)
    n_seeds: int = 20
    n_alpha: int = 400
    alpha_max: float = 1.0
    alpha_min: Optional[float] = None  # None: smallest eigenvalue of T*T
    signs: str = "random"
    normalize: bool = True
    seed: int = 0

    @classmethod
    def from_dict(cls, data) -> "RateStudyConfig":
        cfg = _from_dict(cls, data, "rates")
        cfg.validate()
        return cfg

    def validate(self):
        _require(_is_num(self.beta) and self.beta > 0, "rates.beta must be > 0")
        _require(_is_int(self.n) and self.n >= 2, "rates.n must be >= 2")
        _require(_is_num(self.mu) and self.mu > 0, "rates.mu must be > 0")
        _require(_is_num(self.gamma) and 0 <= self.gamma <= 0.5,
                 "rates.gamma must lie in [0, 1/2]")
        _require(self.mu + self.gamma <= 1, "rates: mu + gamma must be <= 1 for Tikhonov")
        _require(_is_int(self.n_seeds) and self.n_seeds >= 1, "rates.n_seeds must be >= 1")
        _require(_is_int(self.n_alpha) and self.n_alpha >= 2, "rates.n_alpha must be >= 2")
        _require(all(_is_num(d) and 0 < d < 1 for d in self.deltas),
                 "rates.deltas must lie in (0, 1)")
        _require(self.signs in ("random", "alternating", "positive"), "rates.signs invalid")
        if len(self.deltas) < 4 or math.log10(max(self.deltas) / min(self.deltas)) < 3:
            raise InsufficientSweep("need at least 4 noise levels spanning >= 3 decades")
        if sufficient_condition_verdict("mild", self.beta, self.nu) is not Verdict.HOLDS:
            raise ConfigError("rates: (beta, nu) violate the sufficient noise condition")
        if self.gamma > 0 and sufficient_condition_verdict(
                "mild", self.beta, self.nu, self.gamma, "power") is not Verdict.HOLDS:
            raise ConfigError("rates: (beta, nu, gamma) violate the weighted noise condition")

    def exponents(self) -> dict:
        mu, gam = self.mu, self.gamma
        return {
            "solution": 2 * mu * mu / (2 * mu + 1),
            "functional_alpha": 2 * mu * (mu + gam) / (2 * mu + 1),
            "functional_alpha_kappa": 2 * (mu + gam) ** 2 / (2 * mu + 1),
        }


@dataclass(frozen=True, eq=False)
class RateStudyResult:
    config: RateStudyConfig
    errors: dict  # delta -> (n_seeds, 3) array: solution, functional alpha, alpha_kappa
    slopes: dict
    exponents: dict

    def table_rows(self) -> list:
        rows = []
        for d in sorted(self.errors, reverse=True):
            e = self.errors[d]
            rows.append({"delta": d, "solution": float(e[:, 0].mean()),
                         "functional_alpha": float(e[:, 1].mean()),
                         "functional_alpha_kappa": float(e[:, 2].mean())})
        return rows

    def to_dict(self) -> dict:
        return {"config": asdict(self.config), "slopes": self.slopes,
                "exponents": self.exponents, "means": self.table_rows()}

    def text(self) -> str:
        lines = [f"{'quantity':<24}{'fitted slope':>14}{'theory':>10}"]
        for name in ("solution", "functional_alpha", "functional_alpha_kappa"):
            lines.append(f"{name:<24}{self.slopes[name]:>14.4f}{self.exponents[name]:>10.4f}")
        return "\n".join(lines) + "\n"


def fit_slope(log_delta, log_error) -> float:
    """Least-squares slope of ``log_error`` against ``log_delta``."""
    slope, _ = np.polyfit(np.asarray(log_delta, float), np.asarray(log_error, float), 1)
    return float(slope)


def run_rate_study(config: Optional[RateStudyConfig] = None) -> RateStudyResult:
    """Fit convergence slopes for the solution error and two functional errors.

    The exact solution and functional satisfy ``x = (T*T)**mu w`` and
    ``f = (T*T)**gamma u`` with random unit ``w``, ``u``.  Parameters come from
    minimizing ``psi`` and ``psi_kappa`` (``kappa(t) = t**gamma``) over a
    geometric grid bounded below by the smallest eigenvalue, since below it
    both functionals collapse to zero in finite dimension.
    """
    config = config or RateStudyConfig()
    config.validate()
    lam = mild_spectrum(config.n, config.beta)
    lam2 = lam * lam
    filt = FilterFamily.tikhonov()
    kappa = IndexFunction.power(config.gamma) if config.gamma > 0 else IndexFunction.constant()
    alpha_min = config.alpha_min if config.alpha_min is not None else float(lam2[-1])
    fine = np.geomspace(config.alpha_max, alpha_min, config.n_alpha)
    spec = NoiseSpec(kind="poly", nu=config.nu, signs=config.signs,
                     normalize_to_delta=config.normalize)

    errors = {d: np.empty((config.n_seeds, 3)) for d in config.deltas}
    for s in range(config.n_seeds):
        rng = make_rng(config.seed, s)
        w = rng.standard_normal(config.n)
        u = rng.standard_normal(config.n)
        x = lam2 ** config.mu * (w / np.linalg.norm(w))
        f = lam2 ** config.gamma * (u / np.linalg.norm(u))
        sign_rng_state = rng.bit_generator.state
        for d in config.deltas:
            rng.bit_generator.state = sign_rng_state  # same sign pattern for every delta
            noise = generate_noise(spec, config.n, d, rng=rng)
            problem = make_problem(lam, x, noise, d)
            a_psi, _ = grid_argmin_psi(problem, filt, None, fine)
            a_kap, _ = grid_argmin_psi(problem, filt, kappa, fine)
            xa = filtered_coeffs(lam, problem.y_noisy, filt, a_psi)
            xk = filtered_coeffs(lam, problem.y_noisy, filt, a_kap)
            errors[d][s] = (np.linalg.norm(xa - x), abs(f @ (xa - x)), abs(f @ (xk - x)))

    log_d = np.concatenate([np.full(config.n_seeds, math.log(d)) for d in config.deltas])
    slopes = {}
    for col, name in enumerate(("solution", "functional_alpha", "functional_alpha_kappa")):
        log_e = np.concatenate([np.log(errors[d][:, col]) for d in config.deltas])
        slopes[name] = fit_slope(log_d, log_e)
    return RateStudyResult(config, errors, slopes, config.exponents())


# -- noise-condition study ----------------------------------------------------

@dataclass(frozen=True)
class NoiseCase:
    name: str = "mild_gaussian"
    spectrum: str = "mild"
    param: float = 3.0
    nu: float = 2.0
    distribution: str = "gaussian"
    epsilon: Optional[float] = None
    n_max_list: tuple = (500, 1000, 2000)
    n_seeds: int = 50

    def validate(self):
        _require(self.spectrum in ("mild", "severe"), f"{self.name}: bad spectrum")
        _require(_is_int(self.n_seeds) and self.n_seeds >= 1, f"{self.name}: n_seeds >= 1")
        _require(len(self.n_max_list) >= 1 and all(_is_int(n) and n >= 1
                                                   for n in self.n_max_list),
                 f"{self.name}: n_max_list must hold positive integers")


DEFAULT_NOISE_CASES = (
    NoiseCase("mild_gaussian", "mild", 3.0, 2.0, "gaussian", None, (500, 1000, 2000), 50),
    NoiseCase("severe_gaussian", "severe", 0.9, 2.0, "gaussian", None, (100, 200, 400), 50),
    NoiseCase("severe_band", "severe", 0.9, 2.0, "uniform_band", 0.1, (100, 200, 400), 50),
)


@dataclass(frozen=True)
class NoiseStudyConfig:
    cases: tuple = DEFAULT_NOISE_CASES
    seed: int = 0

    @classmethod
    def from_dict(cls, data) -> "NoiseStudyConfig":
        data = dict(data or {})
        cases = data.pop("cases", None)
        cfg = _from_dict(cls, data, "noise")
        if cases is not None:
            parsed = tuple(_from_dict(NoiseCase, c, f"noise.cases[{i}]")
                           for i, c in enumerate(cases))
            cfg = cls(parsed, cfg.seed)
        cfg.validate()
        return cfg

    def validate(self):
        _require(_is_int(self.seed) and self.seed >= 0, "noise.seed must be >= 0")
        _require(len(self.cases) > 0, "noise.cases is empty")
        for case in self.cases:
            case.validate()


def run_noise_study(config: Optional[NoiseStudyConfig] = None) -> dict:
    """Growth tables of the median sup ratio, one per case."""
    config = config or NoiseStudyConfig()
    config.validate()
    tables = {}
    for i, case in enumerate(config.cases):
        spec = NoiseSpec(kind="stochastic", nu=case.nu, distribution=case.distribution,
                         epsilon=case.epsilon, seed=config.seed * 1000003 + i)
        tables[case.name] = stochastic_sup_ratio_study(
            case.spectrum, case.param, spec, case.n_max_list, case.n_seeds)
    return tables


def growth_csv(tables: dict) -> str:
    buf = io.StringIO()
    cols = ("case", "n_max", "dimension", "median", "max", "min", "median_kappa")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for name, rows in tables.items():
        for row in rows:
            writer.writerow([name] + [repr(row[c]) if isinstance(row[c], float) else row[c]
                                      for c in cols[1:]])
    return buf.getvalue()


def ratio_curve_csv(report) -> str:
    """CSV ``n,ratio_plain,ratio_kappa`` of a :class:`NoiseConditionReport`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("n", "ratio_plain", "ratio_kappa"))
    for n, p, q in report.to_rows():
        writer.writerow((n, repr(p), repr(q)))
    return buf.getvalue()


# -- SVD ingestion -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SvdData:
    """Singular values with solution (``kind="x"``) or data (``kind="y"``) coefficients."""

    singular_values: np.ndarray
    values: np.ndarray
    kind: str
    permutation: np.ndarray  # permutation[i] = input row of sorted entry i

    def to_problem(self, noise=None, delta: float = 0.0):
        if self.kind != "x":
            raise ConfigError("a problem needs solution coefficients (kind='x')")
        noise = np.zeros_like(self.values) if noise is None else noise
        return make_problem(self.singular_values, self.values, noise, delta)


def ingest_svd(path, kind: str = "x") -> SvdData:
    """Read ``lambda_k, value_k`` rows from a CSV file.

    Blank lines and ``#`` comments are skipped.  Unsorted spectra are sorted
    into nonincreasing order with a :class:`NonMonotoneSpectrum` warning.
    """
    if kind not in ("x", "y"):
        raise ConfigError("kind must be 'x' or 'y'")
    lam, val = [], []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 2:
                raise ParseError(f"expected 2 columns, got {len(parts)}", lineno)
            try:
                a, b = float(parts[0]), float(parts[1])
            except ValueError:
                raise ParseError(f"not a number in {text!r}", lineno) from None
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ParseError("non-finite value", lineno)
            if a <= 0:
                raise ParseError(f"singular value {a!r} is not positive", lineno)
            lam.append(a)
            val.append(b)
    if not lam:
        raise ParseError("no data rows")
    lam = np.asarray(lam)
    val = np.asarray(val)
    order = np.argsort(-lam, kind="stable")
    if np.any(np.diff(lam) > 0):
        warnings.warn("singular values were not nonincreasing; rows reordered",
                      NonMonotoneSpectrum, stacklevel=2)
    return SvdData(lam[order], val[order], kind, order)


def load_config_document(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {os.fspath(path)!r}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return doc
