"""Command-line entry point: ``quasiopt <subcommand> [options]``.

Exit status is 0 on success, 2 when the configuration is rejected and 3 when a
numeric computation fails.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import (BadRunIndex, ConfigError, InsufficientSweep, NonMonotoneSpectrum,
                     ParseError, QuasiOptError)
from .experiments import (ExperimentConfig, NoiseStudyConfig, RateStudyConfig,
                          growth_csv, ingest_svd, load_config_document,
                          run_aggregation_experiment, run_figure_curves, run_noise_study,
                          run_rate_study)
from .spectral import DEFAULT_CAPS, FilterFamily, IndexFunction, check_filter_assumptions

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _section(args, name):
    """Config section for a subcommand; a document without sections is used whole."""
    if args.config is None:
        return {}
    doc = load_config_document(args.config)
    sections = {"aggregate", "rates", "noise", "check_filter"}
    if sections & set(doc):
        return doc.get(name, {})
    return doc


def _write(out, name, text):
    path = Path(out) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def cmd_aggregate(args):
    data = {} if args.paper_table_1 and args.config is None else _section(args, "aggregate")
    data = json.loads(json.dumps(data))  # deep copy
    run = data.setdefault("run", {})
    if args.seed is not None:
        run["seed"] = args.seed
    if args.runs is not None:
        run["n_runs"] = args.runs
    if args.out is not None:
        run["out"] = args.out
    if args.format is not None:
        run["formats"] = [args.format]
    if args.workers is not None:
        run["workers"] = args.workers
    if args.figure_run is not None:
        run["figure_run"] = args.figure_run
    config = ExperimentConfig.from_dict(data)
    result = run_aggregation_experiment(config)
    sys.stdout.write(result.table())
    if config.run.out:
        for path in result.write(config.run.out, config.run.formats):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_figure(args):
    data = _section(args, "aggregate")
    run = data.setdefault("run", {})
    if args.seed is not None:
        run["seed"] = args.seed
    if args.runs is not None:
        run["n_runs"] = args.runs
    config = ExperimentConfig.from_dict(data)
    sys.stdout.write(run_figure_curves(config, args.run_index))
    return EXIT_OK


def cmd_rates(args):
    data = dict(_section(args, "rates"))
    if args.seed is not None:
        data["seed"] = args.seed
    if args.runs is not None:
        data["n_seeds"] = args.runs
    config = RateStudyConfig.from_dict(data)
    result = run_rate_study(config)
    sys.stdout.write(result.text())
    if args.out:
        if args.format in (None, "json"):
            _write(args.out, "rates.json",
                   json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")
        if args.format in (None, "csv"):
            rows = result.table_rows()
            lines = [",".join(rows[0])] + [",".join(repr(v) for v in r.values())
                                            for r in rows]
            _write(args.out, "rates.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_noise(args):
    data = dict(_section(args, "noise"))
    if args.seed is not None:
        data["seed"] = args.seed
    if args.runs is not None:
        data["cases"] = [dict(asdict(c), n_seeds=args.runs)
                         for c in NoiseStudyConfig.from_dict(data).cases]
    config = NoiseStudyConfig.from_dict(data)
    tables = run_noise_study(config)
    text = growth_csv(tables)
    sys.stdout.write(text)
    if args.out:
        if args.format in (None, "csv"):
            _write(args.out, "noise_growth.csv", text)
        if args.format in (None, "json"):
            _write(args.out, "noise_growth.json",
                   json.dumps(tables, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _index_function(spec, where):
    if spec is None:
        return None
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{where} must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "power":
        return IndexFunction.power(float(spec.get("exponent", 1.0)))
    if kind == "log":
        return IndexFunction.log(float(spec.get("exponent", 1.0)))
    if kind == "constant":
        return IndexFunction.constant()
    raise ConfigError(f"{where}.kind must be power, log or constant")


def _axis(spec, default, where):
    spec = spec or default
    try:
        return np.geomspace(float(spec["max"]), float(spec["min"]), int(spec["num"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where} needs numeric max, min, num: {exc}") from exc


def cmd_check_filter(args):
    data = dict(_section(args, "check_filter"))
    known = {"filter", "order", "phi", "kappa", "alpha_grid", "lambda_grid", "caps"}
    if set(data) - known:
        raise ConfigError(f"check_filter: unknown keys {sorted(set(data) - known)}")
    kind = data.get("filter", "tikhonov")
    if kind == "tikhonov":
        filt = FilterFamily.tikhonov()
    elif kind == "iterated_tikhonov":
        filt = FilterFamily.iterated_tikhonov(int(data.get("order", 2)))
    else:
        raise ConfigError("check_filter.filter must be tikhonov or iterated_tikhonov")
    phi = _index_function(data.get("phi", {"kind": "power", "exponent": 0.5}), "phi")
    kappa = _index_function(data.get("kappa", {"kind": "power", "exponent": 0.25}), "kappa")
    alphas = _axis(data.get("alpha_grid"), {"max": 1.0, "min": 1e-8, "num": 60}, "alpha_grid")
    lams = _axis(data.get("lambda_grid"), {"max": 1.0, "min": 1e-10, "num": 80},
                 "lambda_grid")
    caps = dict(DEFAULT_CAPS)
    caps.update(data.get("caps", {}))
    report = check_filter_assumptions(filt, alphas, lams, phi, kappa, caps)
    if args.format == "csv":
        print("name,measured,bound,sense,passed")
        for item in report.items.values():
            print(f"{item.name},{item.measured!r},{item.bound!r},{item.sense},{item.passed}")
    else:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_ingest(args):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonMonotoneSpectrum)
        svd = ingest_svd(args.file, kind=args.kind)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    payload = {"kind": svd.kind, "singular_values": svd.singular_values.tolist(),
               "values": svd.values.tolist(), "permutation": svd.permutation.tolist()}
    if args.format == "csv":
        lines = ["lambda,value,source_row"] + [
            f"{float(l)!r},{float(v)!r},{int(p) + 1}" for l, v, p in
            zip(svd.singular_values, svd.values, svd.permutation)]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(args.out, "ingested." + (args.format or "json"), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasiopt",
        description="Heuristic parameter choice, aggregation and noise-condition studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, runs=True):
        p.add_argument("--config", help="JSON configuration document")
        p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
        if runs:
            p.add_argument("--runs", type=int, help="number of runs / seeds")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"),
                       help="output format (default: both)")

    p = sub.add_parser("aggregate", help="aggregation study (mean-error table)")
    common(p)
    p.add_argument("--paper-table-1", action="store_true",
                   help="use the built-in default configuration")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--figure-run", type=int, help="run whose curves are written")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("figure", help="per-alpha curves of one run as CSV")
    common(p)
    p.add_argument("run_index", type=int)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("rates", help="convergence-rate fits over a delta sweep")
    common(p)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("noise", help="sup-ratio growth tables")
    common(p)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("check-filter", help="filter assumption report")
    p.add_argument("--config", help="JSON configuration document")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_check_filter)

    p = sub.add_parser("ingest", help="read a singular-system CSV")
    p.add_argument("file")
    p.add_argument("--kind", choices=("x", "y"), default="x")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InsufficientSweep, ParseError, BadRunIndex, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuasiOptError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
