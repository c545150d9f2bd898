"""Command-line surface.

Subcommands: distance, bound, discretize, dpm-fit, simulate, diagnose.
Each one is a thin binding over the library; outputs are bit-identical to
calling the functions directly.  Exit codes: 0 success, 1 usage error,
2 data error, 3 hypothesis or bound-precondition failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .dpm import ChainConfig, DpmConfig, moment_diagnostic, run_chain, tail_mass_diagnostic
from .dyadic_bounds import (
    ApproximationUndefinedError,
    TailHypothesisError,
    bound_combined,
    bound_compact,
    bound_unbounded,
)
from .experiments import StudyConfig, StudyError, run_study
from .measures import DiscreteMeasure, SortedSample
from .reference import (
    DISTRIBUTION_NAMES,
    approx_error_bound,
    by_name,
    discretize,
    error_bound_table,
    write_error_bound_csv,
)
from .wasserstein import w_infty, wp_quantile


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _parse_order(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        p = float(text)
    except ValueError as exc:
        raise UsageError(f"invalid order {text!r}") from exc
    if p < 1.0:
        raise UsageError("order p must be >= 1")
    return p


def _read_column_csv(path: str) -> np.ndarray:
    """Single-column CSV of reals; a non-numeric first row is a header."""
    values: list[float] = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if i == 0:
                    continue
                raise ValueError(f"{path}: malformed row {row!r}")
    if not values:
        raise ValueError(f"{path}: no data")
    return np.array(values)


def _write_column_csv(path: str | Path, values: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value"])
        for v in values.tolist():
            writer.writerow([repr(v)])


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_distance(args) -> int:
    p = _parse_order(args.p)
    a = DiscreteMeasure.from_csv(args.a)
    b = DiscreteMeasure.from_csv(args.b)
    if math.isinf(p):
        if args.power:
            raise UsageError("--power has no meaning for p = inf")
        print(_fmt(w_infty(a, b)))
        return 0
    power = wp_quantile(a, b, p)
    print(_fmt(power if args.power else power ** (1.0 / p)))
    return 0


def _cmd_bound(args) -> int:
    p = _parse_order(args.p)
    if math.isinf(p):
        raise UsageError("bounds are defined for finite orders")
    a = DiscreteMeasure.from_csv(args.a)
    b = DiscreteMeasure.from_csv(args.b)
    if args.mode == "compact":
        if args.L is None:
            raise UsageError("compact mode needs --L")
        report = bound_compact(a, b, args.L, p)
    elif args.mode == "unbounded":
        if args.L is None:
            report = bound_unbounded(a, b, p, inner="exact")
        else:
            report = bound_unbounded(a, b, p, inner="recursive", L=args.L)
    else:
        missing = [
            flag
            for flag, val in (
                ("--L", args.L), ("--M", args.M),
                ("--delta", args.delta), ("--K", args.K),
            )
            if val is None
        ]
        if missing:
            raise UsageError(f"combined mode needs {' '.join(missing)}")
        report = bound_combined(a, b, args.L, args.M, p, args.delta, args.K)
    print(report.to_json(indent=2))
    return 0


def _cmd_discretize(args) -> int:
    if args.error_table is not None:
        names = list(DISTRIBUTION_NAMES) if args.dist == "all" else [args.dist]
        p_values = [_parse_order(tok) for tok in args.p_values.split(",")]
        m_values = [int(tok) for tok in args.M_values.split(",")]
        write_error_bound_csv(args.error_table, error_bound_table(names, p_values, m_values))
        return 0
    if args.M is None:
        raise UsageError("need --M (or --error-table)")
    dist = by_name(args.dist)
    qm = discretize(dist, args.M)
    out = args.out or f"qm_{args.dist}_{args.M}.csv"
    qm.to_csv(out)
    if args.error_bound:
        if args.p is None:
            raise UsageError("--error-bound needs --p")
        print(_fmt(approx_error_bound(dist, args.M, _parse_order(args.p))))
    return 0


def _cmd_dpm_fit(args) -> int:
    values = _read_column_csv(args.data)
    data = SortedSample(np.sort(values))
    config = DpmConfig(
        mixture=args.mixture,
        mu_H=args.mu_H,
        sigma_H=args.sigma_H,
        beta=args.beta,
        lam=args.lam,
        beta_alpha=args.beta_alpha,
        lam_alpha=args.lam_alpha,
        fixed_sigma2=args.fixed_sigma,
    )
    chain = ChainConfig(
        burn_in=args.burnin, n_draws=args.draws, thinning=args.thinning, seed=args.seed
    )
    draws, diagnostics = run_chain(data, config, chain)
    prefix = args.out_prefix
    _write_column_csv(f"{prefix}_predictive.csv", draws)
    with open(f"{prefix}_diagnostics.json", "w") as fh:
        fh.write(diagnostics.to_json(indent=2))
        fh.write("\n")
    return 0


def _cmd_simulate(args) -> int:
    config = StudyConfig.from_json(args.config)
    if args.workers is not None:
        config = StudyConfig.from_dict({**config.to_dict(), "workers": args.workers})
    run_study(config)
    out = Path(config.out)
    print(str(out / "results.csv"))
    print(str(out / "summary.csv"))
    return 0


def _cmd_diagnose(args) -> int:
    values = _read_column_csv(args.sample)
    from .measures import empirical_from_sample

    measure = empirical_from_sample(SortedSample(np.sort(values)))
    p = _parse_order(args.p)
    report = tail_mass_diagnostic(measure, p, args.m_max)
    payload = {
        "p": p,
        "delta": args.delta,
        "tail_mass": report.to_dict(),
        "moment_order": 2.0 * p + args.delta,
        "moment": moment_diagnostic(measure, p, args.delta),
    }
    print(json.dumps(payload, indent=2))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="wass1d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("distance", help="exact W_p between two measure CSVs")
    d.add_argument("--p", required=True, help="order in [1, inf); 'inf' for W_infinity")
    d.add_argument("--a", required=True, help="first measure CSV (atom,weight)")
    d.add_argument("--b", required=True, help="second measure CSV (atom,weight)")
    d.add_argument("--power", action="store_true", help="print W_p^p instead of W_p")
    d.set_defaults(func=_cmd_distance)

    b = sub.add_parser("bound", help="multiscale upper bound report (JSON)")
    b.add_argument("--mode", required=True, choices=("compact", "unbounded", "combined"))
    b.add_argument("--p", required=True)
    b.add_argument("--L", type=int)
    b.add_argument("--M", type=int)
    b.add_argument("--delta", type=float)
    b.add_argument("--K", type=float)
    b.add_argument("--a", required=True)
    b.add_argument("--b", required=True)
    b.set_defaults(func=_cmd_bound)

    q = sub.add_parser("discretize", help="write the quantile-grid measure Q_M")
    q.add_argument("--dist", required=True,
                   help=f"one of {', '.join(DISTRIBUTION_NAMES)} (or 'all' with --error-table)")
    q.add_argument("--M", type=int)
    q.add_argument("--out", help="output CSV path (default qm_<dist>_<M>.csv)")
    q.add_argument("--error-bound", action="store_true",
                   help="also print the discretization error bound (needs --p)")
    q.add_argument("--p")
    q.add_argument("--error-table",
                   help="write a dist,p,M,error_bound CSV over --p-values x --M-values")
    q.add_argument("--p-values", default="1,2", dest="p_values")
    q.add_argument("--M-values", default="16,32,64,128,256,512,1024,2048,4096",
                   dest="M_values")
    q.set_defaults(func=_cmd_discretize)

    f = sub.add_parser("dpm-fit", help="fit the mixture, write predictive draws")
    f.add_argument("--data", required=True, help="single-column CSV of observations")
    f.add_argument("--mixture", default="location", choices=("location", "location-scale"))
    f.add_argument("--burnin", type=int, default=1000)
    f.add_argument("--draws", type=int, default=10_000)
    f.add_argument("--thinning", type=int, default=1)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--fixed-sigma", type=float, default=None,
                   help="pin the kernel variance (location variant)")
    f.add_argument("--mu-H", type=float, default=0.0, dest="mu_H")
    f.add_argument("--sigma-H", type=float, default=1.0, dest="sigma_H")
    f.add_argument("--beta", type=float, default=1.0)
    f.add_argument("--lam", type=float, default=1.0)
    f.add_argument("--beta-alpha", type=float, default=1.0, dest="beta_alpha")
    f.add_argument("--lam-alpha", type=float, default=1.0, dest="lam_alpha")
    f.add_argument("--out-prefix", default="dpm")
    f.set_defaults(func=_cmd_dpm_fit)

    s = sub.add_parser("simulate", help="run a study from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int, default=None,
                   help="override the config's worker count")
    s.set_defaults(func=_cmd_simulate)

    g = sub.add_parser("diagnose", help="tail-mass profile and moment diagnostic")
    g.add_argument("--sample", required=True, help="single-column CSV")
    g.add_argument("--p", required=True)
    g.add_argument("--delta", type=float, default=1.0)
    g.add_argument("--m-max", type=int, default=10, dest="m_max")
    g.set_defaults(func=_cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (TailHypothesisError, ApproximationUndefinedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except StudyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
