"""Command line entry point: ``ruinsim estimate|experiment|constants``."""

import argparse
import csv
from dataclasses import astuple, fields, replace
import logging
import os
import sys

from ..estimators import EstimatorKind
from ..exceptions import RuinSimError, ConfigError
from .config import ExperimentConfig, load_config, preset, validate, PRESETS
from .experiment import constants_report, run_experiment, write_csv

WORKERS_ENV = "RUINSIM_WORKERS"


def resolve_workers(flag):
    """RUINSIM_WORKERS, when set, wins over ``--workers``."""
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}={env!r} is not an integer", key=WORKERS_ENV) from None
    else:
        value = 1 if flag is None else flag
    if value < 1:
        raise ConfigError("worker count must be at least 1", key="workers")
    return value


def _common(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--out", help="output CSV (a directory for multi-panel presets)")
    p.add_argument("--workers", type=int)


def _model_flags(p):
    p.add_argument("--config", help="INI experiment file")
    p.add_argument("--mu", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--n", type=int, help="truncation order")


def build_parser():
    parser = argparse.ArgumentParser(prog="ruinsim", description=(
        "Ruin probabilities for Cramer-Lundberg models with mixed light/heavy claims."))
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="one estimator at one initial capital")
    est.add_argument("--u", type=float, required=True)
    est.add_argument("--series", choices=("new", "pk"), default="new")
    est.add_argument("--method", choices=("crude", "cv_max", "ak", "ak_cv"), default="cv_max")
    _model_flags(est)
    _common(est)

    exp = sub.add_parser("experiment", help="run a preset or configured grid")
    src = exp.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--config")
    exp.add_argument("--timing", action="store_true", help="record wall_ms (breaks byte-identity)")
    _common(exp)

    con = sub.add_parser("constants", help="asymptotic variance-ratio constants")
    con.add_argument("--n", required=True, help="comma-separated truncation orders")
    con.add_argument("--config")
    con.add_argument("--out")
    for name in ("mu", "a", "b", "epsilon", "rho"):
        con.add_argument(f"--{name}", type=float)
    con.add_argument("--lambda", dest="lam", type=float)
    return parser


def _model_config(args):
    base = load_config(args.config) if args.config else ExperimentConfig(rho=0.99)
    changes = {k: getattr(args, k, None) for k in ("mu", "a", "b", "epsilon", "n", "seed", "reps")}
    if args.lam is not None:
        changes["lam"] = args.lam
        base = replace(base, rho=None)
    if args.rho is not None:
        changes["rho"] = args.rho
        if args.lam is None:
            base = replace(base, lam=None)
    return base.with_overrides(**changes)


def _emit(header, rows, out):
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    finally:
        if out:
            fh.close()


def cmd_estimate(args):
    kind = EstimatorKind(args.series, args.method)
    cfg = _model_config(args)
    cfg = validate(replace(cfg, u_grid=(args.u,), estimators=(kind,), output_path=args.out))
    rows = run_experiment(cfg, workers=resolve_workers(args.workers), write=bool(args.out))
    if not args.out:
        _emit([f.name for f in fields(rows[0])], [astuple(r) for r in rows], None)
    return 0


def cmd_experiment(args):
    workers = resolve_workers(args.workers)
    configs = preset(args.preset) if args.preset else (load_config(args.config),)
    multi = len(configs) > 1
    for cfg in configs:
        if args.out:
            path = os.path.join(args.out, f"{cfg.name}.csv") if multi else args.out
        else:
            path = cfg.output_path or f"{cfg.name}.csv"
        cfg = cfg.with_overrides(seed=args.seed, reps=args.reps)
        cfg = replace(cfg, output_path=path)
        rows = run_experiment(cfg, workers=workers, timing=args.timing, write=False)
        write_csv(rows, path)
        print(f"wrote {len(rows)} rows to {path}")
    return 0


def cmd_constants(args):
    try:
        n_list = [int(x) for x in args.n.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--n expects integers, got {args.n!r}", key="n") from None
    if not n_list or min(n_list) < 1:
        raise ConfigError("--n values must be positive", key="n")
    args.n, args.seed, args.reps = None, None, None
    cfg = _model_config(args)
    rows = constants_report(cfg, n_list)
    _emit([f.name for f in fields(rows[0])], [astuple(r) for r in rows], args.out)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"estimate": cmd_estimate, "experiment": cmd_experiment,
               "constants": cmd_constants}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"ruinsim: error{key}: {exc}", file=sys.stderr)
        return 2
    except (RuinSimError, ValueError) as exc:
        print(f"ruinsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
