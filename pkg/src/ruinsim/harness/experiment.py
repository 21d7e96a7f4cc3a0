"""Run an experiment grid and persist it as CSV."""

import csv
from dataclasses import astuple, dataclass, fields
import logging
import math
import os
import time

from .. import analysis, estimators

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResultRow:
    u: float
    series: str
    method: str
    n: int
    reps: int
    seed: int
    estimate: float
    psi_hat: float
    std_err: float
    ci_lo: float
    ci_hi: float
    beta_hat: float
    corr_hat: float
    heavy_tail_approx: float
    z_n: float
    bound_lo: float
    bound_hi: float
    wall_ms: float


CSV_HEADER = tuple(f.name for f in fields(ResultRow))


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(rows, path):
    """Write rows with 17 significant digits, header in declared field order."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(CSV_HEADER)
        for row in rows:
            out.writerow([_fmt(v) for v in astuple(row)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _context(rates, u, n):
    """Per-u columns shared by every estimator at that u."""
    ctx = {"heavy_tail_approx": float(analysis.heavy_tail_approx(rates, u))}
    ctx["bounds"] = analysis.psi_bounds(rates, u, n)
    ctx["z_n"] = {s: analysis.z_n(s, rates, u, n) for s in estimators.SERIES}
    return ctx


def run_experiment(config, workers=1, timing=False, write=True):
    """Evaluate every (u, estimator) pair of ``config``.

    One draw per series is shared by all methods and all u. A failing
    estimator yields a row of NaNs and the run goes on. ``wall_ms`` stays 0
    unless ``timing`` is set, so default output is byte-reproducible.
    """
    rates = config.rates()
    wanted = [k for k in estimators.ALL_KINDS if k in config.estimators]
    draws, tails = {}, {}
    for series in dict.fromkeys(k.series for k in wanted):
        draws[series] = estimators.simulate(series, rates, config.reps, config.seed, workers)
    rows = []
    for u in config.u_grid:
        ctx = _context(rates, u, config.n)
        for kind in wanted:
            start = time.perf_counter()
            try:
                if kind.method.startswith("ak") and kind.series not in tails:
                    tails[kind.series] = estimators.summand_tail(kind.series, rates)
                rem = estimators.estimate_remainder(
                    kind, rates, u, n=config.n, draw=draws[kind.series],
                    tail=tails.get(kind.series))
                psi = estimators.assemble_psi(kind.series, rates, u, rem)
                stats = (rem.estimate, psi.estimate, psi.std_err, psi.ci95[0], psi.ci95[1],
                         rem.beta_hat, rem.corr_hat)
            except Exception:
                log.exception("estimator %s failed at u=%g", kind.label, u)
                stats = (math.nan,) * 7
            wall = (time.perf_counter() - start) * 1e3 if timing else 0.0
            rows.append(ResultRow(
                float(u), kind.series, kind.method, config.n, config.reps, config.seed,
                *(float(s) for s in stats), ctx["heavy_tail_approx"],
                float(ctx["z_n"][kind.series]), float(ctx["bounds"][0]),
                float(ctx["bounds"][1]), float(wall)))
    if write and config.output_path:
        write_csv(rows, config.output_path)
    return rows


@dataclass(frozen=True)
class ConstantsRow:
    n: int
    ratio_new: float
    ratio_pk: float
    cross_cv: float
    cross_raw: float


def constants_report(config, n_list):
    """Asymptotic variance-ratio constants for each truncation order in ``n_list``."""
    rates = config.rates()
    out = []
    for n in n_list:
        c = analysis.variance_constants(rates, int(n))
        out.append(ConstantsRow(c.n, c.ratio_new, c.ratio_pk, c.cross_cv, c.cross_raw))
    return out
