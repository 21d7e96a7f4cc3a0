"""Monte Carlo estimators of the simulated remainder R(u) and of psi(u).

Two series (``"new"``: discard series, ``"pk"``: Pollaczek-Khinchine) times
four methods: crude indicator, truncated-max control variate (``cv_max``),
conditional Monte Carlo (``ak``) and conditional Monte Carlo with the
summand-count control (``ak_cv``).

Replications are drawn in fixed-size blocks, each from its own substream, so
the sample (and hence every estimate) is identical for any worker count.
One draw of the series variable serves every method and every ``u``.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
import math

import numpy as np

from . import analysis, model
from .exceptions import DomainError, InsufficientSampleError
from .rng import rng_substream

SERIES = ("new", "pk")
METHODS = ("crude", "cv_max", "ak", "ak_cv")
BLOCK_SIZE = 2048
Z95 = 1.959963984540054


@dataclass(frozen=True)
class EstimatorKind:
    series: str
    method: str

    def __post_init__(self):
        if self.series not in SERIES:
            raise ValueError(f"unknown series {self.series!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def label(self):
        return f"{self.series}_{self.method}"

    @classmethod
    def parse(cls, label):
        series, _, method = label.strip().partition("_")
        return cls(series, method)


ALL_KINDS = tuple(EstimatorKind(s, m) for s in SERIES for m in METHODS)


@dataclass
class SampleBatch:
    """Paired replicate values Y (target) and optional Z (control, mean EZ)."""

    Y: np.ndarray
    Z: np.ndarray = None
    EZ: float = None

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float)
        if self.Z is not None:
            self.Z = np.asarray(self.Z, dtype=float)
            if self.Z.shape != self.Y.shape:
                raise ValueError("Y and Z must be paired arrays of equal length")
            if self.EZ is None:
                raise ValueError("a control needs its exact mean EZ")


@dataclass
class EstimatorResult:
    estimate: float
    std_err: float
    ci95: tuple
    beta_hat: float
    corr_hat: float
    reps: int
    meta: dict = field(default_factory=dict)

    @property
    def variance(self):
        """Empirical variance of one replicate of the estimator."""
        return self.std_err ** 2 * self.reps

    def shifted(self, offset, **meta):
        est = self.estimate + offset
        return EstimatorResult(est, self.std_err, (est - Z95 * self.std_err, est + Z95 * self.std_err),
                               self.beta_hat, self.corr_hat, self.reps, {**self.meta, **meta})


def _result(values, beta, corr, meta):
    reps = values.shape[0]
    est = float(np.mean(values))
    # a constant sample has exactly zero spread; np.std would leave round-off
    if reps > 1 and np.ptp(values) > 0:
        se = float(np.std(values, ddof=1) / math.sqrt(reps))
    else:
        se = 0.0
    return EstimatorResult(est, se, (est - Z95 * se, est + Z95 * se), beta, corr, reps, dict(meta))


def cv_combine(batch, beta_fallback=0.0, meta=None):
    """Regression control-variate estimate Ybar + beta (Zbar - EZ).

    ``beta_fallback`` is used when the control has zero sample variance.
    """
    meta = meta or {}
    Y = batch.Y
    if batch.Z is None:
        if Y.shape[0] < 1:
            raise InsufficientSampleError("need at least one replication")
        return _result(Y, 0.0, 0.0, meta)
    if Y.shape[0] < 2:
        raise InsufficientSampleError("a control variate needs at least two replications")
    dy = Y - Y.mean()
    dz = batch.Z - batch.Z.mean()
    szz = float(dz @ dz)
    syy = float(dy @ dy)
    syz = float(dy @ dz)
    beta = -syz / szz if szz > 0 else float(beta_fallback)
    corr = syz / math.sqrt(szz * syy) if szz > 0 and syy > 0 else 0.0
    corr = min(max(corr, -1.0), 1.0)
    return _result(Y + beta * (batch.Z - batch.EZ), beta, corr, meta)


def _series_weight(series, rates):
    return rates.q ** 2 if series == "new" else rates.rho ** 2


def _simulate_block(series, rates, seed, block):
    index, size = block
    rng = rng_substream(seed, index, tag=SERIES.index(series))
    sampler = model.sample_v_new if series == "new" else model.sample_v_pk
    return sampler(rates, rng, size)


def simulate(series, rates, reps, seed, workers=1):
    """Draw ``reps`` replications of the series variable."""
    if series not in SERIES:
        raise ValueError(f"unknown series {series!r}")
    if reps < 1:
        raise InsufficientSampleError("reps must be positive")
    blocks = [(i, min(BLOCK_SIZE, reps - i * BLOCK_SIZE))
              for i in range(math.ceil(reps / BLOCK_SIZE))]
    work = partial(_simulate_block, series, rates, seed)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(blocks))) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    return model.SeriesDraw.concat(parts)


def _check_u(u):
    u = float(u)
    if not (u >= 0 and math.isfinite(u)):
        raise DomainError("u must be finite and nonnegative")
    return u


def _draw_for(series, rates, reps, seed, workers, draw):
    return draw if draw is not None else simulate(series, rates, reps, seed, workers)


def crude_values(series, rates, draw, u):
    return _series_weight(series, rates) * (draw.total > u)


def max_control_values(series, rates, draw, u, n):
    hit = (draw.heavy_max > u) & (draw.count + 2 <= n)
    return _series_weight(series, rates) * hit


def summand_tail(series, rates, method="auto"):
    """Vectorised tail of one summand: D for the discard series, C_e for PK."""
    if series == "new":
        return model.d_tail_function(rates, method)
    return lambda x: rates.mixture_excess.ccdf(np.asarray(x, dtype=float))


def ak_values(series, rates, draw, u, tail):
    """Conditional MC kernel w (N) F(max(M_{N-1}, u - D_0 - S_{N-1})), N = count + 2."""
    thresholds = np.maximum(draw.lead_max, u - draw.base - draw.lead_sum)
    return _series_weight(series, rates) * (draw.count + 2) * tail(thresholds)


def crude(series, rates, u, reps=10_000, seed=0, workers=1, draw=None):
    """Crude estimate of R(u) from the indicator of {V > u}."""
    u = _check_u(u)
    draw = _draw_for(series, rates, reps, seed, workers, draw)
    return cv_combine(SampleBatch(crude_values(series, rates, draw, u)),
                      meta={"series": series, "method": "crude"})


def cv_max(series, rates, u, n=100, reps=10_000, seed=0, workers=1, draw=None):
    """R(u) with the truncated-max indicator as control variate."""
    u = _check_u(u)
    if n < 2:
        raise DomainError("cv_max needs truncation order n >= 2")
    draw = _draw_for(series, rates, reps, seed, workers, draw)
    Y = crude_values(series, rates, draw, u)
    Z = max_control_values(series, rates, draw, u, n)
    EZ = analysis.z_n(series, rates, u, n)
    # With a degenerate sample the regression slope is undefined; fall back to
    # the exact optimum -P(V <= u)/P(W <= u), with P(V <= u) estimated by Ybar.
    w = _series_weight(series, rates)
    fallback = -(w - float(Y.mean())) / (w - EZ)
    return cv_combine(SampleBatch(Y, Z, EZ), beta_fallback=fallback,
                      meta={"series": series, "method": "cv_max", "n": n})


def ak(series, rates, u, reps=10_000, seed=0, with_count_cv=False, workers=1,
       draw=None, tail=None):
    """Conditional Monte Carlo estimate of R(u), optionally with the count control."""
    u = _check_u(u)
    draw = _draw_for(series, rates, reps, seed, workers, draw)
    tail = tail or summand_tail(series, rates)
    Y = ak_values(series, rates, draw, u, tail)
    method = "ak_cv" if with_count_cv else "ak"
    meta = {"series": series, "method": method}
    if not with_count_cv:
        return cv_combine(SampleBatch(Y), meta=meta)
    w = _series_weight(series, rates)
    tail_u = float(tail(np.array([u]))[0])
    mean_count = rates.mean_count_new if series == "new" else rates.mean_count_pk
    Z = w * (draw.count + 2) * tail_u
    EZ = w * (mean_count + 2.0) * tail_u
    return cv_combine(SampleBatch(Y, Z, EZ), meta=meta)


def assemble_psi(series, rates, u, result):
    """Add the exactly known part of the series to an estimate of R(u)."""
    return result.shifted(analysis.explicit_term(series, rates, u), quantity="psi")


def estimate_remainder(kind, rates, u, n=100, reps=10_000, seed=0, workers=1,
                       draw=None, tail=None):
    """Estimate R(u) with any of the eight estimator kinds."""
    if kind.method == "crude":
        return crude(kind.series, rates, u, reps, seed, workers, draw)
    if kind.method == "cv_max":
        return cv_max(kind.series, rates, u, n, reps, seed, workers, draw)
    return ak(kind.series, rates, u, reps, seed, kind.method == "ak_cv", workers, draw, tail)


def estimate_psi(kind, rates, u, n=100, reps=10_000, seed=0, workers=1,
                 draw=None, tail=None):
    """Estimate psi(u); the standard error is that of the simulated remainder."""
    res = estimate_remainder(kind, rates, u, n, reps, seed, workers, draw, tail)
    return assemble_psi(kind.series, rates, u, res)
