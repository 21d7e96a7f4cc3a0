"""Closed-form companions of the simulation estimators.

Truncated-max approximations (the exact means of the max controls), error
bounds for the discard series, tail asymptotics and the asymptotic variance
constants of the control-variate estimators.
"""

from dataclasses import dataclass

import numpy as np

from . import model
from .exceptions import DomainError


def _check_series(series):
    if series not in ("new", "pk"):
        raise ValueError(f"series must be 'new' or 'pk', got {series!r}")


def _series_weights(series, rates, u):
    """(ratio, success, tail of one summand's mark) for the chosen series."""
    if series == "new":
        return rates.q, rates.r, rates.heavy.excess_ccdf(u)
    return rates.rho, 1.0 - rates.rho, model.ccdf_ce(rates, u)


def _max_exceeds(tail, k):
    # P(max of k iid > u) = 1 - (1 - tail)^k, without cancellation for small tail
    tail = float(tail)
    if tail >= 1.0:
        return np.ones(k.shape)
    return -np.expm1(k * np.log1p(-tail))


def z_n(series, rates, u, n):
    """Mean of the truncated-max control: success * sum_{k=2}^n ratio^k P(max_k > u)."""
    _check_series(series)
    if n < 1:
        raise DomainError("n must be at least 1")
    if u < 0:
        raise DomainError("u must be nonnegative")
    ratio, success, tail = _series_weights(series, rates, u)
    k = np.arange(2, n + 1)
    if k.size == 0:
        return 0.0
    return float(success * np.sum(ratio ** k * _max_exceeds(tail, k)))


def explicit_term(series, rates, u):
    """Part of psi(u) that is computed exactly rather than simulated."""
    _check_series(series)
    if series == "new":
        return rates.r * model.psi_d_exact(rates, u) + rates.r * rates.q * model.g1(rates, u)
    return (1.0 - rates.rho) * rates.rho * model.ccdf_ce(rates, u)


def error_bounds(rates, u, n):
    """Bounds (lower, upper) on R(u) - z_n(u) for the discard series."""
    if n < 2:
        raise DomainError("error bounds need n >= 2")
    q = rates.q
    lower = q ** (n + 1) * model.g1(rates, u)
    qf = q * rates.heavy.excess_cdf(u)
    upper = q ** (n + 1) + (1.0 - q) * qf ** 2 * (1.0 - qf ** (n - 1)) / (1.0 - qf)
    return float(lower), float(upper)


def psi_bounds(rates, u, n):
    """Bounds on psi(u): explicit part + z_n + error bounds."""
    centre = explicit_term("new", rates, u) + z_n("new", rates, u, n)
    lower, upper = error_bounds(rates, u, n)
    return centre + lower, centre + upper


def tail_factor(rates, n):
    """1 - (n+1) q^n + n q^(n+1): asymptotic underestimation of the n-th approximation."""
    if n < 1:
        raise DomainError("n must be at least 1")
    q = rates.q
    return 1.0 - (n + 1) * q ** n + n * q ** (n + 1)


def heavy_tail_approx(rates, u):
    """Large-u equivalent of psi(u): heavy_load / (1 - rho) * P(H_e > u)."""
    return rates.heavy_load / (1.0 - rates.rho) * rates.heavy.excess_ccdf(u)


def psi_n_asymptote(rates, u, n):
    return tail_factor(rates, n) * heavy_tail_approx(rates, u)


@dataclass(frozen=True)
class VarianceConstants:
    """Asymptotic (u -> inf) variance ratios at truncation order ``n``.

    ``ratio_new`` / ``ratio_pk``: control-variate variance over crude variance
    for each series. ``cross_cv``: new over PK, both with controls.
    ``cross_raw``: ratio_new / ratio_pk.
    """

    n: int
    ratio_new: float
    ratio_pk: float
    cross_cv: float
    cross_raw: float


def variance_constants(rates, n):
    if n < 1:
        raise DomainError("n must be at least 1")
    q, r, rho = rates.q, rates.r, rates.rho
    s = 1.0 - rho
    ratio_new = q ** (n - 1) * (1 + n * r) / (1 + r)
    ratio_pk = rho ** (n - 1) * (1 + n * s) / (1 + s)
    cross_cv = (q / rho) ** (n + 2) * (1 + n * r) / (1 + n * s)
    cross_raw = (q / rho) ** (n - 1) * (1 + n * r) / (1 + n * s) * (1 + s) / (1 + r)
    return VarianceConstants(n=n, ratio_new=ratio_new, ratio_pk=ratio_pk,
                             cross_cv=cross_cv, cross_raw=cross_raw)


def asym_var_new(rates, n, u, reps):
    """Large-u variance of the new-series control-variate estimator."""
    q, r = rates.q, rates.r
    return q ** (n + 3) * (1 + n * r) / r * rates.heavy.excess_ccdf(u) / reps


def asym_var_pk(rates, n, u, reps):
    """Large-u variance of the PK-series control-variate estimator."""
    rho = rates.rho
    return (rho ** (n + 3) * (1 + n * (1 - rho)) / (1 - rho)
            * (rates.heavy_load / rho) * rates.heavy.excess_ccdf(u) / reps)
