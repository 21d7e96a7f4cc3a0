import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from ruinsim import analysis, estimators, model
from ruinsim.exceptions import DomainError
from ruinsim.model import ModelParams, derive_rates


def z_n_loop(series, rates, u, n):
    if series == "new":
        ratio, success, tail = rates.q, rates.r, rates.heavy.excess_ccdf(u)
    else:
        ratio, success, tail = rates.rho, 1 - rates.rho, rates.mixture_excess.ccdf(u)
    return success * sum(ratio ** k * (1 - (1 - tail) ** k) for k in range(2, n + 1))


@pytest.mark.parametrize("series", ["new", "pk"])
@pytest.mark.parametrize("u", [0.0, 3.0, 1e3])
def test_z_n_matches_direct_sum(fig2_rates, series, u):
    assert analysis.z_n(series, fig2_rates, u, 100) == pytest.approx(z_n_loop(series, fig2_rates, u, 100), rel=1e-11)


def test_z_n_frozen_value(fig2_rates):
    # frozen from an mpmath evaluation of the sum at 50 digits
    assert analysis.z_n("new", fig2_rates, 0.0, 100) == pytest.approx(0.9055321873, rel=1e-9)


def test_z_n_small_tail_no_cancellation(fig2_rates):
    u = 1e12
    tail = fig2_rates.heavy.excess_ccdf(u)
    approx = fig2_rates.r * sum(k * fig2_rates.q ** k for k in range(2, 101)) * tail
    assert analysis.z_n("new", fig2_rates, u, 100) == pytest.approx(approx, rel=1e-6)


def test_boundary_degeneracy(fig2_rates):
    for n in (2, 10, 100):
        lo, hi = analysis.error_bounds(fig2_rates, 0.0, n)
        qn = fig2_rates.q ** (n + 1)
        assert lo == pytest.approx(qn, abs=1e-15) and hi == pytest.approx(qn, abs=1e-15)
        assert analysis.z_n("new", fig2_rates, 0.0, n) + qn == pytest.approx(fig2_rates.q ** 2, abs=1e-12)


def test_explicit_term_at_zero(fig2_rates):
    r = fig2_rates
    assert analysis.explicit_term("new", r, 0.0) + r.q ** 2 == pytest.approx(r.rho, abs=1e-14)
    assert analysis.explicit_term("pk", r, 0.0) + r.rho ** 2 == pytest.approx(r.rho, abs=1e-14)


def test_psi_bounds_ordered(fig2_rates):
    for u in [0.0, 1.0, 100.0, 1e5]:
        lo, hi = analysis.psi_bounds(fig2_rates, u, 50)
        assert 0 <= lo <= hi <= 1 + 1e-12


def test_bounds_bracket_simulated_remainder():
    # q = 0.25 here, so the bounds are tight enough to test against simulation
    rates = derive_rates(ModelParams.exp_pareto(3, 3, 1, 0.1, rho=0.7))
    draw = estimators.simulate("new", rates, 100_000, seed=12)
    n = 3
    for u in [1.0, 5.0, 20.0]:
        res = estimators.crude("new", rates, u, draw=draw)
        lo, hi = analysis.error_bounds(rates, u, n)
        zn = analysis.z_n("new", rates, u, n)
        assert zn + lo - 4 * res.std_err <= res.estimate <= zn + hi + 4 * res.std_err


def test_tail_factor(fig2_rates):
    assert analysis.tail_factor(fig2_rates, 100) == pytest.approx(0.9069904058, rel=1e-9)
    assert analysis.tail_factor(fig2_rates, 1) == pytest.approx((1 - fig2_rates.q) ** 2)
    with pytest.raises(DomainError):
        analysis.tail_factor(fig2_rates, 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.05, 0.98), st.integers(1, 400))
def test_tail_factor_monotone_in_n(eps, rho, n):
    rates = derive_rates(ModelParams.exp_pareto(3, 2, 1, eps, rho=rho))
    a, b = analysis.tail_factor(rates, n), analysis.tail_factor(rates, n + 1)
    assert 0 <= a <= b + 1e-15 <= 1 + 1e-15


def test_heavy_tail_approx(fig2_rates):
    assert analysis.heavy_tail_approx(fig2_rates, 1e6) == pytest.approx(24.75 / (1 + 1e6))
    assert analysis.psi_n_asymptote(fig2_rates, 1e6, 100) == pytest.approx(
        0.9069904058 * 24.75 / (1 + 1e6), rel=1e-9)


def test_variance_constants(fig2_rates):
    c = analysis.variance_constants(fig2_rates, 100)
    assert c.ratio_new == pytest.approx(0.0931500788, rel=1e-9)
    assert c.ratio_pk == pytest.approx(0.7321378963, rel=1e-9)
    assert c.cross_cv == pytest.approx(0.1197578098, rel=1e-9)
    assert c.cross_raw == pytest.approx(0.1272302380, rel=1e-9)
    assert c.cross_raw == pytest.approx(c.ratio_new / c.ratio_pk, rel=1e-12)


def test_variance_constants_small_n(fig2_rates):
    q, r = fig2_rates.q, fig2_rates.r
    assert analysis.variance_constants(fig2_rates, 1).ratio_new == pytest.approx(1.0, abs=1e-15)
    assert analysis.variance_constants(fig2_rates, 2).ratio_new == pytest.approx(q * (1 + 2 * r) / (1 + r), rel=1e-14)


def test_cross_cv_is_ratio_of_asymptotic_variances(fig2_rates):
    n, u, reps = 100, 1e8, 1000
    ratio = analysis.asym_var_new(fig2_rates, n, u, reps) / analysis.asym_var_pk(fig2_rates, n, u, reps)
    assert ratio == pytest.approx(analysis.variance_constants(fig2_rates, n).cross_cv, rel=1e-12)


def test_bad_series(fig2_rates):
    with pytest.raises(ValueError):
        analysis.z_n("old", fig2_rates, 1.0, 10)
    with pytest.raises(DomainError):
        analysis.z_n("new", fig2_rates, -1.0, 10)
    with pytest.raises(DomainError):
        analysis.error_bounds(fig2_rates, 1.0, 1)
