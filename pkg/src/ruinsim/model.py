"""Cramer-Lundberg model with a light phase-type / heavy mixture claim law.

The discard model drops every heavy claim; its maximum claim surplus ``M_d``
is a zero-modified phase-type variable, so its tail is explicit. The ruin
probability of the full model is a geometric mixture of tails of sums of
independent copies of ``M_d`` and of the heavy stationary-excess variable.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .dists import GeometricLaw, MixtureExcess, PhaseType, ShiftedPareto
from .exceptions import DomainError, NetProfitError, ValidationError
from .numerics import QuadratureSpec, expi, expi_scaled, mat_exp, tail_of_sum


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Model inputs. Supply exactly one of ``lam`` (arrival rate) or ``rho``."""

    epsilon: float
    light: PhaseType
    heavy: object
    lam: float = None
    rho: float = None

    @classmethod
    def exp_pareto(cls, mu, a, b=1.0, epsilon=0.1, rho=None, lam=None):
        """Exponential(mu) light claims mixed with shifted Pareto(a, b) heavy claims."""
        return cls(epsilon=epsilon, light=PhaseType.exponential(mu),
                   heavy=ShiftedPareto(a, b), lam=lam, rho=rho)


@dataclass(frozen=True, eq=False)
class DerivedRates:
    params: ModelParams
    lam: float
    rho: float
    rho_d: float
    heavy_load: float
    q: float
    r: float
    alpha_plus: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)

    @property
    def epsilon(self):
        return self.params.epsilon

    @property
    def light(self):
        return self.params.light

    @property
    def heavy(self):
        return self.params.heavy

    @property
    def lam_d(self):
        return (1.0 - self.epsilon) * self.lam

    @cached_property
    def exit_Q(self):
        return -self.Q.sum(axis=1)

    @cached_property
    def mixture_excess(self):
        """Stationary excess of the full claim law."""
        return MixtureExcess(self.light, self.heavy, self.rho_d / self.rho)

    @property
    def geometric_new(self):
        return GeometricLaw(self.r)

    @property
    def geometric_pk(self):
        return GeometricLaw(1.0 - self.rho)

    @property
    def mean_count_new(self):
        """E[G] = heavy_load / (1 - rho)."""
        return self.heavy_load / (1.0 - self.rho)

    @property
    def mean_count_pk(self):
        return self.rho / (1.0 - self.rho)


def ladder_representation(lam, claim):
    """(alpha_plus, Q) with P(M > u) = alpha_plus exp(Q u) e for PH claims."""
    alpha = lam * claim.pi @ np.linalg.inv(-claim.T)
    Q = claim.T + np.outer(claim.exit, alpha)
    return alpha, Q


def derive_rates(params):
    """Traffic intensities and the discard-model ladder representation."""
    eps = params.epsilon
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"epsilon={eps} must lie in (0, 1)")
    if (params.lam is None) == (params.rho is None):
        raise ValidationError("supply exactly one of lam and rho")
    mu_p = params.light.mean
    mu_h = params.heavy.mean
    if not (math.isfinite(mu_h) and mu_h > 0):
        raise ValidationError("heavy claims need a finite positive mean")
    mean_claim = (1.0 - eps) * mu_p + eps * mu_h
    if params.rho is not None:
        rho = float(params.rho)
        if not rho > 0:
            raise ValidationError(f"rho={rho} must be positive")
        lam = rho / mean_claim
    else:
        lam = float(params.lam)
        if not lam > 0:
            raise ValidationError(f"lam={lam} must be positive")
        rho = lam * mean_claim
    if rho >= 1.0:
        raise NetProfitError(f"rho={rho} violates the net profit condition rho < 1")
    rho_d = (1.0 - eps) * lam * mu_p
    heavy_load = eps * lam * mu_h
    q = heavy_load / (1.0 - rho_d)
    r = (1.0 - rho) / (1.0 - rho_d)
    alpha, Q = ladder_representation((1.0 - eps) * lam, params.light)
    return DerivedRates(params=params, lam=lam, rho=rho, rho_d=rho_d,
                        heavy_load=heavy_load, q=q, r=r, alpha_plus=alpha, Q=Q)


def ph_ruin_probability(lam, claim, u):
    """Exact ruin probability for Poisson(lam) arrivals and phase-type claims."""
    if lam * claim.mean >= 1.0:
        raise NetProfitError("lam * E[claim] must be below 1")
    alpha, Q = ladder_representation(lam, claim)
    return _zero_modified_tail(alpha, Q, u)


def _zero_modified_tail(alpha, Q, u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("u must be nonnegative")
    vals = (alpha @ mat_exp(Q, u)).sum(axis=-1)
    return float(vals) if u.ndim == 0 else vals


def _zero_modified_density(alpha, Q, x):
    x = np.asarray(x, dtype=float)
    vals = alpha @ mat_exp(Q, x) @ (-Q.sum(axis=1))
    return float(vals) if x.ndim == 0 else vals


def psi_d_exact(rates, u):
    """Ruin probability of the discard model, alpha_plus exp(Q u) e."""
    return _zero_modified_tail(rates.alpha_plus, rates.Q, u)


def md_density(rates, x):
    """Density of M_d on (0, inf); it integrates to rho_d."""
    return _zero_modified_density(rates.alpha_plus, rates.Q, x)


def _two_md_representation(rates):
    # M_d + M_d: run one copy of the (defective) ladder chain, then the next
    a, Q = rates.alpha_plus, rates.Q
    p = Q.shape[0]
    q0 = rates.exit_Q
    G = np.zeros((2 * p, 2 * p))
    G[:p, :p] = Q
    G[:p, p:] = np.outer(q0, a)
    G[p:, p:] = Q
    init = np.concatenate([a, (1.0 - rates.rho_d) * a])
    return init, G


def sample_md(rates, rng, size=None):
    """M_d as a Geom(1 - rho_d) compound of light stationary-excess draws."""
    n = 1 if size is None else int(size)
    counts = rng.geometric(1.0 - rates.rho_d, n) - 1
    light = rates.light
    if light.is_exponential:
        out = rng.gamma(counts, 1.0 / -light.T[0, 0])
    else:
        draws = light.excess_sample(rng, int(counts.sum()))
        owner = np.repeat(np.arange(n), counts)
        out = np.bincount(owner, weights=draws, minlength=n)
    return float(out[0]) if size is None else out


def sample_d(rates, rng, size=None):
    """D = M_d + H_e."""
    n = 1 if size is None else int(size)
    out = sample_md(rates, rng, n) + rates.heavy.excess_sample(rng, n)
    return float(out[0]) if size is None else out


def _closed_form_available(rates):
    heavy = rates.heavy
    if not (rates.light.is_exponential and isinstance(heavy, ShiftedPareto)):
        return False
    return heavy.a >= 2 and abs(heavy.a - round(heavy.a)) < 1e-12


def _kernel_integrals(c, S, m_max):
    """K_m = int_1^S s^-m e^{-c(S-s)} ds for m = 0..m_max and the companion
    N_m = int_1^S s^-m c (S-s) e^{-c(S-s)} ds, elementwise in S."""
    S = np.asarray(S, dtype=float)
    K = np.zeros((m_max + 1,) + S.shape)
    N = np.zeros((m_max + 1,) + S.shape)
    far = c * (S - 1.0) > 120.0
    near = ~far

    if near.any():
        Sn = S[near]
        decay = np.exp(-c * (Sn - 1.0))
        Kn = np.zeros((m_max + 1, Sn.size))
        Kn[0] = -np.expm1(-c * (Sn - 1.0)) / c
        if m_max >= 1:
            Kn[1] = expi_scaled(c * Sn) - np.exp(-c * Sn) * expi(c)
        for m in range(2, m_max + 1):
            Kn[m] = (decay - Sn ** -(m - 1.0)) / (m - 1.0) + c / (m - 1.0) * Kn[m - 1]
        K[:, near] = Kn
        N[0, near] = (1.0 - decay * (1.0 + c * (Sn - 1.0))) / c
        for m in range(1, m_max + 1):
            N[m, near] = c * (Sn * Kn[m] - Kn[m - 1])

    if far.any():
        # expansion of (S - t)^-m around t = 0; the s ~ 1 end is below e^-120
        Sf = S[far]
        for m in range(m_max + 1):
            term = 1.0 / (c * Sf ** m)
            k_sum = term.copy()
            n_sum = term.copy()
            active = np.ones(Sf.shape, dtype=bool)
            for k in range(1, 400):
                ratio = (m + k - 1.0) / (c * Sf)
                active &= (ratio < 1.0) & (term > 1e-18 * k_sum)
                if not active.any():
                    break
                term = np.where(active, term * ratio, term)
                k_sum += np.where(active, term, 0.0)
                n_sum += np.where(active, (k + 1.0) * term, 0.0)
            K[m, far] = k_sum
            N[m, far] = n_sum
    return K, N


def _closed_tails(rates, u):
    heavy = rates.heavy
    beta = int(round(heavy.a)) - 1
    mu = -rates.light.T[0, 0]
    c = mu * (1.0 - rates.rho_d) * heavy.b
    S = 1.0 + np.asarray(u, dtype=float) / heavy.b
    K, N = _kernel_integrals(c, S, beta + 1)
    rd = rates.rho_d
    base = S ** -float(beta)
    ccdf = base + rd * beta * K[beta + 1]
    g1 = base + beta * ((2.0 * rd - rd * rd) * K[beta + 1] + rd * rd * N[beta + 1])
    return np.clip(ccdf, 0.0, 1.0), np.clip(g1, 0.0, 1.0)


def _check_u(u):
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError("u must be finite and nonnegative")
    return arr


def _resolve_method(rates, method):
    if method not in ("auto", "closed", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        return "closed" if _closed_form_available(rates) else "quadrature"
    if method == "closed" and not _closed_form_available(rates):
        raise ValidationError("closed form needs exponential light claims and integer Pareto shape")
    return method


def _quadrature_map(fn, u):
    vals = np.array([fn(float(x)) for x in np.ravel(u)]).reshape(np.shape(u))
    return float(vals) if np.ndim(u) == 0 else vals


def ccdf_d(rates, u, method="auto", spec=None):
    """P(M_d + H_e > u)."""
    u = _check_u(u)
    if _resolve_method(rates, method) == "closed":
        val = _closed_tails(rates, u)[0]
        return float(val) if u.ndim == 0 else val

    def one(x):
        return tail_of_sum(1.0 - rates.rho_d, lambda y: md_density(rates, y),
                           lambda y: psi_d_exact(rates, y), rates.heavy.excess_ccdf,
                           x, spec)
    return _quadrature_map(one, u)


def g1(rates, u, method="auto", spec=None):
    """P(M_d + M_d + H_e > u), the first heavy term of the discard series."""
    u = _check_u(u)
    if _resolve_method(rates, method) == "closed":
        val = _closed_tails(rates, u)[1]
        return float(val) if u.ndim == 0 else val
    init, G = _two_md_representation(rates)
    atom = (1.0 - rates.rho_d) ** 2

    def one(x):
        return tail_of_sum(atom, lambda y: _zero_modified_density(init, G, y),
                           lambda y: _zero_modified_tail(init, G, y),
                           rates.heavy.excess_ccdf, x, spec)
    return _quadrature_map(one, u)


def ccdf_ce(rates, u):
    """Tail of the stationary excess of the full (mixture) claim law."""
    return rates.mixture_excess.ccdf(_check_u(u))


class TabulatedTail:
    """Cubic spline of log P(D > x) on a log1p(x) grid, extended on demand.

    Used by the conditional estimators when no closed form exists: the tail
    is needed at every replication's threshold, and quadrature per call is
    far too slow.
    """

    def __init__(self, fn, step=0.05):
        self.fn = fn
        self.step = step
        self.x_max = 0.0
        self._spline = None

    def _build(self, x_max):
        z_max = math.log1p(x_max)
        z = np.linspace(0.0, z_max, max(int(math.ceil(z_max / self.step)), 4) + 1)
        vals = np.array([self.fn(float(x)) for x in np.expm1(z)])
        self._spline = CubicSpline(z, np.log(np.maximum(vals, 1e-300)))
        self.x_max = float(np.expm1(z[-1]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        top = float(np.max(x)) if x.size else 0.0
        if self._spline is None or top > self.x_max:
            self._build(max(top * 1.5, 2.0 * self.x_max, 10.0))
        out = np.exp(self._spline(np.log1p(np.maximum(x, 0.0))))
        return np.minimum(out, 1.0)


def d_tail_function(rates, method="auto"):
    """Vectorised callable x -> P(D > x) for the conditional estimators."""
    if _resolve_method(rates, method) == "closed":
        return lambda x: _closed_tails(rates, x)[0]
    return TabulatedTail(lambda x: ccdf_d(rates, x, method="quadrature"))


@dataclass
class SeriesDraw:
    """Per-replication summary of one draw of the series variable.

    ``total`` is V (or V for the PK series), ``count`` the geometric count
    G (or K), ``base`` the leading M_d term (zero for PK), ``heavy_max`` the
    largest heavy excess (or largest mixture excess for PK), and
    ``lead_max`` / ``lead_sum`` the max and sum of all summands but the last.
    """

    total: np.ndarray
    count: np.ndarray
    base: np.ndarray
    heavy_max: np.ndarray
    lead_max: np.ndarray
    lead_sum: np.ndarray

    def __len__(self):
        return self.total.shape[0]

    @classmethod
    def concat(cls, parts):
        return cls(*(np.concatenate([getattr(p, f) for p in parts])
                     for f in ("total", "count", "base", "heavy_max", "lead_max", "lead_sum")))


def _segment_summary(summands, marks, counts):
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    last = starts + counts - 1
    total = np.add.reduceat(summands, starts)
    mark_max = np.maximum.reduceat(marks, starts)
    lead = summands.copy()
    lead[last] = 0.0  # summands are nonnegative, so zero is neutral for max too
    return total, mark_max, np.maximum.reduceat(lead, starts), np.add.reduceat(lead, starts)


def sample_v_new(rates, rng, size):
    """Draw V = M_0 + sum_{k=1}^{G+2} (M_k + H_k) with G ~ Geom(r)."""
    count = rates.geometric_new.sample(rng, size)
    m = count + 2
    base = sample_md(rates, rng, size)
    k = int(m.sum())
    heavy = rates.heavy.excess_sample(rng, k)
    summands = sample_md(rates, rng, k) + heavy
    total, heavy_max, lead_max, lead_sum = _segment_summary(summands, heavy, m)
    return SeriesDraw(base + total, count, base, heavy_max, lead_max, lead_sum)


def sample_v_pk(rates, rng, size):
    """Draw V = sum_{k=1}^{K+2} C_k of mixture excesses with K ~ Geom(1 - rho)."""
    count = rates.geometric_pk.sample(rng, size)
    m = count + 2
    summands = rates.mixture_excess.sample(rng, int(m.sum()))
    total, cmax, lead_max, lead_sum = _segment_summary(summands, summands, m)
    return SeriesDraw(total, count, np.zeros(size), cmax, lead_max, lead_sum)
