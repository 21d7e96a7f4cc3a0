"""Claim-size distributions and the samplers built on them.

Distributions share a small duck-typed surface used by the model layer:
``mean``, ``ccdf``, ``excess_ccdf``, ``excess_pdf`` and ``excess_sample``
(the stationary-excess, or integrated-tail, law). All samplers take an
explicit ``numpy.random.Generator`` and a ``size``; they never touch global
random state.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from .exceptions import DomainError, ValidationError
from .numerics import mat_exp


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


@dataclass(frozen=True, eq=False)
class PhaseType:
    """Continuous phase-type law with initial vector ``pi`` and sub-intensity ``T``."""

    pi: np.ndarray
    T: np.ndarray
    exit: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pi = np.atleast_1d(np.asarray(self.pi, dtype=float))
        T = np.atleast_2d(np.asarray(self.T, dtype=float))
        p = pi.shape[0]
        if pi.ndim != 1 or T.shape != (p, p):
            raise ValidationError(f"pi has {p} phases but T has shape {T.shape}")
        if not (np.all(np.isfinite(pi)) and np.all(np.isfinite(T))):
            raise ValidationError("phase-type parameters must be finite")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValidationError("pi must be a probability vector")
        off = T - np.diag(np.diag(T))
        if np.any(np.diag(T) >= 0) or np.any(off < 0):
            raise ValidationError("T needs a negative diagonal and nonnegative off-diagonal")
        exit_ = -T.sum(axis=1)
        if np.any(exit_ < -1e-12):
            raise ValidationError("row sums of T must be nonpositive")
        exit_ = np.clip(exit_, 0.0, None)
        # (-T) must be invertible: some exit must be reachable from every phase
        try:
            np.linalg.solve(-T, np.ones(p))
        except np.linalg.LinAlgError as exc:
            raise ValidationError("T is singular; absorption is not certain") from exc
        pi.setflags(write=False)
        T.setflags(write=False)
        exit_.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "exit", exit_)

    @classmethod
    def exponential(cls, rate):
        return cls(np.array([1.0]), np.array([[-float(rate)]]))

    @classmethod
    def erlang(cls, k, rate):
        T = -rate * np.eye(k) + rate * np.eye(k, k=1)
        pi = np.zeros(k)
        pi[0] = 1.0
        return cls(pi, T)

    @classmethod
    def hyperexponential(cls, probs, rates):
        return cls(np.asarray(probs, dtype=float), -np.diag(np.asarray(rates, dtype=float)))

    @property
    def order(self):
        return self.pi.shape[0]

    @property
    def is_exponential(self):
        return self.order == 1

    @cached_property
    def _green(self):
        # (-T)^{-1}
        return np.linalg.inv(-self.T)

    @cached_property
    def mean(self):
        return float(self.pi @ self._green @ np.ones(self.order))

    def moment(self, k):
        """k-th raw moment k! pi (-T)^{-k} e."""
        G = np.linalg.matrix_power(self._green, k)
        return math.factorial(k) * float(self.pi @ G @ np.ones(self.order))

    def _propagate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("phase-type functions are evaluated at x >= 0")
        return x, self.pi @ mat_exp(self.T, x)

    def ccdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_exponential:
            return _scalar_or_array(np.exp(self.T[0, 0] * np.maximum(x, 0.0)), x)
        x, row = self._propagate(x)
        return _scalar_or_array(row.sum(axis=-1), x)

    def cdf(self, x):
        return 1.0 - self.ccdf(x)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_exponential:
            rate = -self.T[0, 0]
            return _scalar_or_array(rate * np.exp(-rate * np.maximum(x, 0.0)), x)
        x, row = self._propagate(x)
        return _scalar_or_array(row @ self.exit, x)

    @cached_property
    def excess(self):
        """Stationary-excess law: same ``T``, initial vector pi (-T)^{-1} / mean."""
        nu = self.pi @ self._green / self.mean
        nu = np.clip(nu, 0.0, None)
        return PhaseType(nu / nu.sum(), self.T)

    def excess_ccdf(self, x):
        return self.excess.ccdf(x)

    def excess_cdf(self, x):
        return self.excess.cdf(x)

    def excess_pdf(self, x):
        return self.excess.pdf(x)

    def excess_sample(self, rng, size=None):
        return self.excess.sample(rng, size)

    @cached_property
    def _jump_chain(self):
        rates = -np.diag(self.T)
        P = np.empty((self.order, self.order + 1))
        P[:, :-1] = self.T / rates[:, None]
        P[np.arange(self.order), np.arange(self.order)] = 0.0
        P[:, -1] = self.exit / rates
        cum = np.cumsum(P, axis=1)
        cum[:, -1] = 1.0
        start = np.cumsum(self.pi)
        start[-1] = 1.0
        return rates, cum, start

    def sample(self, rng, size=None):
        """Absorption times of the underlying jump process."""
        n = 1 if size is None else int(np.prod(size))
        if self.is_exponential:
            out = rng.exponential(1.0 / -self.T[0, 0], n)
        else:
            rates, cum, start = self._jump_chain
            state = np.searchsorted(start, rng.random(n), side="right")
            out = np.zeros(n)
            alive = np.flatnonzero(state < self.order)
            while alive.size:
                s = state[alive]
                out[alive] += rng.exponential(size=alive.size) / rates[s]
                u = rng.random(alive.size)
                nxt = (u[:, None] >= cum[s]).sum(axis=1)
                state[alive] = nxt
                alive = alive[nxt < self.order]
        return float(out[0]) if size is None else out.reshape(size)


@dataclass(frozen=True)
class ShiftedPareto:
    """Lomax law with tail (1 + x/b)^(-a); its stationary excess has tail (1 + x/b)^(-(a-1))."""

    a: float
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 1 and math.isfinite(self.a)):
            raise ValidationError(f"Pareto shape a={self.a} must exceed 1 for a finite mean")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValidationError(f"Pareto scale b={self.b} must be positive")

    @property
    def mean(self):
        return self.b / (self.a - 1.0)

    def _base(self, x):
        x = np.asarray(x, dtype=float)
        return x, 1.0 + np.maximum(x, 0.0) / self.b

    def ccdf(self, x):
        x, s = self._base(x)
        return _scalar_or_array(s ** -self.a, x)

    def cdf(self, x):
        return 1.0 - self.ccdf(x)

    def pdf(self, x):
        x, s = self._base(x)
        return _scalar_or_array(self.a / self.b * s ** -(self.a + 1.0), x)

    def excess_ccdf(self, x):
        x, s = self._base(x)
        return _scalar_or_array(s ** -(self.a - 1.0), x)

    def excess_cdf(self, x):
        return 1.0 - self.excess_ccdf(x)

    def excess_pdf(self, x):
        x, s = self._base(x)
        return _scalar_or_array((self.a - 1.0) / self.b * s ** -self.a, x)

    def sample(self, rng, size=None):
        u = 1.0 - rng.random(size)
        return self.b * (u ** (-1.0 / self.a) - 1.0)

    def excess_sample(self, rng, size=None):
        u = 1.0 - rng.random(size)
        return self.b * (u ** (-1.0 / (self.a - 1.0)) - 1.0)


@dataclass(frozen=True)
class GeometricLaw:
    """Geometric law on {0, 1, 2, ...} with P(G = k) = p (1 - p)^k."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"geometric success probability {self.p} not in (0, 1]")

    @property
    def mean(self):
        return (1.0 - self.p) / self.p

    def pmf(self, k):
        k = np.asarray(k)
        return self.p * (1.0 - self.p) ** k

    def sample(self, rng, size=None):
        draws = rng.geometric(self.p, size) - 1
        return int(draws) if size is None else draws


@dataclass(frozen=True, eq=False)
class MixtureExcess:
    """Two-component mixture of stationary-excess laws.

    With probability ``light_weight`` the draw comes from the light
    component's excess, otherwise from the heavy component's excess.
    """

    light: PhaseType
    heavy: object
    light_weight: float

    def __post_init__(self):
        if not 0.0 <= self.light_weight <= 1.0:
            raise ValidationError("light_weight must be a probability")

    def ccdf(self, x):
        w = self.light_weight
        return w * self.light.excess_ccdf(x) + (1.0 - w) * self.heavy.excess_ccdf(x)

    def cdf(self, x):
        return 1.0 - self.ccdf(x)

    def sample(self, rng, size=None):
        n = 1 if size is None else int(np.prod(size))
        from_light = rng.random(n) < self.light_weight
        out = np.empty(n)
        k = int(from_light.sum())
        out[from_light] = self.light.excess_sample(rng, k)
        out[~from_light] = self.heavy.excess_sample(rng, n - k)
        return float(out[0]) if size is None else out.reshape(size)
