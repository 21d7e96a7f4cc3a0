"""Special functions, matrix exponentials and convolution tails.

Everything here is pure and vectorised where it matters: the exponential
integral is evaluated on whole arrays of thresholds inside the conditional
Monte Carlo estimators.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate

from .exceptions import ConvergenceError, DomainError

EULER_GAMMA = 0.57721566490153286061

# Ei(x) = gamma + ln x + sum x^k/(k k!) has only positive terms for x > 0,
# so the series is accurate; above this cut we switch to the asymptotic
# expansion of exp(-x) Ei(x).
_SERIES_CUT = 40.0
_EXP_OVERFLOW = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for adaptive quadrature."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        # one break point at u/2 is always passed, so at least two intervals
        if self.max_subdivisions < 2:
            raise DomainError("max_subdivisions must be at least 2")


def _ei_series(x):
    term = x.copy()
    total = x.copy()
    for k in range(2, 400):
        term = term * x / k
        inc = term / k
        total += inc
        if np.all(inc <= 1e-17 * total):
            break
    return EULER_GAMMA + np.log(x) + total


def _scaled_asymptotic(x):
    # exp(-x) Ei(x) ~ (1/x) sum_k k!/x^k, truncated before the terms grow
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 200):
        nxt = term * k / x
        active &= (nxt < term) & (nxt > 1e-18 * total)
        if not active.any():
            break
        term = np.where(active, nxt, term)
        total = total + np.where(active, nxt, 0.0)
    return total / x


def _as_positive_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(arr <= 0):
        raise DomainError(f"{name} must be strictly positive")
    return arr


def expi(x):
    """Exponential integral Ei(x) for positive real ``x`` (scalar or array).

    Raises ``DomainError`` for ``x <= 0`` and ``OverflowError`` when Ei(x)
    is not representable; use :func:`expi_scaled` for large arguments.
    """
    arr = _as_positive_array(x)
    if np.any(arr > _EXP_OVERFLOW - 1.0):
        raise OverflowError("Ei(x) overflows for x > ~708; use expi_scaled")
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    small = flat <= _SERIES_CUT
    if small.any():
        out[small] = _ei_series(flat[small])
    if (~small).any():
        big = flat[~small]
        out[~small] = np.exp(big) * _scaled_asymptotic(big)
    return out.reshape(arr.shape)[()] if arr.ndim else float(out[0])


def expi_scaled(x):
    """Return exp(-x) * Ei(x) without overflow, for positive ``x``."""
    arr = _as_positive_array(x)
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    small = flat <= _SERIES_CUT
    if small.any():
        xs = flat[small]
        out[small] = np.exp(-xs) * _ei_series(xs)
    if (~small).any():
        out[~small] = _scaled_asymptotic(flat[~small])
    return out.reshape(arr.shape)[()] if arr.ndim else float(out[0])


# Pade [6/6] coefficients c_k = (12-k)! 6! / (12! k! (6-k)!)
_PADE6 = np.array([math.factorial(12 - k) * math.factorial(6)
                   / (math.factorial(12) * math.factorial(k) * math.factorial(6 - k))
                   for k in range(7)])


def mat_exp(A, s=1.0):
    """Matrix exponential exp(A s) by scaling and squaring with a [6/6] Pade.

    ``A`` may be a single square matrix or a stack ``(..., p, p)``; ``s`` may
    be a scalar or an array broadcasting against the stack dimensions, which
    is how phase-type tails are evaluated at many points at once.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] < 1:
        raise DomainError("mat_exp expects square matrices")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix entries must be finite")
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)) or np.any(s < 0):
        raise DomainError("s must be finite and nonnegative")

    X = A * s[..., None, None]
    p = X.shape[-1]
    norm = np.abs(X).sum(axis=-1).max(axis=-1)
    with np.errstate(divide="ignore"):
        squarings = np.where(norm > 0.5, np.ceil(np.log2(norm / 0.5)), 0).astype(int)
    X = X / (2.0 ** squarings)[..., None, None]

    eye = np.broadcast_to(np.eye(p), X.shape)
    power = eye
    num = _PADE6[0] * eye
    den = _PADE6[0] * eye
    for k in range(1, 7):
        power = power @ X
        num = num + _PADE6[k] * power
        den = den + ((-1) ** k) * _PADE6[k] * power
    E = np.linalg.solve(den, num)

    top = int(squarings.max()) if squarings.size else 0
    for step in range(top):
        mask = (squarings > step)[..., None, None]
        E = np.where(mask, E @ E, E)
    return E


def tail_of_sum(atom0, density, ccdf, tail_b, u, spec=None):
    """P(X + B > u) for independent X >= 0 and B > 0.

    ``X`` has an atom of mass ``atom0`` at zero plus a (possibly defective)
    ``density`` on (0, inf); ``ccdf(x)`` is P(X > x) and ``tail_b`` the tail
    of ``B``. The convolution integral is computed with adaptive
    Gauss-Kronrod quadrature, split at ``u/2``.
    """
    spec = spec or QuadratureSpec()
    if not 0.0 <= atom0 <= 1.0:
        raise DomainError("atom0 must be a probability")
    u = float(u)
    if u < 0 or not math.isfinite(u):
        raise DomainError("u must be finite and nonnegative")
    if u == 0.0:
        return float(atom0 * tail_b(0.0) + ccdf(0.0))

    def integrand(x):
        return float(density(x)) * float(tail_b(u - x))

    val, abserr, info = integrate.quad(
        integrand, 0.0, u, points=[0.5 * u], epsabs=spec.abs_tol,
        epsrel=spec.rel_tol, limit=spec.max_subdivisions, full_output=1)[:3]
    if abserr > max(spec.abs_tol, spec.rel_tol * abs(val)) * 10:
        raise ConvergenceError(
            f"convolution integral at u={u} did not converge "
            f"(estimate {val:.3e}, error {abserr:.1e})")
    total = atom0 * float(tail_b(u)) + val + float(ccdf(u))
    return min(max(total, 0.0), 1.0)
