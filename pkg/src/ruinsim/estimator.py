"""scikit-learn style wrapper: fit simulates once, predict evaluates psi(u)."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from . import estimators
from .exceptions import DomainError
from .model import ModelParams, derive_rates


def check_capitals(X):
    """Validate initial capitals as a finite, nonnegative 1-D float array.

    Accepts a scalar, a 1-D sequence or a single-column 2-D array.
    """
    arr = check_array(np.atleast_1d(np.asarray(X, dtype=float)), ensure_2d=False,
                      dtype=np.float64, input_name="u")
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise DomainError(f"expected one column of initial capitals, got {arr.shape[1]}")
        arr = arr[:, 0]
    if np.any(arr < 0):
        raise DomainError("initial capital u must be nonnegative")
    return arr


class RuinProbabilityEstimator(BaseEstimator):
    """Monte Carlo ruin probability psi(u) for one series/method pair.

    ``fit`` derives the model rates and draws ``reps`` replications of the
    series variable; ``predict`` reuses that draw for every u, so estimates
    at different capitals share common random numbers.

    Parameters
    ----------
    model : ModelParams, optional
        Defaults to Exp(3) light claims, Pareto(2, 1) heavy claims,
        epsilon = 0.1 and rho = 0.99.
    series : {"new", "pk"}
    method : {"crude", "cv_max", "ak", "ak_cv"}
    n : truncation order of the max control (``cv_max`` only)
    reps, seed, workers : simulation size, master seed, process count
    """

    def __init__(self, model=None, series="new", method="cv_max", n=100,
                 reps=10_000, seed=0, workers=1):
        self.model = model
        self.series = series
        self.method = method
        self.n = n
        self.reps = reps
        self.seed = seed
        self.workers = workers

    def _model(self):
        if self.model is None:
            return ModelParams.exp_pareto(3.0, 2.0, 1.0, 0.1, rho=0.99)
        return self.model

    def fit(self, X=None, y=None):
        """Simulate the series; X and y are ignored (the model is the data)."""
        kind = estimators.EstimatorKind(self.series, self.method)
        if int(self.reps) < 2:
            raise DomainError("reps must be at least 2")
        if kind.method == "cv_max" and int(self.n) < 2:
            raise DomainError("cv_max needs n >= 2")
        self.kind_ = kind
        self.rates_ = derive_rates(self._model())
        self.draw_ = estimators.simulate(kind.series, self.rates_, int(self.reps),
                                         int(self.seed), int(self.workers))
        self.tail_ = (estimators.summand_tail(kind.series, self.rates_)
                      if kind.method.startswith("ak") else None)
        return self

    def predict_results(self, X):
        """Full ``EstimatorResult`` (psi scale) for each capital in X."""
        check_is_fitted(self, "draw_")
        u = check_capitals(X)
        return [estimators.estimate_psi(self.kind_, self.rates_, ui, n=int(self.n),
                                        draw=self.draw_, tail=self.tail_) for ui in u]

    def predict(self, X):
        """Point estimates of psi(u)."""
        return np.array([r.estimate for r in self.predict_results(X)])

    def predict_interval(self, X):
        """95% normal confidence limits, as two arrays (lower, upper)."""
        res = self.predict_results(X)
        return np.array([r.ci95[0] for r in res]), np.array([r.ci95[1] for r in res])
