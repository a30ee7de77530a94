"""Decay-model fitting in log coordinates."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_series
from ..exceptions import InsufficientDataError

VALUE_FLOOR = 1e-13
MIN_SAMPLES = 20
AMBIGUITY_MARGIN = 0.05

MODELS = ("exponential", "algebraic", "logarithmic", "t_exponential")


def _design(model, t):
    """Regressors and log-offset so that ``log v - offset = c0 - rate * x``."""
    if model == "exponential":
        return t, 0.0
    if model == "algebraic":
        return np.log(t), 0.0
    if model == "logarithmic":
        return np.log(np.log(t)), 0.0
    if model == "t_exponential":
        return t, np.log(t)
    raise ValueError(f"unknown decay model {model!r}")


def _applicable(model, t):
    if model in ("algebraic", "t_exponential"):
        return bool(np.all(t > 0))
    if model == "logarithmic":
        return bool(np.all(t > 1))
    return True


def model_values(model, params, t):
    A, rate = params
    t = np.asarray(t, dtype=float)
    if model == "exponential":
        return A * np.exp(-rate * t)
    if model == "algebraic":
        return A * t ** -rate
    if model == "logarithmic":
        return A * np.log(t) ** -rate
    if model == "t_exponential":
        return A * t * np.exp(-rate * t)
    raise ValueError(f"unknown decay model {model!r}")


def model_tail_integral(model, params, t):
    """``int_t^inf`` of the fitted model, or ``inf`` when it is not integrable."""
    A, rate = params
    if model == "exponential":
        return A * np.exp(-rate * t) / rate if rate > 0 else np.inf
    if model == "algebraic":
        return A * t ** (1 - rate) / (rate - 1) if rate > 1 else np.inf
    if model == "t_exponential":
        return A * np.exp(-rate * t) * (t / rate + 1 / rate**2) if rate > 0 else np.inf
    return np.inf


@dataclass(frozen=True)
class RateFit:
    """Best decay model ``A e^{-delta t}``, ``A t^{-p}``, ``A (ln t)^{-q}`` or ``A t e^{-delta t}``.

    ``residual`` is the RMS error in ``log(value)``; ``margin`` is the relative
    gap to the runner-up, and ``ambiguous`` flags a margin under 5%.
    """

    model: str
    params: tuple
    residual: float
    window: tuple
    runner_up: str | None = None
    margin: float = np.inf
    ambiguous: bool = False
    n_samples: int = 0

    @property
    def amplitude(self):
        return self.params[0]

    @property
    def rate(self):
        return self.params[1]

    def predict(self, t):
        return model_values(self.model, self.params, t)

    def tail_integral(self, t):
        return model_tail_integral(self.model, self.params, t)


class DecayRateFitter(RegressorMixin, BaseEstimator):
    """Select and fit a decay law to a positive time series.

    Fits every candidate model by least squares on ``log(value)`` over the
    trailing ``tail_fraction`` of the samples above ``floor`` and keeps the one
    with the smallest RMS log-residual.

    Parameters
    ----------
    models : tuple of str
        Candidates among ``exponential``, ``algebraic``, ``logarithmic``,
        ``t_exponential``.
    floor : float
        Samples at or below this value are discarded.
    tail_fraction : float
        Fraction of the retained samples (from the end) used in the fit.
    min_samples : int
        Minimum number of samples in the fitting window.
    """

    def __init__(self, models=MODELS, floor=VALUE_FLOOR, tail_fraction=0.5,
                 min_samples=MIN_SAMPLES):
        self.models = models
        self.floor = floor
        self.tail_fraction = tail_fraction
        self.min_samples = min_samples

    def fit(self, X, y):
        t, v = check_series(np.ravel(np.asarray(X, dtype=float)), y, min_samples=1)
        keep = np.isfinite(v) & (v > self.floor)
        t, v = t[keep], v[keep]
        n_window = int(np.ceil(self.tail_fraction * len(t)))
        t, v = t[len(t) - n_window:], v[len(v) - n_window:]
        if len(t) < self.min_samples:
            raise InsufficientDataError(
                f"{len(t)} samples above {self.floor:g} in the fitting window; "
                f"need {self.min_samples}")
        logv = np.log(v)
        fits = {}
        for model in self.models:
            if not _applicable(model, t):
                continue
            x, offset = _design(model, t)
            A = np.column_stack([np.ones_like(x), -x])
            coef, *_ = np.linalg.lstsq(A, logv - offset, rcond=None)
            resid = logv - offset - A @ coef
            fits[model] = ((float(np.exp(coef[0])), float(coef[1])),
                           float(np.sqrt(np.mean(resid**2))))
        if not fits:
            raise InsufficientDataError("no candidate model applies to these times")
        ranked = sorted(fits, key=lambda m: fits[m][1])
        best = ranked[0]
        runner = ranked[1] if len(ranked) > 1 else None
        margin = np.inf
        if runner is not None:
            r1, r2 = fits[best][1], fits[runner][1]
            margin = (r2 - r1) / r2 if r2 > 0 else 0.0
        self.fits_ = fits
        self.model_ = best
        self.params_ = fits[best][0]
        self.residual_ = fits[best][1]
        self.result_ = RateFit(best, self.params_, self.residual_, (float(t[0]), float(t[-1])),
                               runner, float(margin), bool(margin < AMBIGUITY_MARGIN), len(t))
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        return self.result_.predict(np.ravel(np.asarray(X, dtype=float)))

    def score(self, X, y, sample_weight=None):
        """Negative RMS log-residual of ``y`` against the fitted law."""
        pred = self.predict(X)
        y = np.ravel(np.asarray(y, dtype=float))
        return -float(np.sqrt(np.mean((np.log(y) - np.log(pred)) ** 2)))


def fit_rate(times, values, models=MODELS, **kwargs):
    """Fit the best decay law to ``values(times)``; see :class:`DecayRateFitter`."""
    return DecayRateFitter(models=models, **kwargs).fit(times, values).result_
