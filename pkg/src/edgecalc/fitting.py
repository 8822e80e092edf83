"""Log-log growth fits and sweep reports."""
from dataclasses import dataclass, field

import numpy as np


class DegenerateSweep(ValueError):
    """Raised when a sweep cannot support a growth fit."""


@dataclass(frozen=True)
class FitResult:
    exponent: float
    residual: float
    n_used: int
    n_zero: int


def fit_exponent(params, values, scale="log", zero_tol=0.0):
    """Least-squares slope of log(value) against log(param).

    Parameters
    ----------
    params, values : sequences of positive parameters and nonnegative values.
    scale : "log" fits against log(param); "bracket" against
        log(<param>) = log(sqrt(1 + param**2)).
    zero_tol : values at or below this are treated as zero; they are
        excluded from the fit and counted in ``n_zero``.

    Returns
    -------
    FitResult with the slope and the residual, the largest absolute
    deviation of log(value) from the fitted line.
    """
    params = np.asarray(params, dtype=float)
    values = np.asarray(values, dtype=float)
    if params.shape != values.shape:
        raise DegenerateSweep("params and values differ in length")
    if len(params) < 3:
        raise DegenerateSweep("need at least 3 sweep points")
    if np.any(~np.isfinite(values)) or np.any(values < 0):
        raise DegenerateSweep("values must be finite and nonnegative")
    keep = values > zero_tol
    n_zero = int(np.count_nonzero(~keep))
    if not np.any(keep):
        raise DegenerateSweep("degenerate sweep: all values are zero")
    if np.count_nonzero(keep) < 3:
        raise DegenerateSweep("fewer than 3 nonzero sweep points")
    if scale == "log":
        if np.any(params[keep] <= 0):
            raise DegenerateSweep("log scale needs positive parameters")
        t = np.log(params[keep])
    elif scale == "bracket":
        t = 0.5 * np.log1p(params[keep] ** 2)
    else:
        raise ValueError(f"unknown scale {scale!r}")
    if np.ptp(t) == 0:
        raise DegenerateSweep("sweep parameters are all equal")
    y = np.log(values[keep])
    slope, intercept = np.polyfit(t, y, 1)
    residual = float(np.max(np.abs(y - (slope * t + intercept))))
    return FitResult(float(slope), residual, int(np.count_nonzero(keep)), n_zero)


@dataclass(frozen=True)
class SweepReport:
    """Samples of a norm against a parameter magnitude plus a growth fit.

    A sweep whose values are all zero (an exactly vanishing family) reports
    exponent ``-inf`` and residual 0, so any upper bound on the exponent holds.
    """

    params: np.ndarray
    values: np.ndarray
    exponent: float
    residual: float
    n_zero: int = 0
    scale: str = "bracket"
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, params, values, scale="bracket", zero_tol=0.0, **meta):
        params = np.asarray(params, dtype=float)
        values = np.asarray(values, dtype=float)
        if len(params) < 3:
            raise DegenerateSweep("need at least 3 sweep points")
        if np.all(values <= zero_tol):
            return cls(params, values, -np.inf, 0.0, len(values), scale, meta)
        fit = fit_exponent(params, values, scale=scale, zero_tol=zero_tol)
        return cls(params, values, fit.exponent, fit.residual, fit.n_zero, scale, meta)

    def rows(self):
        return list(zip(self.params.tolist(), self.values.tolist()))
