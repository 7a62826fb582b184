"""Augmented Dickey-Fuller unit-root test and minimum differencing order.

The ADF regression is the constant-only form

    dx_t = alpha + gamma * x_{t-1} + sum_{i=1..L} delta_i * dx_{t-i} + e_t

fitted by QR least squares; the t-ratio of ``gamma`` is compared against the
asymptotic 5% critical value for the constant-only case (-2.86).  No
finite-sample critical-value surface or p-value interpolation is attempted:
callers only need the stationary / non-stationary verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError
from .series import TimeSeries, diff

__all__ = [
    "ADF_CRITICAL_5PCT",
    "OlsFit",
    "ols",
    "AdfResult",
    "NdiffsResult",
    "adf_test",
    "ndiffs",
    "schwert_lags",
]

# Asymptotic 5% point of the Dickey-Fuller distribution, constant-only case.
ADF_CRITICAL_5PCT = -2.86

# Relative variance floor below which a series counts as exactly constant.
DEGENERATE_STD_RTOL = 1e-10


@dataclass(frozen=True)
class OlsFit:
    """Coefficients, standard errors and residuals of a least-squares fit."""

    coef: np.ndarray
    stderr: np.ndarray
    residuals: np.ndarray


def ols(design: np.ndarray, target: np.ndarray) -> OlsFit:
    """Ordinary least squares via QR decomposition.

    QR is used instead of the normal equations because near-unit-root designs
    are ill-conditioned.  Raises :class:`DegenerateInputError` when the design
    matrix is rank-deficient and :class:`InvalidArgumentError` when there are
    not enough rows to estimate the error variance.
    """
    X = np.asarray(design, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise InvalidArgumentError("design must be 2-d with one row per target value")
    n, k = X.shape
    if n < k + 1:
        raise InvalidArgumentError(f"{n} observations cannot support {k} regressors")
    q, r = np.linalg.qr(X)
    col_scale = np.maximum(np.sqrt((X * X).sum(axis=0)), 1.0)
    if np.any(np.abs(np.diag(r)) <= 1e-10 * col_scale):
        raise DegenerateInputError("design matrix is rank-deficient")
    coef = np.linalg.solve(r, q.T @ y)
    residuals = y - X @ coef
    sigma2 = float(residuals @ residuals) / (n - k)
    r_inv = np.linalg.inv(r)
    # diag of (X'X)^-1 = diag of R^-1 R^-T
    stderr = np.sqrt(sigma2 * (r_inv * r_inv).sum(axis=1))
    return OlsFit(coef=coef, stderr=stderr, residuals=residuals)


def schwert_lags(n: int) -> int:
    """Schwert's rule of thumb for the ADF lag order: floor(12 * (n/100)^0.25)."""
    return int(12.0 * (n / 100.0) ** 0.25)


@dataclass(frozen=True)
class AdfResult:
    """Outcome of one ADF test.

    ``stationary`` is true exactly when ``statistic < critical_value_5pct``.
    """

    statistic: float
    lags_used: int
    critical_value_5pct: float
    stationary: bool


@dataclass(frozen=True)
class NdiffsResult:
    """Smallest differencing order found, with the per-level test trail.

    A level resolved by the degenerate-variance rule contributes no trail
    entry, so the trail may be shorter than ``k + 1`` (or empty).
    """

    k: int
    trail: tuple[AdfResult, ...]


def _series_values(series: Union[TimeSeries, np.ndarray, list]) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidArgumentError("series must be one-dimensional")
    return arr


def adf_test(series: Union[TimeSeries, np.ndarray, list], lags: Optional[int] = None) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and no deterministic trend.

    Parameters
    ----------
    series : TimeSeries or array_like
        The data to test.
    lags : int, optional
        Number of lagged differences L.  Defaults to Schwert's rule
        ``floor(12 * (n/100)^0.25)``.

    Returns
    -------
    AdfResult
        The t-ratio of the lagged-level coefficient, the lag order used, the
        5% critical value and the stationarity verdict.

    Raises
    ------
    InvalidArgumentError
        When fewer than 10 usable observations remain after lag construction,
        or the observation count does not exceed the regressor count by >= 2.
    DegenerateInputError
        For constant input or an otherwise singular regression design.
    """
    x = _series_values(series)
    n = x.size
    if lags is None:
        L = schwert_lags(n)
    else:
        L = int(lags)
        if L < 0:
            raise InvalidArgumentError("lags must be non-negative")
    nobs = n - 1 - L
    nreg = L + 2  # constant, lagged level, L lagged differences
    if nobs < 10 or nobs < nreg + 2:
        raise InvalidArgumentError(
            f"{n} points leave {nobs} usable observations for {nreg} regressors; "
            "need at least 10 and regressors + 2"
        )
    if np.ptp(x) == 0.0:
        raise DegenerateInputError("constant series has no unit-root question")

    dx = np.diff(x)
    # observation rows are t = L+1 .. n-1 (0-based series indexing)
    y = dx[L:]
    cols = [np.ones(nobs), x[L : n - 1]]
    for i in range(1, L + 1):
        cols.append(dx[L - i : n - 1 - i])
    fit = ols(np.column_stack(cols), y)
    statistic = float(fit.coef[1] / fit.stderr[1])
    return AdfResult(
        statistic=statistic,
        lags_used=L,
        critical_value_5pct=ADF_CRITICAL_5PCT,
        stationary=statistic < ADF_CRITICAL_5PCT,
    )


def ndiffs(series: TimeSeries, max_diff: int = 4) -> NdiffsResult:
    """Smallest k <= max_diff such that the k-times differenced series is stationary.

    Before each ADF test, a candidate whose population standard deviation is
    below ``1e-10 * (1 + |mean|)`` is declared stationary immediately; exact
    constants produced by differencing deterministic trends must terminate the
    search without a degenerate regression.  A level whose ADF design is
    singular (e.g. a pure linear ramp, whose differences are a nonzero
    constant) counts as non-stationary and the search moves on.  If no level
    passes, ``k = max_diff`` is returned with the full trail.
    """
    if len(series) < 30:
        raise InvalidArgumentError("ndiffs needs a series of at least 30 points")
    max_diff = int(max_diff)
    if max_diff < 0:
        raise InvalidArgumentError("max_diff must be non-negative")
    trail: list[AdfResult] = []
    for k in range(max_diff + 1):
        candidate = diff(series, k)
        mean = float(candidate.values.mean())
        std = float(candidate.values.std())
        if std < DEGENERATE_STD_RTOL * (1.0 + abs(mean)):
            return NdiffsResult(k=k, trail=tuple(trail))
        try:
            result = adf_test(candidate)
        except DegenerateInputError:
            continue
        trail.append(result)
        if result.stationary:
            return NdiffsResult(k=k, trail=tuple(trail))
    return NdiffsResult(k=max_diff, trail=tuple(trail))
