"""Auto-distance covariance and correlation of stationary series.

For lag ``j`` the sample consists of the ``N = n - j`` overlapping pairs
``(X_t, X_{t+j})``.  Negative lags follow the symmetry conventions
``V(-j) = V(j)`` (univariate) and ``V_rm(-j) = V_mr(j)`` (multivariate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._lagfeatures import DCOV, multi_features, series_features
from .distance import MetricSpec, _as_metric, dcov_v

__all__ = [
    "LagProfile",
    "as_series",
    "as_multiseries",
    "default_max_lag",
    "adcv",
    "adcf",
    "adcv_matrix",
    "adcf_matrix",
    "adcf_profile",
    "acf",
    "acf_values",
    "autocov_matrix",
]


def as_series(x, name: str = "x") -> np.ndarray:
    """Validate a univariate series and return it as a float vector."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a univariate series, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError(f"{name} needs at least 2 observations")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def as_multiseries(x, name: str = "X") -> np.ndarray:
    """Validate an ``(n, d)`` series; 1-D input becomes a single column."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be an (n, d) array, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ValueError(f"{name} needs at least 2 observations")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def default_max_lag(n: int) -> int:
    """Plot default ``ceil(10 log10 n)``, capped at ``n - 2``."""
    return max(1, min(math.ceil(10.0 * math.log10(n)), n - 2))


def _check_lag(j: int, n: int) -> int:
    j = abs(int(j))
    if j > n - 2:
        raise ValueError(f"lag {j} leaves fewer than 2 pairs for n={n}")
    return j


def adcv(x, j: int, metric: MetricSpec | str | None = None) -> float:
    """Sample auto-distance covariance ``V^2(j)`` of a univariate series."""
    x = as_series(x)
    n = x.size
    j = _check_lag(j, n)
    return dcov_v(x[: n - j], x[j:], metric)


def _ratio(v: float, v0: float) -> float:
    if not v0 > 0.0:
        return 0.0
    return math.sqrt(min(max(v / v0, 0.0), 1.0))


def adcf(x, j: int, metric: MetricSpec | str | None = None) -> float:
    """Auto-distance correlation ``R(j) = sqrt(V^2(j) / V^2(0))``.

    ``V^2(0)`` is always computed on the full series, so ``adcf(x, 0) == 1``
    for any non-constant ``x``.
    """
    x = as_series(x)
    return _ratio(adcv(x, j, metric), adcv(x, 0, metric))


def adcv_matrix(x, j: int, metric: MetricSpec | str | None = None) -> np.ndarray:
    """Pairwise auto-distance covariance matrix at lag ``j``.

    Entry ``(r, m)`` is the squared distance covariance between
    ``X_{t;r}`` and ``X_{t+j;m}``.
    """
    x = as_multiseries(x)
    n, d = x.shape
    if j < 0:
        return adcv_matrix(x, -j, metric).T
    j = _check_lag(j, n)
    out = np.empty((d, d))
    for r in range(d):
        for m in range(d):
            out[r, m] = dcov_v(x[: n - j, r], x[j:, m], metric)
    return out


def _correlation_matrix(v: np.ndarray, v0_diag: np.ndarray) -> np.ndarray:
    denom = np.sqrt(np.outer(v0_diag, v0_diag))
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(denom > 0.0, v / np.where(denom > 0.0, denom, 1.0), 0.0)
    return np.sqrt(np.clip(r2, 0.0, 1.0))


def adcf_matrix(x, j: int, metric: MetricSpec | str | None = None) -> np.ndarray:
    """Pairwise auto-distance correlation matrix ``R_rm(j)`` (square roots)."""
    x = as_multiseries(x)
    v0 = np.diag(adcv_matrix(x, 0, metric))
    return _correlation_matrix(adcv_matrix(x, j, metric), v0)


def _sample_autocov(x: np.ndarray, max_lag: int) -> np.ndarray:
    # gamma[j] = (1/n) sum_t (x_t - mean)(x_{t+j} - mean), j = 0..max_lag
    n = x.size
    c = x - x.mean()
    return np.array([np.dot(c[: n - j], c[j:]) for j in range(max_lag + 1)]) / n


def acf_values(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelations ``rho(0..max_lag)`` with divisor ``n``.

    Raises
    ------
    ValueError
        If the series has zero sample variance.
    """
    x = as_series(x)
    n = x.size
    if not 0 <= max_lag <= n - 1:
        raise ValueError(f"max_lag must lie in [0, {n - 1}]")
    gamma = _sample_autocov(x, max_lag)
    if not gamma[0] > 0.0:
        raise ValueError("autocorrelation undefined for a series with zero variance")
    return gamma / gamma[0]


def acf(x, j: int) -> float:
    """Sample autocorrelation at lag ``j`` (``acf(x, -j) == acf(x, j)``)."""
    j = abs(int(j))
    return float(acf_values(x, j)[j])


def autocov_matrix(x, j: int) -> np.ndarray:
    """Sample autocovariance matrix ``Gamma(j)`` with divisor ``n``.

    ``Gamma(j) = (1/n) sum_t (X_{t+j} - mean)(X_t - mean)'`` and
    ``Gamma(-j) = Gamma(j)'``.
    """
    x = as_multiseries(x)
    n = x.shape[0]
    if j < 0:
        return autocov_matrix(x, -j).T
    if j > n - 1:
        raise ValueError(f"lag {j} exceeds n - 1 = {n - 1}")
    c = x - x.mean(axis=0)
    return c[j:].T @ c[: n - j] / n


@dataclass
class LagProfile:
    """Per-lag auto-distance covariance and correlation.

    ``adcv`` and ``adcf`` have shape ``(J + 1,)`` for a univariate series and
    ``(J + 1, d, d)`` otherwise; index ``j`` holds lag ``j``.  Bands, when
    present, are on the ADCF scale.
    """

    lags: np.ndarray
    adcv: np.ndarray
    adcf: np.ndarray
    pairwise_band: np.ndarray | None = None
    simultaneous_band: np.ndarray | None = None
    labels: list[str] = field(default_factory=list)

    @property
    def univariate(self) -> bool:
        return self.adcv.ndim == 1


def adcf_profile(x, max_lag: int | None = None, metric: MetricSpec | str | None = None) -> LagProfile:
    """ADCV and ADCF at lags ``0..max_lag``.

    Euclidean distances use the fused lag kernels; other metrics fall back
    to :func:`adcv` / :func:`adcv_matrix` lag by lag.
    """
    arr = as_multiseries(x)
    n, d = arr.shape
    if max_lag is None:
        max_lag = default_max_lag(n)
    max_lag = _check_lag(max_lag, n)
    lags = np.arange(max_lag + 1)
    euclid = _as_metric(metric).kind == "euclidean" or (
        _as_metric(metric).kind == "alpha-power" and _as_metric(metric).alpha == 1.0
    )
    if d == 1:
        col = np.ascontiguousarray(arr[:, 0])
        if euclid:
            v = series_features(col, max_lag, ("dcov",), first_lag=0)[DCOV]
        else:
            v = np.array([adcv(col, j, metric) for j in lags])
        r = np.array([_ratio(vj, v[0]) for vj in v])
        return LagProfile(lags, v, r)
    if euclid:
        v = multi_features(arr, max_lag, ("dcov",), first_lag=0)[DCOV]
    else:
        v = np.stack([adcv_matrix(arr, j, metric) for j in lags])
    v0 = np.diag(v[0])
    r = np.stack([_correlation_matrix(v[j], v0) for j in lags])
    return LagProfile(lags, v, r)
