"""Portmanteau statistics for serial independence.

Every statistic is a weighted sum over lags of a per-lag dependence
measure:

============  ====================  =========================================
statistic     per-lag measure       lag weights
============  ====================  =========================================
BP, LB        rho(j)^2              j = 1..p
H96           rho(j)^2              n k^2(j/p)
T2n, T3n      rho(j)                via the kernel spectral estimate
ST            D2(j)                 j = 1..p
H98           D2(j)^2               (n - j) k^2(j/p)
H99           sigma^2_gauss(j)      (n - j) k^2(j/p)
FP            V^2(j)                (n - j) k^2(j/p)
mLB           Gamma(j)              j = 1..p
FPm           V^2_rm(j)             (n - j) k^2(j/p), summed over (r, m)
STm, H98m     D2^(r,m)(j)           as ST / H98, summed over (r, m)
============  ====================  =========================================

Kernel-weighted sums formally run over ``j = 1..n-1``; only lags with a
nonzero weight are computed.  The per-lag measures are produced in batch
by :func:`statistic_features`, which is what the bootstrap uses, so the
observed and resampled statistics share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._lagfeatures import CVM, DCOV, GAUSS, batch_multi_features, batch_series_features, series_features
from .kernels import KernelSpec, as_kernel, squared_lag_weights
from .timeseries import acf_values, as_multiseries, as_series

__all__ = [
    "UNIVARIATE_STATISTICS",
    "MULTIVARIATE_STATISTICS",
    "STATISTICS",
    "TestStatistic",
    "statistic_info",
    "statistic_features",
    "evaluate_statistics",
    "compute_statistic",
    "stat_BP",
    "stat_LB",
    "stat_mLB",
    "spectral_estimate",
    "stat_H96",
    "stat_T2n",
    "stat_T3n",
    "edf_joint",
    "edf_marginal",
    "dist_D1",
    "dist_D2",
    "stat_ST",
    "stat_H98",
    "gaussian_weighted_sigma2",
    "stat_H99",
    "stat_FP",
    "stat_FP_multivariate",
    "stat_ST_multivariate",
    "stat_H98_multivariate",
]

OMEGA_POINTS = 1025
_OMEGA = np.linspace(-np.pi, np.pi, OMEGA_POINTS)
_F0 = 1.0 / (2.0 * np.pi)


@dataclass(frozen=True)
class _Info:
    name: str
    feature: str  # acf, autocov, dcov, gauss or cvm
    multivariate: bool
    weighted: bool  # kernel-weighted over 1..n-1, else plain lags 1..p


_REGISTRY = {
    info.name: info
    for info in (
        _Info("BP", "acf", False, False),
        _Info("LB", "acf", False, False),
        _Info("H96", "acf", False, True),
        _Info("T2n", "acf", False, True),
        _Info("T3n", "acf", False, True),
        _Info("H98", "cvm", False, True),
        _Info("H99", "gauss", False, True),
        _Info("ST", "cvm", False, False),
        _Info("FP", "dcov", False, True),
        _Info("mLB", "autocov", True, False),
        _Info("FPm", "dcov", True, True),
        _Info("STm", "cvm", True, False),
        _Info("H98m", "cvm", True, True),
    )
}
UNIVARIATE_STATISTICS = tuple(k for k, v in _REGISTRY.items() if not v.multivariate)
MULTIVARIATE_STATISTICS = tuple(k for k, v in _REGISTRY.items() if v.multivariate)
STATISTICS = UNIVARIATE_STATISTICS + MULTIVARIATE_STATISTICS
_FEATURE_ROW = {"dcov": DCOV, "gauss": GAUSS, "cvm": CVM}


@dataclass(frozen=True)
class TestStatistic:
    """A named statistic value with its bandwidth and kernel."""

    name: str
    value: float
    p: int
    kernel: str | None = None


def statistic_info(name: str) -> _Info:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown statistic {name!r}; choose from {STATISTICS}") from None


def _required_lag(info: _Info, n: int, p: int, kernel: KernelSpec) -> int:
    # largest lag whose measure enters the statistic
    if info.weighted:
        last = len(squared_lag_weights(kernel, p, n)) - 1
        # a single pair at lag n - 1 carries no dependence measure
        cap = n - 1 if info.feature == "acf" else n - 2
        return min(last, cap)
    return p


def _check_p(info: _Info, n: int, p: int) -> None:
    if p != int(p) or p < 1:
        raise ValueError("p must be a positive integer")
    limit = n if info.feature in ("acf", "autocov") else n - 1
    if p >= limit:
        raise ValueError(f"{info.name} needs p < {limit} for n={n}, got p={p}")


# ---------------------------------------------------------------------------
# batched features


def _batch_acf(xs: np.ndarray, max_lag: int) -> np.ndarray:
    """Autocorrelations ``(B, max_lag + 1)``; zero-variance rows give 0."""
    n = xs.shape[1]
    c = xs - xs.mean(axis=1, keepdims=True)
    gamma = np.empty((xs.shape[0], max_lag + 1))
    for j in range(max_lag + 1):
        gamma[:, j] = np.einsum("bt,bt->b", c[:, : n - j], c[:, j:]) / n
    g0 = gamma[:, :1]
    ok = g0 > 0.0
    return np.where(ok, gamma / np.where(ok, g0, 1.0), 0.0)


def _batch_autocov(xs: np.ndarray, max_lag: int) -> np.ndarray:
    """Autocovariance matrices ``(B, max_lag + 1, d, d)``."""
    n = xs.shape[1]
    c = xs - xs.mean(axis=1, keepdims=True)
    out = np.empty((xs.shape[0], max_lag + 1, xs.shape[2], xs.shape[2]))
    for j in range(max_lag + 1):
        out[:, j] = np.einsum("bti,btk->bik", c[:, j:], c[:, : n - j]) / n
    return out


def statistic_features(xs, names, p: int, kernel=None, workers=None) -> dict[str, np.ndarray]:
    """Per-lag measures needed by ``names`` for every row of ``xs``.

    ``xs`` is ``(B, n)`` for univariate statistics and ``(B, n, d)`` for
    multivariate ones.  Returns a mapping from feature name to an array
    whose axis 1 is the lag.
    """
    kernel = as_kernel(kernel)
    xs = np.asarray(xs, dtype=float)
    n = xs.shape[1]
    infos = [statistic_info(nm) for nm in names]
    multi = {i.multivariate for i in infos}
    if len(multi) > 1:
        raise ValueError("cannot mix univariate and multivariate statistics in one batch")
    is_multi = multi.pop() if multi else False
    if is_multi and xs.ndim != 3:
        raise ValueError("multivariate statistics need a (B, n, d) batch")
    if not is_multi and xs.ndim != 2:
        raise ValueError("univariate statistics need a (B, n) batch")
    lags: dict[str, int] = {}
    for info in infos:
        _check_p(info, n, p)
        lag = _required_lag(info, n, p, kernel)
        lags[info.feature] = max(lags.get(info.feature, 0), lag)
    out: dict[str, np.ndarray] = {}
    if "acf" in lags:
        out["acf"] = _batch_acf(xs, lags["acf"])
    if "autocov" in lags:
        out["autocov"] = _batch_autocov(xs, lags["autocov"])
    dist_kinds = [k for k in ("dcov", "gauss", "cvm") if k in lags]
    if dist_kinds:
        max_lag = max(lags[k] for k in dist_kinds)
        if max_lag >= 1:
            batch = batch_multi_features if is_multi else batch_series_features
            feats = batch(xs, max_lag, dist_kinds, first_lag=1, workers=workers)
            for k in dist_kinds:
                out[k] = feats[:, _FEATURE_ROW[k]]
        else:
            shape = (xs.shape[0], 1) + ((xs.shape[2],) * 2 if is_multi else ())
            for k in dist_kinds:
                out[k] = np.zeros(shape)
    return out


# ---------------------------------------------------------------------------
# statistics from features


def _lag_weights(kernel: KernelSpec, p: int, n: int, last: int) -> tuple[np.ndarray, np.ndarray]:
    w = squared_lag_weights(kernel, p, n)[1 : last + 1]
    j = np.arange(1, w.size + 1)
    return j, w


def _sum_pairs(a: np.ndarray) -> np.ndarray:
    # collapse trailing (d, d) axes when present
    return a.sum(axis=(-2, -1)) if a.ndim == 4 else a


def _spectral(rho: np.ndarray, kernel: KernelSpec, p: int, omega: np.ndarray) -> np.ndarray:
    """Kernel spectral estimate for a batch of autocorrelation rows."""
    lags = np.arange(1, rho.shape[1])
    k = kernel(lags / p)
    keep = k != 0.0
    lags, k = lags[keep], k[keep]
    cosines = np.cos(np.outer(lags, omega))
    return (1.0 + 2.0 * (rho[:, lags] * k) @ cosines) / (2.0 * np.pi)


def _trapezoid(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.sum((y[..., 1:] + y[..., :-1]) * np.diff(x), axis=-1) / 2.0


def _T2n_from_spectrum(f: np.ndarray) -> np.ndarray:
    gap = np.sqrt(np.clip(f, 0.0, None)) - math.sqrt(_F0)
    return np.sqrt(_trapezoid(gap**2, _OMEGA))


def _T3n_from_spectrum(f: np.ndarray) -> np.ndarray:
    pos = f > 0.0
    logs = np.log(np.where(pos, f, 1.0) / _F0)
    return -_trapezoid(np.where(pos, logs * _F0, 0.0), _OMEGA)


def _mLB(gammas: np.ndarray, n: int, p: int) -> np.ndarray:
    g0 = gammas[:, 0]
    out = np.zeros(gammas.shape[0])
    for b in range(gammas.shape[0]):
        try:
            inv0 = np.linalg.inv(g0[b])
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(inv0)):
            continue
        total = 0.0
        for j in range(1, p + 1):
            g = gammas[b, j]
            total += np.trace(g.T @ inv0 @ g @ inv0) / (n - j)
        out[b] = n * n * total
    return out


def evaluate_statistics(features: dict[str, np.ndarray], names, n: int, p: int, kernel=None) -> dict[str, np.ndarray]:
    """Evaluate statistics on features from :func:`statistic_features`."""
    kernel = as_kernel(kernel)
    out = {}
    for name in names:
        info = statistic_info(name)
        f = features[info.feature]
        if info.weighted:
            last = min(_required_lag(info, n, p, kernel), f.shape[1] - 1)
            j, w = _lag_weights(kernel, p, n, last)
        if name == "BP":
            out[name] = n * np.sum(f[:, 1 : p + 1] ** 2, axis=1)
        elif name == "LB":
            j = np.arange(1, p + 1)
            out[name] = n * (n + 2) * np.sum(f[:, 1 : p + 1] ** 2 / (n - j), axis=1)
        elif name == "H96":
            out[name] = n * (f[:, j] ** 2 @ w)
        elif name in ("T2n", "T3n"):
            spec = _spectral(f[:, : last + 1], kernel, p, _OMEGA)
            out[name] = _T2n_from_spectrum(spec) if name == "T2n" else _T3n_from_spectrum(spec)
        elif name in ("ST", "STm"):
            out[name] = np.sum(_sum_pairs(f[:, 1 : p + 1]), axis=1)
        elif name in ("H98", "H98m"):
            out[name] = _sum_pairs(f[:, j] ** 2) @ ((n - j) * w)
        elif name in ("H99", "FP", "FPm"):
            out[name] = _sum_pairs(f[:, j]) @ ((n - j) * w)
        elif name == "mLB":
            out[name] = _mLB(f, n, p)
    return out


def _single(name: str, x, p: int, kernel=None) -> float:
    info = statistic_info(name)
    if info.multivariate:
        xs = as_multiseries(x)[None]
    else:
        xs = as_series(x)[None]
        if info.feature == "acf" and not np.ptp(xs) > 0.0:
            raise ValueError(f"{name} is undefined for a constant series")
    if info.feature == "autocov":
        g0 = np.atleast_2d(np.cov(xs[0].T, bias=True))
        if np.linalg.matrix_rank(g0) < g0.shape[0]:
            raise ValueError("sample autocovariance at lag 0 is singular")
    feats = statistic_features(xs, [name], p, kernel, workers=1)
    return float(evaluate_statistics(feats, [name], xs.shape[1], p, kernel)[name][0])


def compute_statistic(name: str, x, p: int, kernel=None) -> TestStatistic:
    """Evaluate a named statistic on ``x`` and wrap it with its metadata."""
    info = statistic_info(name)
    kname = as_kernel(kernel).kind if info.weighted else None
    return TestStatistic(name, _single(name, x, p, kernel), int(p), kname)


# ---------------------------------------------------------------------------
# public statistics


def stat_BP(x, p: int) -> float:
    """Box-Pierce ``n sum_{j<=p} rho(j)^2``."""
    return _single("BP", x, p)


def stat_LB(x, p: int) -> float:
    """Ljung-Box ``n (n + 2) sum_{j<=p} rho(j)^2 / (n - j)``."""
    return _single("LB", x, p)


def stat_mLB(x, p: int) -> float:
    """Multivariate Ljung-Box statistic.

    ``n^2 sum_{j<=p} tr(G(j)' G(0)^-1 G(j) G(0)^-1) / (n - j)``.
    """
    return _single("mLB", x, p)


def spectral_estimate(x, kernel, p: int, omega):
    """Kernel estimate of the standardized spectral density.

    ``f(w) = (1 / 2 pi) sum_{|j| < n} k(j / p) rho(j) cos(j w)``.  Returns a
    float for scalar ``omega`` and an array otherwise.
    """
    x = as_series(x)
    om = np.asarray(omega, dtype=float)
    if np.any(np.abs(om) > np.pi + 1e-12):
        raise ValueError("omega must lie in [-pi, pi]")
    rho = acf_values(x, x.size - 1)[None]
    f = _spectral(rho, as_kernel(kernel), p, np.atleast_1d(om))[0]
    return float(f[0]) if om.ndim == 0 else f


def stat_H96(x, kernel, p: int) -> float:
    """Quadratic-norm spectral statistic ``n sum_j k^2(j/p) rho(j)^2``."""
    return _single("H96", x, p, kernel)


def stat_T2n(x, kernel, p: int) -> float:
    """Hellinger distance between the kernel spectral estimate and ``1/2pi``."""
    return _single("T2n", x, p, kernel)


def stat_T3n(x, kernel, p: int) -> float:
    """Kullback-Leibler type divergence of the kernel spectral estimate."""
    return _single("T3n", x, p, kernel)


def edf_marginal(x):
    """Empirical distribution function ``F(u) = #{x_t <= u} / N``."""
    xs = np.sort(as_series(x) if np.ndim(x) else np.atleast_1d(x).astype(float))
    size = xs.size
    if size < 1:
        raise ValueError("need at least one observation")

    def F(u):
        res = np.searchsorted(xs, u, side="right") / size
        return float(res) if np.ndim(res) == 0 else res

    return F


def edf_joint(x, y):
    """Joint empirical distribution ``F(u, v) = #{x_t <= u, y_t <= v} / N``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1 or x.size < 1:
        raise ValueError("x and y must be 1-D samples of equal, positive length")

    def F(u, v):
        u_arr, v_arr = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        hits = (x <= u_arr[..., None]) & (y <= v_arr[..., None])
        res = hits.mean(axis=-1)
        return float(res) if np.ndim(res) == 0 else res

    return F


def _lag_pairs(x, j: int) -> tuple[np.ndarray, np.ndarray]:
    x = as_series(x)
    n = x.size
    j = abs(int(j))
    if j > n - 2:
        raise ValueError(f"lag {j} leaves fewer than 2 pairs for n={n}")
    return x[: n - j], x[j:]


def dist_D1(x, j: int) -> float:
    """Kolmogorov-Smirnov distance between the lag-``j`` joint EDF and the
    product of marginals, maximized over the grid of observed values."""
    u, v = _lag_pairs(x, j)
    size = u.size
    ux, ui = np.unique(u, return_inverse=True)
    vx, vi = np.unique(v, return_inverse=True)
    counts = np.zeros((ux.size, vx.size))
    np.add.at(counts, (ui, vi), 1.0)
    joint = counts.cumsum(axis=0).cumsum(axis=1) / size
    fu = joint[:, -1]
    fv = joint[-1, :]
    return float(np.max(np.abs(joint - np.outer(fu, fv))))


def dist_D2(x, j: int) -> float:
    """Cramer-von Mises distance ``(1/N) sum_t (F(X_t, Y_t) - F(X_t) F(Y_t))^2``."""
    x = as_series(x)
    j = abs(int(j))
    _lag_pairs(x, j)
    return float(series_features(x, j, ("cvm",), first_lag=j)[CVM, j])


def stat_ST(x, p: int) -> float:
    """``sum_{j<=p} D2(j)``."""
    return _single("ST", x, p)


def stat_H98(x, kernel, p: int) -> float:
    """``sum_j (n - j) k^2(j/p) D2(j)^2``, with ``D2`` squared as written."""
    return _single("H98", x, p, kernel)


def gaussian_weighted_sigma2(x, j: int) -> float:
    """Integrated squared lag-``j`` characteristic-function covariance under
    a standard normal weight; equals the V-statistic with distances
    ``1 - exp(-d^2 / 2)``."""
    x = as_series(x)
    j = abs(int(j))
    _lag_pairs(x, j)
    return float(series_features(x, j, ("gauss",), first_lag=j)[GAUSS, j])


def stat_H99(x, kernel, p: int) -> float:
    """``sum_j (n - j) k^2(j/p) sigma^2_gauss(j)``."""
    return _single("H99", x, p, kernel)


def stat_FP(x, kernel, p: int) -> float:
    """``sum_j (n - j) k^2(j/p) V^2(j)``."""
    return _single("FP", x, p, kernel)


def stat_FP_multivariate(x, kernel, p: int, form: str = "sum") -> float:
    """Multivariate FP statistic.

    ``form="sum"`` adds ``V^2_rm(j)`` over component pairs;
    ``form="trace"`` evaluates ``tr(V(j)' V(j))`` with ``V(j)`` the matrix
    of distance covariances (square roots).  Both give the same value.
    """
    if form == "sum":
        return _single("FPm", x, p, kernel)
    if form != "trace":
        raise ValueError("form must be 'sum' or 'trace'")
    xs = as_multiseries(x)
    n = xs.shape[0]
    kernel = as_kernel(kernel)
    info = statistic_info("FPm")
    _check_p(info, n, p)
    last = _required_lag(info, n, p, kernel)
    if last < 1:
        return 0.0
    v2 = batch_multi_features(xs[None], last, ("dcov",), workers=1)[0, DCOV]
    j, w = _lag_weights(kernel, p, n, last)
    total = 0.0
    for lag, weight in zip(j, w):
        v = np.sqrt(v2[lag])
        total += (n - lag) * weight * np.trace(v.T @ v)
    return float(total)


def stat_ST_multivariate(x, p: int) -> float:
    """``sum_{r,m} sum_{j<=p} D2^(r,m)(j)``."""
    return _single("STm", x, p)


def stat_H98_multivariate(x, kernel, p: int) -> float:
    """``sum_{r,m} sum_j (n - j) k^2(j/p) D2^(r,m)(j)^2``."""
    return _single("H98m", x, p, kernel)
