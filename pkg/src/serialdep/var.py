"""Least-squares vector autoregression for residual diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .timeseries import as_multiseries

__all__ = ["VarModel", "var_fit", "var_aic", "var_order_select"]


@dataclass
class VarModel:
    """Fitted VAR(p) with intercept.

    ``coefs[i]`` multiplies ``X_{t-i-1}``; residuals have ``n - p`` rows and
    ``sigma`` is the maximum-likelihood innovation covariance ``E'E / (n - p)``.
    """

    order: int
    coefs: np.ndarray
    intercept: np.ndarray
    residuals: np.ndarray
    sigma: np.ndarray

    @property
    def dim(self) -> int:
        return self.intercept.size


def _design(x: np.ndarray, p: int, start: int) -> tuple[np.ndarray, np.ndarray]:
    # rows t = start..n-1: [1, x_{t-1}, ..., x_{t-p}]
    n = x.shape[0]
    lagged = [x[start - i : n - i] for i in range(1, p + 1)]
    z = np.hstack([np.ones((n - start, 1))] + lagged)
    return z, x[start:]


def _fit(x: np.ndarray, p: int, start: int) -> VarModel:
    n, d = x.shape
    if p < 1:
        raise ValueError("VAR order must be at least 1")
    if n - start <= d * p + 1:
        raise ValueError(f"too few observations ({n}) for a VAR({p}) in {d} dimensions")
    z, y = _design(x, p, start)
    if np.linalg.matrix_rank(z) < z.shape[1]:
        raise ValueError("regressor matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(z, y, rcond=None)
    resid = y - z @ beta
    coefs = beta[1:].reshape(p, d, d).transpose(0, 2, 1)
    sigma = resid.T @ resid / resid.shape[0]
    return VarModel(p, coefs, beta[0].copy(), resid, sigma)


def var_fit(x, order: int) -> VarModel:
    """Fit ``X_t = c + sum_i Phi_i X_{t-i} + e_t`` by least squares."""
    x = as_multiseries(x)
    return _fit(x, int(order), int(order))


def var_aic(model: VarModel) -> float:
    """``ln det Sigma + 2 d^2 p / T`` with ``T`` the number of residuals."""
    sign, logdet = np.linalg.slogdet(model.sigma)
    if sign <= 0:
        return np.inf
    t = model.residuals.shape[0]
    return float(logdet + 2.0 * model.dim**2 * model.order / t)


def var_order_select(x, max_order: int, criterion: str = "aic") -> int:
    """Order in ``1..max_order`` minimizing AIC.

    All candidate orders are fitted on the same sample, the observations
    after the first ``max_order``, so criteria are comparable.
    """
    if criterion.lower() != "aic":
        raise ValueError("only the AIC criterion is supported")
    max_order = int(max_order)
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    x = as_multiseries(x)
    scores = [var_aic(_fit(x, p, max_order)) for p in range(1, max_order + 1)]
    return int(np.argmin(scores)) + 1
