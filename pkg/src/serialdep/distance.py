"""Distance covariance and distance correlation for i.i.d. samples.

All estimators work on ``(n, p)`` arrays; 1-D input is treated as a single
column.  The plain estimators build the full ``n x n`` distance matrices, so
they are O(n^2) in time and memory.  For univariate data use
:func:`serialdep.fastdcov.dcov_fast_univariate`, which is O(n log n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

MetricKind = Literal["euclidean", "alpha-power", "gaussian-induced", "hsic-kernel-induced"]


def _distance_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gram matrix of k(x, y) = |x| + |y| - |x - y|."""
    nx = np.linalg.norm(x, axis=1)
    ny = np.linalg.norm(y, axis=1)
    return nx[:, None] + ny[None, :] - cdist(x, y)


@dataclass(frozen=True)
class MetricSpec:
    """How pairwise distances are measured.

    ``alpha`` is used by ``alpha-power`` (exponent in (0, 2)), ``sigma`` by
    ``gaussian-induced``.  ``kernel`` is a Gram-matrix callable
    ``kernel(X, Y) -> (len(X), len(Y))`` used by ``hsic-kernel-induced``; the
    default is the distance kernel ``|x| + |y| - |x - y|``.
    """

    kind: MetricKind = "euclidean"
    alpha: float = 1.0
    sigma: float = 1.0
    kernel: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "alpha-power", "gaussian-induced", "hsic-kernel-induced"):
            raise ValueError(f"unknown metric kind: {self.kind!r}")
        if self.kind == "alpha-power" and not 0.0 < self.alpha < 2.0:
            raise ValueError("alpha must lie strictly inside (0, 2)")
        if self.kind == "gaussian-induced" and not self.sigma > 0.0:
            raise ValueError("sigma must be positive")


EUCLIDEAN = MetricSpec()


def _as_metric(metric: MetricSpec | str | None) -> MetricSpec:
    if metric is None:
        return EUCLIDEAN
    if isinstance(metric, str):
        return MetricSpec(kind=metric)
    return metric


def as_sample(x, name: str = "x") -> np.ndarray:
    """Return ``x`` as a finite float array of shape ``(n, p)``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    elif arr.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError(f"{name} must contain at least one observation")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _paired(x, y, min_n: int) -> tuple[np.ndarray, np.ndarray]:
    x = as_sample(x, "x")
    y = as_sample(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"samples differ in length: {x.shape[0]} != {y.shape[0]}")
    if x.shape[0] < min_n:
        raise ValueError(f"need at least {min_n} observations, got {x.shape[0]}")
    return x, y


def pairwise_distances(x, metric: MetricSpec | str | None = None) -> np.ndarray:
    """Pairwise distance matrix of the rows of ``x`` under ``metric``."""
    x = as_sample(x)
    metric = _as_metric(metric)
    if metric.kind == "hsic-kernel-induced":
        kernel = metric.kernel or _distance_kernel
        gram = np.asarray(kernel(x, x), dtype=float)
        diag = np.diag(gram)
        d = 0.5 * (diag[:, None] + diag[None, :]) - gram
        d = 0.5 * (d + d.T)
        np.fill_diagonal(d, 0.0)
        return d
    if metric.kind == "gaussian-induced":
        sq = cdist(x, x, "sqeuclidean")
        return -np.expm1(-sq / (2.0 * metric.sigma**2))
    if x.shape[1] == 1:
        d = np.abs(x[:, 0][:, None] - x[:, 0][None, :])
    else:
        d = cdist(x, x)
    if metric.kind == "alpha-power":
        d = d**metric.alpha
    return d


def double_center(raw) -> np.ndarray:
    """Subtract row and column means and add back the grand mean."""
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    row = a.mean(axis=1)
    col = a.mean(axis=0)
    return a - row[:, None] - col[None, :] + a.mean()


def u_center(raw) -> np.ndarray:
    """U-centering; the diagonal of the result is zero.  Requires n > 3."""
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n <= 3:
        raise ValueError("U-centering needs n > 3")
    row = a.sum(axis=1)
    col = a.sum(axis=0)
    out = a - row[:, None] / (n - 2) - col[None, :] / (n - 2) + a.sum() / ((n - 1) * (n - 2))
    np.fill_diagonal(out, 0.0)
    return out


@dataclass(frozen=True)
class CenteredDistanceMatrix:
    raw: np.ndarray
    centered: np.ndarray
    mode: Literal["double", "u-centered"]


def centered_distances(
    x, metric: MetricSpec | str | None = None, mode: Literal["double", "u-centered"] = "double"
) -> CenteredDistanceMatrix:
    raw = pairwise_distances(x, metric)
    if mode == "double":
        return CenteredDistanceMatrix(raw, double_center(raw), mode)
    if mode == "u-centered":
        return CenteredDistanceMatrix(raw, u_center(raw), mode)
    raise ValueError(f"unknown centering mode: {mode!r}")


def dcov_v(x, y, metric: MetricSpec | str | None = None) -> float:
    """Biased (V-statistic) squared distance covariance, ``mean(A * B)``."""
    x, y = _paired(x, y, 2)
    a = double_center(pairwise_distances(x, metric))
    b = double_center(pairwise_distances(y, metric))
    return max(float(np.mean(a * b)), 0.0)


def dcov_v_expanded(x, y, metric: MetricSpec | str | None = None) -> float:
    """Same estimator as :func:`dcov_v`, computed from raw distances.

    Uses the three-sum expansion ``S1 + S2 - 2 S3`` without forming centered
    matrices; kept as an independent route for cross-checks.
    """
    x, y = _paired(x, y, 2)
    n = x.shape[0]
    a = pairwise_distances(x, metric)
    b = pairwise_distances(y, metric)
    s1 = np.sum(a * b) / n**2
    s2 = a.sum() * b.sum() / n**4
    # sum_{i,j,k} a_ij b_jk = sum_j (column sum of a)_j (row sum of b)_j
    s3 = np.dot(a.sum(axis=0), b.sum(axis=1)) / n**3
    return max(float(s1 + s2 - 2.0 * s3), 0.0)


def dcov_u(x, y, metric: MetricSpec | str | None = None) -> float:
    """Unbiased squared distance covariance from U-centered matrices (n > 3).

    Unlike :func:`dcov_v` the value may be negative.
    """
    x, y = _paired(x, y, 4)
    n = x.shape[0]
    a = u_center(pairwise_distances(x, metric))
    b = u_center(pairwise_distances(y, metric))
    return float(np.sum(a * b) / (n * (n - 3)))


def _dcor_from_parts(vxy: float, vxx: float, vyy: float) -> float:
    denom = vxx * vyy
    if not denom > 0.0:
        return 0.0
    r2 = vxy / math.sqrt(denom)
    return math.sqrt(min(max(r2, 0.0), 1.0))


def dcor(x, y, metric: MetricSpec | str | None = None) -> float:
    """Sample distance correlation R (the nonnegative root of R^2)."""
    x, y = _paired(x, y, 2)
    a = double_center(pairwise_distances(x, metric))
    b = double_center(pairwise_distances(y, metric))
    return _dcor_from_parts(float(np.mean(a * b)), float(np.mean(a * a)), float(np.mean(b * b)))


def hsic_v(x, y, kernel_x=None, kernel_y=None) -> float:
    """V-statistic HSIC, ``mean(K~ * L~)`` with double-centered Gram matrices.

    With the default distance kernels this coincides with :func:`dcov_v`.
    """
    x, y = _paired(x, y, 2)
    k = np.asarray((kernel_x or _distance_kernel)(x, x), dtype=float)
    l_ = np.asarray((kernel_y or _distance_kernel)(y, y), dtype=float)
    return float(np.mean(double_center(k) * double_center(l_)))


def dcor_normal_closed_form(r: float) -> float:
    """Population R^2 for a standard bivariate normal with correlation ``r``."""
    r = float(r)
    if not -1.0 <= r <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    num = (
        r * math.asin(r)
        + math.sqrt(1.0 - r * r)
        - r * math.asin(r / 2.0)
        - math.sqrt(4.0 - r * r)
        + 1.0
    )
    den = 1.0 + math.pi / 3.0 - math.sqrt(3.0)
    return min(max(num / den, 0.0), 1.0)


def dcor_bernoulli_closed_form(p: float) -> float:
    """Population R^2 of the symmetric coupled Bernoulli pair, ``(2p - 1)^2``.

    ``p`` is the probability that the two coordinates agree.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return (2.0 * p - 1.0) ** 2


def _inv_sqrt_cov(x: np.ndarray, name: str) -> np.ndarray:
    cov = np.atleast_2d(np.cov(x, rowvar=False))
    w, v = np.linalg.eigh(cov)
    if w.max() <= 0.0 or w.min() < 1e-10 * w.max():
        raise np.linalg.LinAlgError(f"sample covariance of {name} is singular")
    return (v / np.sqrt(w)) @ v.T


def _whiten(x: np.ndarray, name: str) -> np.ndarray:
    if x.shape[0] <= x.shape[1]:
        raise ValueError(f"{name} needs more observations than dimensions")
    return x @ _inv_sqrt_cov(x, name)


def dcov_affine(x, y) -> float:
    """Affinely invariant squared distance covariance.

    Each sample is whitened by the inverse square root of its sample
    covariance matrix before :func:`dcov_v` is applied.
    """
    x, y = _paired(x, y, 2)
    return dcov_v(_whiten(x, "x"), _whiten(y, "y"))


def dcor_affine(x, y) -> float:
    x, y = _paired(x, y, 2)
    return dcor(_whiten(x, "x"), _whiten(y, "y"))


def pdcor(x, y, z, metric: MetricSpec | str | None = None, tol: float = 1e-10) -> float:
    """Partial distance correlation R*(x, y; z).

    Returns 0 when either x or y has distance correlation 1 with z (within
    ``tol`` on the squared scale).
    """
    x, y = _paired(x, y, 2)
    _paired(x, z, 2)
    rxy2 = dcor(x, y, metric) ** 2
    rxz2 = dcor(x, z, metric) ** 2
    ryz2 = dcor(y, z, metric) ** 2
    if rxz2 >= 1.0 - tol or ryz2 >= 1.0 - tol:
        return 0.0
    return (rxy2 - rxz2 * ryz2) / (math.sqrt(1.0 - rxz2**2) * math.sqrt(1.0 - ryz2**2))


def normal_scores(x) -> np.ndarray:
    """Approximate normal scores ``Phi^-1((rank - 3/8) / (n + 1/4))``.

    Ties get average ranks.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ValueError("normal scores need at least one observation")
    ranks = stats.rankdata(x, method="average")
    return stats.norm.ppf((ranks - 0.375) / (n + 0.25))


def feuerverger_statistic(x, y) -> float:
    """Rank statistic ``n * V^2`` computed on normal scores of x and y."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError(f"samples differ in length: {x.size} != {y.size}")
    return x.size * dcov_v(normal_scores(x), normal_scores(y))


def dcor_screen(predictors, response, d: int, metric: MetricSpec | str | None = None) -> list[int]:
    """Indices of the ``d`` predictor columns with largest distance correlation.

    Ordered by decreasing score; equal scores keep the lower index first.
    """
    xs = np.asarray(predictors, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    if d < 1:
        raise ValueError("d must be at least 1")
    if d > xs.shape[1]:
        raise ValueError(f"d={d} exceeds the number of predictors ({xs.shape[1]})")
    scores = np.array([dcor(xs[:, k], response, metric) for k in range(xs.shape[1])])
    order = sorted(range(len(scores)), key=lambda k: (-scores[k], k))
    return order[:d]
