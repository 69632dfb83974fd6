"""O(n log n) distance covariance for univariate samples.

The V-statistic expands as

    V^2 = S1 / n^2 + (sum a)(sum b) / n^4 - 2 sum_i a_i. b_i. / n^3

where ``a_i.`` are row sums of ``|x_i - x_j|``.  Row sums follow from a sort
and prefix sums.  ``S1 = sum_ij |x_i - x_j| |y_i - y_j|`` is accumulated by
sweeping the points in x order and querying Fenwick trees indexed by y rank
for the count, sum x, sum y and sum xy of earlier points with smaller y.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _row_sums(x):
    # x is shifted so that min(x) == 0; ties give exact zeros
    n = x.shape[0]
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    prefix = np.empty(n + 1)
    prefix[0] = 0.0
    for k in range(n):
        prefix[k + 1] = prefix[k] + xs[k]
    total = prefix[n]
    out = np.empty(n)
    for k in range(n):
        v = xs[k]
        below = k * v - prefix[k]
        above = (total - prefix[k + 1]) - (n - k - 1) * v
        out[order[k]] = below + above
    return out


@njit(cache=True, nogil=True)
def _cross_sum(x, y):
    n = x.shape[0]
    # dense ranks of y, 1-based for the Fenwick trees
    yorder = np.argsort(y, kind="mergesort")
    rank = np.empty(n, dtype=np.int64)
    r = 0
    prev = np.nan
    for k in range(n):
        v = y[yorder[k]]
        if k == 0 or v != prev:
            r += 1
            prev = v
        rank[yorder[k]] = r
    size = r
    t_cnt = np.zeros(size + 1)
    t_x = np.zeros(size + 1)
    t_y = np.zeros(size + 1)
    t_xy = np.zeros(size + 1)
    c_all = 0.0
    sx_all = 0.0
    sy_all = 0.0
    sxy_all = 0.0
    total = 0.0
    xorder = np.argsort(x, kind="mergesort")
    for k in range(n):
        i = xorder[k]
        xi = x[i]
        yi = y[i]
        c1 = 0.0
        sx1 = 0.0
        sy1 = 0.0
        sxy1 = 0.0
        pos = rank[i]
        while pos > 0:
            c1 += t_cnt[pos]
            sx1 += t_x[pos]
            sy1 += t_y[pos]
            sxy1 += t_xy[pos]
            pos -= pos & (-pos)
        # earlier points j have x_j <= x_i
        le = c1 * xi * yi - xi * sy1 - yi * sx1 + sxy1
        c2 = c_all - c1
        gt = xi * (sy_all - sy1) - c2 * xi * yi - (sxy_all - sxy1) + yi * (sx_all - sx1)
        total += le + gt
        pos = rank[i]
        while pos <= size:
            t_cnt[pos] += 1.0
            t_x[pos] += xi
            t_y[pos] += yi
            t_xy[pos] += xi * yi
            pos += pos & (-pos)
        c_all += 1.0
        sx_all += xi
        sy_all += yi
        sxy_all += xi * yi
    return 2.0 * total


@njit(cache=True, nogil=True)
def _fast_dcov(x, y):
    n = x.shape[0]
    x = x - x.min()
    y = y - y.min()
    ra = _row_sums(x)
    rb = _row_sums(y)
    s1 = _cross_sum(x, y)
    nf = float(n)
    v = s1 / nf**2 + ra.sum() * rb.sum() / nf**4 - 2.0 * np.dot(ra, rb) / nf**3
    return max(v, 0.0)


def _univariate(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be univariate, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def dcov_fast_univariate(x, y) -> float:
    """Biased squared distance covariance of two univariate samples."""
    x = _univariate(x, "x")
    y = _univariate(y, "y")
    if x.size != y.size:
        raise ValueError(f"samples differ in length: {x.size} != {y.size}")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    return float(_fast_dcov(x, y))


def dcor_fast_univariate(x, y) -> float:
    """Distance correlation R of two univariate samples in O(n log n)."""
    x = _univariate(x, "x")
    y = _univariate(y, "y")
    vxy = dcov_fast_univariate(x, y)
    denom = float(_fast_dcov(x, x)) * float(_fast_dcov(y, y))
    if not denom > 0.0:
        return 0.0
    return float(np.sqrt(min(max(vxy / np.sqrt(denom), 0.0), 1.0)))
