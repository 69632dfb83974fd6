"""Per-lag dependence measures for a pair of aligned series.

For lag ``j`` the sample is the ``N = n - j`` pairs ``(u[t], v[t + j])``.
One O(N^2) sweep per lag yields

* ``dcov``  -- squared distance covariance with euclidean distances,
* ``gauss`` -- the same V-statistic with distances ``1 - exp(-d^2 / 2)``
  (characteristic-function distance under a standard normal weight),
* ``cvm``   -- Cramer-von Mises distance between the joint EDF and the
  product of marginal EDFs, averaged over the sample points.

Everything here is a numerical kernel; the public wrappers live in
:mod:`serialdep.timeseries` and :mod:`serialdep.portmanteau`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from ._parallel import worker_count

DCOV, GAUSS, CVM = 0, 1, 2
KINDS = ("dcov", "gauss", "cvm")


@njit(cache=True, nogil=True, fastmath=True)
def _gauss_table(u):
    # 1 - exp(-d^2 / 2), filled row by row so the loop vectorizes
    n = u.shape[0]
    g = np.empty((n, n))
    for t in range(n):
        ut = u[t]
        for s in range(n):
            d = ut - u[s]
            g[t, s] = 1.0 - np.exp(-0.5 * d * d)
    return g


@njit(cache=True, nogil=True, fastmath=True)
def _dcov_lag_sums(u, v, j, m):
    cross = 0.0
    sra = 0.0
    srb = 0.0
    sdot = 0.0
    for t in range(m):
        ut = u[t]
        vt = v[t + j]
        c = 0.0
        ra = 0.0
        rb = 0.0
        for s in range(m):
            a = abs(ut - u[s])
            b = abs(vt - v[s + j])
            c += a * b
            ra += a
            rb += b
        cross += c
        sra += ra
        srb += rb
        sdot += ra * rb
    return cross, sra, srb, sdot


@njit(cache=True, nogil=True, fastmath=True)
def _table_lag_sums(a, b, j, m):
    cross = 0.0
    sra = 0.0
    srb = 0.0
    sdot = 0.0
    for t in range(m):
        at = a[t]
        bt = b[t + j]
        c = 0.0
        ra = 0.0
        rb = 0.0
        for s in range(m):
            x = at[s]
            y = bt[s + j]
            c += x * y
            ra += x
            rb += y
        cross += c
        sra += ra
        srb += rb
        sdot += ra * rb
    return cross, sra, srb, sdot


@njit(cache=True, nogil=True)
def _vstat(sums, m):
    # three-sum expansion of the V-statistic
    cross, sra, srb, sdot = sums
    nf = float(m)
    return max(cross / nf**2 + sra * srb / nf**4 - 2.0 * sdot / nf**3, 0.0)


@njit(cache=True, nogil=True, fastmath=True)
def _cvm_lag(u, v, j, m):
    nf = float(m)
    acc = 0.0
    for t in range(m):
        ut = u[t]
        vt = v[t + j]
        nj = 0
        nx = 0
        ny = 0
        for s in range(m):
            bx = 1 if u[s] <= ut else 0
            by = 1 if v[s + j] <= vt else 0
            nj += bx * by
            nx += bx
            ny += by
        # integer numerator keeps independent-looking ties exact
        gap = float(nj * m - nx * ny)
        acc += gap * gap
    return acc / nf**5


@njit(cache=True, nogil=True)
def _pair_features(u, v, gu, gv, first_lag, max_lag, want, out):
    """Fill ``out[kind, j]`` for lags first_lag..max_lag."""
    n = u.shape[0]
    for j in range(first_lag, max_lag + 1):
        m = n - j
        if want[DCOV]:
            out[DCOV, j] = _vstat(_dcov_lag_sums(u, v, j, m), m)
        if want[GAUSS]:
            out[GAUSS, j] = _vstat(_table_lag_sums(gu, gv, j, m), m)
        if want[CVM]:
            out[CVM, j] = _cvm_lag(u, v, j, m)


_EMPTY = np.zeros((0, 0))


def _gauss(u, want):
    return _gauss_table(u) if want[GAUSS] else _EMPTY


def _want(kinds) -> np.ndarray:
    kinds = set(kinds)
    unknown = kinds - set(KINDS)
    if unknown:
        raise ValueError(f"unknown lag feature(s): {sorted(unknown)}")
    return np.array([k in kinds for k in KINDS])


def pair_features(u, v, max_lag: int, kinds=KINDS, first_lag: int = 1) -> np.ndarray:
    """Lag features of ``(u[t], v[t+j])``; returns ``(3, max_lag + 1)``.

    Rows follow ``KINDS``; entries that were not requested (or lags below
    ``first_lag``) are NaN.
    """
    u = np.ascontiguousarray(u, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    n = u.shape[0]
    if not 0 <= first_lag <= max_lag <= n - 2:
        raise ValueError(f"lags must satisfy 0 <= {first_lag} <= {max_lag} <= n - 2 = {n - 2}")
    want = _want(kinds)
    gu = _gauss(u, want)
    gv = gu if v is u else _gauss(v, want)
    out = np.full((3, max_lag + 1), np.nan)
    _pair_features(u, v, gu, gv, first_lag, max_lag, want, out)
    return out


def series_features(x, max_lag: int, kinds=KINDS, first_lag: int = 1) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=float)
    return pair_features(x, x, max_lag, kinds, first_lag)


def multi_features(x, max_lag: int, kinds=KINDS, first_lag: int = 1) -> np.ndarray:
    """Cross-component lag features; returns ``(3, max_lag + 1, d, d)``.

    Entry ``[:, j, r, m]`` describes the pairs ``(x[t, r], x[t + j, m])``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    if not 0 <= first_lag <= max_lag <= n - 2:
        raise ValueError(f"lags must satisfy 0 <= {first_lag} <= {max_lag} <= n - 2 = {n - 2}")
    want = _want(kinds)
    cols = [np.ascontiguousarray(x[:, r]) for r in range(d)]
    gs = [_gauss(c, want) for c in cols]
    out = np.full((3, max_lag + 1, d, d), np.nan)
    buf = np.empty((3, max_lag + 1))
    for r in range(d):
        for m in range(d):
            buf.fill(np.nan)
            _pair_features(cols[r], cols[m], gs[r], gs[m], first_lag, max_lag, want, buf)
            out[:, :, r, m] = buf
    return out


def batch_series_features(xs, max_lag: int, kinds=KINDS, first_lag: int = 1, workers=None) -> np.ndarray:
    """:func:`series_features` for every row of ``xs``; returns ``(B, 3, L + 1)``."""
    xs = np.asarray(xs, dtype=float)
    rows = xs.shape[0]
    out = np.empty((rows, 3, max_lag + 1))

    def run(lo, hi):
        for b in range(lo, hi):
            out[b] = series_features(xs[b], max_lag, kinds, first_lag)

    _run_chunks(run, rows, workers)
    return out


def batch_multi_features(xs, max_lag: int, kinds=KINDS, first_lag: int = 1, workers=None) -> np.ndarray:
    """:func:`multi_features` for every ``xs[b]``; returns ``(B, 3, L + 1, d, d)``."""
    xs = np.asarray(xs, dtype=float)
    rows, _, d = xs.shape
    out = np.empty((rows, 3, max_lag + 1, d, d))

    def run(lo, hi):
        for b in range(lo, hi):
            out[b] = multi_features(xs[b], max_lag, kinds, first_lag)

    _run_chunks(run, rows, workers)
    return out


def _run_chunks(run, rows: int, workers) -> None:
    # every row is written by exactly one task, so the result does not
    # depend on the number of workers or on completion order
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or rows < 2:
        run(0, rows)
        return
    bounds = np.linspace(0, rows, min(workers, rows) + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run, lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
        for f in futures:
            f.result()
