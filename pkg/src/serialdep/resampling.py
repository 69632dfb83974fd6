"""Resampling calibration: permutation, i.i.d. bootstrap, wild bootstrap
and block subsampling.

Replicate ``b`` always draws from its own generator,
``default_rng(SeedSequence(seed, spawn_key=(b,)))``, so results do not
depend on how replicates are scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from ._lagfeatures import _run_chunks
from .distance import centered_distances, double_center, feuerverger_statistic, normal_scores
from .fastdcov import _fast_dcov
from .kernels import as_kernel
from .portmanteau import (
    TestStatistic,
    compute_statistic,
    evaluate_statistics,
    statistic_features,
    statistic_info,
)
from .timeseries import as_multiseries, as_series

__all__ = [
    "ResamplingPlan",
    "TestResult",
    "replicate_rng",
    "bootstrap_indices",
    "resampling_pvalue",
    "permutation_pvalue",
    "iid_bootstrap_pvalue",
    "bootstrap_tests",
    "wild_bootstrap_band",
    "wild_max_adcf",
    "block_statistics",
    "subsample_band",
    "default_block_candidates",
    "select_min_volatility",
    "min_volatility_block",
]

METHODS = ("permutation", "iid-bootstrap", "wild-bootstrap", "subsampling")
MULTIPLIERS = ("normal", "rademacher")

Seed = int | Sequence[int]


def _entropy(seed: Seed):
    if isinstance(seed, (int, np.integer)):
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        return int(seed)
    vals = [int(s) for s in seed]
    if any(v < 0 for v in vals):
        raise ValueError("seed must be nonnegative")
    return vals


def replicate_rng(seed: Seed, b: int) -> np.random.Generator:
    """Generator for replicate ``b`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed), spawn_key=(int(b),)))


def _check_B(B: int) -> int:
    if int(B) != B or B < 1:
        raise ValueError("B must be a positive integer")
    return int(B)


@dataclass(frozen=True)
class ResamplingPlan:
    """How to calibrate a statistic."""

    method: str = "iid-bootstrap"
    B: int = 299
    seed: Seed = 0
    block: int | None = None
    multiplier: str = "normal"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        _check_B(self.B)
        _entropy(self.seed)
        if self.block is not None:
            if self.method != "subsampling":
                raise ValueError("a block length only applies to subsampling")
            if self.block < 2:
                raise ValueError("block length must be at least 2")
        if self.multiplier not in MULTIPLIERS:
            raise ValueError(f"multiplier must be one of {MULTIPLIERS}")


@dataclass
class TestResult:
    """Outcome of a resampling test."""

    statistic: TestStatistic
    p_value: float
    B: int
    method: str
    seed: Seed
    critical_value: float | None = None
    alpha: float | None = None
    replicates: np.ndarray | None = field(default=None, repr=False, compare=False)

    def reject(self, alpha: float | None = None) -> bool:
        alpha = self.alpha if alpha is None else alpha
        if alpha is None:
            raise ValueError("no level given")
        return self.p_value <= alpha

    def to_dict(self) -> dict:
        out = asdict(self.statistic)
        out.update(
            p_value=self.p_value,
            B=self.B,
            method=self.method,
            seed=self.seed if isinstance(self.seed, int) else list(self.seed),
            critical_value=self.critical_value,
            alpha=self.alpha,
        )
        return out


def resampling_pvalue(observed: float, replicates) -> float:
    """``(1 + #{replicates >= observed}) / (B + 1)``."""
    reps = np.asarray(replicates, dtype=float)
    return float((1 + np.count_nonzero(reps >= observed)) / (reps.size + 1))


def _result(stat: TestStatistic, reps, method, seed, alpha) -> TestResult:
    reps = np.asarray(reps, dtype=float)
    crit = None
    if alpha is not None:
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        crit = float(np.quantile(reps, 1.0 - alpha))
    return TestResult(stat, resampling_pvalue(stat.value, reps), reps.size, method, seed, crit, alpha, reps)


# ---------------------------------------------------------------------------
# i.i.d. two-sample permutation test


def permutation_pvalue(
    x, y, B: int = 499, seed: Seed = 0, statistic: str = "dcov", metric=None, alpha: float | None = None
) -> TestResult:
    """Permutation test of independence between two samples.

    ``statistic="dcov"`` uses ``n V^2``; ``"feuerverger"`` uses ``n V^2`` of
    normal scores.  Each replicate permutes the rows of ``y``.
    """
    B = _check_B(B)
    if statistic == "feuerverger":
        xs, ys = normal_scores(x), normal_scores(y)
        observed = feuerverger_statistic(x, y)
        metric = None
    elif statistic == "dcov":
        xs, ys = x, y
        observed = None
    else:
        raise ValueError("statistic must be 'dcov' or 'feuerverger'")
    a = centered_distances(xs, metric).centered
    b = centered_distances(ys, metric).centered
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"samples differ in length: {n} != {b.shape[0]}")
    if observed is None:
        observed = max(float(np.sum(a * b)) / n, 0.0)
    reps = np.empty(B)
    for k in range(B):
        perm = replicate_rng(seed, k).permutation(n)
        reps[k] = max(float(np.sum(a * b[np.ix_(perm, perm)])) / n, 0.0)
    name = "Feuerverger" if statistic == "feuerverger" else "nV2"
    return _result(TestStatistic(name, float(observed), 0), reps, "permutation", seed, alpha)


# ---------------------------------------------------------------------------
# ordinary bootstrap under the i.i.d. null


def bootstrap_indices(seed: Seed, B: int, n: int) -> np.ndarray:
    """Row indices ``(B, n)`` drawn with replacement, one stream per replicate."""
    B = _check_B(B)
    return np.stack([replicate_rng(seed, k).integers(0, n, size=n) for k in range(B)])


def iid_bootstrap_pvalue(
    stat_fn: Callable[[np.ndarray], float] | str,
    x,
    plan: ResamplingPlan | None = None,
    *,
    p: int | None = None,
    kernel=None,
    alpha: float | None = None,
    workers=None,
) -> TestResult:
    """Bootstrap p-value of a statistic under the i.i.d. null.

    ``stat_fn`` is either a callable evaluated on each resampled series or
    the name of a portmanteau statistic (then ``p`` is required and the
    batched feature path is used).  Resampling draws whole rows, so
    multivariate series keep their cross-sectional structure.
    """
    plan = plan or ResamplingPlan()
    if plan.method != "iid-bootstrap":
        raise ValueError("plan.method must be 'iid-bootstrap'")
    if isinstance(stat_fn, str):
        if p is None:
            raise ValueError("p is required for a named statistic")
        return bootstrap_tests(x, [stat_fn], p, kernel, plan.B, plan.seed, alpha=alpha, workers=workers)[stat_fn]
    arr = np.asarray(x, dtype=float)
    n = arr.shape[0]
    idx = bootstrap_indices(plan.seed, plan.B, n)
    observed = float(stat_fn(arr))
    reps = np.empty(plan.B)

    def run(lo, hi):
        for k in range(lo, hi):
            reps[k] = stat_fn(arr[idx[k]])

    _run_chunks(run, plan.B, workers)
    name = getattr(stat_fn, "__name__", "statistic")
    return _result(TestStatistic(name, observed, 0), reps, "iid-bootstrap", plan.seed, alpha)


def bootstrap_tests(
    x, names, p: int, kernel=None, B: int = 299, seed: Seed = 0, alpha: float | None = None, workers=None
) -> dict[str, TestResult]:
    """Bootstrap several portmanteau statistics on shared resamples."""
    names = list(names)
    B = _check_B(B)
    multi = {statistic_info(nm).multivariate for nm in names}
    if len(multi) != 1:
        raise ValueError("names must be all univariate or all multivariate")
    arr = as_multiseries(x) if multi.pop() else as_series(x)
    for nm in names:
        if statistic_info(nm).feature in ("acf", "autocov"):
            # raises on degenerate input
            compute_statistic(nm, arr, p, kernel)
    n = arr.shape[0]
    idx = bootstrap_indices(seed, B, n)
    rows = np.concatenate([arr[None], arr[idx]], axis=0)
    feats = statistic_features(rows, names, p, kernel, workers=workers)
    values = evaluate_statistics(feats, names, n, p, kernel)
    kname = as_kernel(kernel).kind
    out = {}
    for nm in names:
        v = values[nm]
        stat = TestStatistic(nm, float(v[0]), int(p), kname if statistic_info(nm).weighted else None)
        out[nm] = _result(stat, v[1:], "iid-bootstrap", seed, alpha)
    return out


# ---------------------------------------------------------------------------
# wild bootstrap simultaneous band


def _multipliers(seed: Seed, B: int, n: int, kind: str) -> np.ndarray:
    if kind not in MULTIPLIERS:
        raise ValueError(f"multiplier must be one of {MULTIPLIERS}")
    out = np.empty((B, n))
    for k in range(B):
        rng = replicate_rng(seed, k)
        out[k] = rng.standard_normal(n) if kind == "normal" else rng.choice((-1.0, 1.0), size=n)
    return out


def _lag_list(lags, n: int) -> np.ndarray:
    arr = np.arange(1, int(lags) + 1) if np.ndim(lags) == 0 else np.asarray(lags, dtype=int)
    if arr.size == 0 or np.any(arr < 1) or np.any(arr > n - 2):
        raise ValueError(f"lags must lie in 1..{n - 2}")
    return arr


def wild_bootstrap_band(
    x, lags, B: int = 499, seed: Seed = 0, level: float = 0.95, multiplier: str = "normal", workers=None
) -> np.ndarray:
    """Simultaneous ADCF critical value by the multiplier (wild) bootstrap.

    Replicate ``b`` draws multipliers ``W_1..W_n`` once and, for each lag
    ``j``, forms ``V*^2(j) = W' (A o B) W / N^2`` over the first ``N = n - j``
    multipliers, with ``A``, ``B`` the double-centered distance matrices of
    the lag-``j`` pairs.  The band is the ``level`` quantile of
    ``max_j sqrt(V*^2(j) / V^2(0))``, returned once per lag.

    Parameters
    ----------
    lags : int or sequence of int
        Maximum lag (meaning ``1..lags``) or explicit positive lags.
    """
    x = as_series(x)
    B = _check_B(B)
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    lag_arr = _lag_list(lags, x.size)
    w = _multipliers(seed, B, x.size, multiplier)
    band = float(np.quantile(wild_max_adcf(x, x, lag_arr, w, workers), level))
    return np.full(lag_arr.size, band)


def wild_max_adcf(u, v, lags, w: np.ndarray, workers=None) -> np.ndarray:
    """Per-replicate ``max_j sqrt(V*^2(j) / sqrt(V_u^2(0) V_v^2(0)))``.

    Pairs at lag ``j`` are ``(u[t], v[t + j])``; ``w`` holds one row of
    multipliers per replicate.
    """
    u = np.ascontiguousarray(u, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    n = u.size
    lag_arr = np.asarray(lags, dtype=int)
    denom = math.sqrt(max(float(_fast_dcov(u, u)), 0.0) * max(float(_fast_dcov(v, v)), 0.0))
    if not denom > 0.0:
        return np.zeros(w.shape[0])
    stars = np.empty((w.shape[0], lag_arr.size))

    def run(lo, hi):
        for col in range(lo, hi):
            j = lag_arr[col]
            size = n - j
            a = double_center(np.abs(u[:size, None] - u[None, :size]))
            b = double_center(np.abs(v[j:, None] - v[None, j:]))
            wj = w[:, :size]
            stars[:, col] = np.einsum("bt,bt->b", wj @ (a * b), wj) / size**2

    _run_chunks(run, lag_arr.size, workers)
    return np.sqrt(np.clip(stars, 0.0, None) / denom).max(axis=1)


# ---------------------------------------------------------------------------
# block subsampling pairwise band


@njit(cache=True, nogil=True)
def _block_dcovs(u, v, b):
    # V^2 of every window of b consecutive pairs; the row sums and the cross
    # sum are updated in O(b) as one pair leaves and the next one enters
    count = u.shape[0] - b + 1
    out = np.empty(count)
    ra = np.zeros(b)
    rb = np.zeros(b)
    cross = 0.0
    for i in range(b):
        for k in range(i + 1, b):
            da = abs(u[i] - u[k])
            db = abs(v[i] - v[k])
            ra[i] += da
            ra[k] += da
            rb[i] += db
            rb[k] += db
            cross += 2.0 * da * db
    bf = float(b)
    for start in range(count):
        sa = 0.0
        sb = 0.0
        sab = 0.0
        for i in range(b):
            sa += ra[i]
            sb += rb[i]
            sab += ra[i] * rb[i]
        out[start] = max(cross / bf**2 + sa * sb / bf**4 - 2.0 * sab / bf**3, 0.0)
        if start + 1 == count:
            break
        # slot start % b holds the leaving pair; it is reused by the new one
        old = start % b
        new = start + b
        na = 0.0
        nb = 0.0
        for i in range(b):
            if i == old:
                continue
            t = start + ((i - old) % b)
            da = abs(u[t] - u[start])
            db = abs(v[t] - v[start])
            ea = abs(u[t] - u[new])
            eb = abs(v[t] - v[new])
            ra[i] += ea - da
            rb[i] += eb - db
            cross += 2.0 * (ea * eb - da * db)
            na += ea
            nb += eb
        ra[old] = na
        rb[old] = nb
    return out


def block_statistics(u, v, j: int, b: int) -> np.ndarray:
    """Rescaled ``V^2`` of every block of ``b`` consecutive pairs ``(u[t], v[t + j])``."""
    n = u.size
    size = n - j
    if not 2 <= b <= size:
        raise ValueError(f"block length must lie in [2, {size}] for lag {j}")
    stats = _block_dcovs(np.ascontiguousarray(u[:size]), np.ascontiguousarray(v[j:]), int(b))
    return stats * (b / size)


def subsample_band(x, j: int, b: int, level: float = 0.95, scale: str = "adcv") -> float:
    """Pairwise critical value for lag ``j`` from overlapping blocks.

    Every block of ``b`` consecutive lag-``j`` pairs yields ``V^2_b``; the
    values are rescaled by ``b / (n - j)`` to the full-sample rate and the
    ``level`` quantile is returned.  ``scale="adcf"`` converts the band to
    the ADCF scale, ``sqrt(band / V^2(0))``.
    """
    x = as_series(x)
    j = abs(int(j))
    if j < 1 or j > x.size - 2:
        raise ValueError(f"lag must lie in 1..{x.size - 2}")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    band = float(np.quantile(block_statistics(x, x, j, int(b)), level))
    if scale == "adcv":
        return band
    if scale != "adcf":
        raise ValueError("scale must be 'adcv' or 'adcf'")
    v0 = float(_fast_dcov(x, x))
    return math.sqrt(min(band / v0, 1.0)) if v0 > 0.0 else 0.0


def default_block_candidates(n: int, count: int = 8) -> np.ndarray:
    """Roughly geometric block lengths between ``n**0.3`` and ``n**0.6``."""
    lo = max(2.0, n**0.3)
    hi = max(lo + 2.0, n**0.6)
    cands = np.unique(np.round(np.geomspace(lo, hi, count)).astype(int))
    cands = cands[(cands >= 2) & (cands <= n - 2)]
    return cands


def _moving(values: np.ndarray, window: int, fn) -> np.ndarray:
    half = window // 2
    m = values.size
    return np.array([fn(values[max(0, i - half) : min(m, i + half + 1)]) for i in range(m)])


def select_min_volatility(bands, window: int = 3) -> int:
    """Index of the candidate with the smallest local volatility.

    Bands are smoothed by a centred moving average of width ``window``
    (truncated at the ends); the local standard deviation of the smoothed
    values over the same window is minimized, first index winning ties.
    """
    bands = np.asarray(bands, dtype=float)
    if bands.ndim != 1 or bands.size < 3:
        raise ValueError("need at least 3 candidate bands")
    if window < 2:
        raise ValueError("window must be at least 2")
    smooth = _moving(bands, window, np.mean)
    vol = _moving(smooth, window, np.std)
    return int(np.argmin(vol))


def min_volatility_block(x, lag: int, candidates=None, window: int = 3, level: float = 0.95) -> int:
    """Block length chosen by the minimum-volatility rule."""
    x = as_series(x)
    cands = default_block_candidates(x.size) if candidates is None else np.asarray(candidates, dtype=int)
    cands = np.sort(cands)
    if cands.size < 3:
        raise ValueError("need at least 3 candidate block lengths")
    bands = [subsample_band(x, lag, int(b), level) for b in cands]
    return int(cands[select_min_volatility(bands, window)])
