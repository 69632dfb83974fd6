"""ADCF plot data with pairwise and simultaneous critical bands."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .resampling import (
    _check_B,
    _multipliers,
    block_statistics,
    default_block_candidates,
    select_min_volatility,
    wild_max_adcf,
)
from .timeseries import acf_values, adcf_profile, as_multiseries, default_max_lag

__all__ = ["PlotData", "adcf_plot_data", "PLOT_SCHEMA_VERSION"]

PLOT_SCHEMA_VERSION = 1
_UNI_FIELDS = ("lag", "adcf", "acf", "acf_band", "pairwise_band", "simultaneous_band", "block")
_MULTI_FIELDS = ("lag", "row", "col", "adcf", "pairwise_band", "simultaneous_band", "block")


def _json_value(v):
    return None if isinstance(v, float) and math.isnan(v) else v


@dataclass
class PlotData:
    """Per-lag records ready for external plotting.

    Univariate records carry ``lag, adcf, acf, acf_band, pairwise_band,
    simultaneous_band, block``; multivariate ones replace the ACF columns by
    the component pair ``row, col``.  All bands are on the ADCF scale except
    ``acf_band``, the usual ``z / sqrt(n)`` limit for the ACF.
    """

    records: list[dict]
    meta: dict = field(default_factory=dict)

    @property
    def fields(self) -> tuple[str, ...]:
        return _MULTI_FIELDS if self.records and "row" in self.records[0] else _UNI_FIELDS

    def to_json_string(self) -> str:
        records = [{k: _json_value(v) for k, v in r.items()} for r in self.records]
        payload = {"schema_version": PLOT_SCHEMA_VERSION, "meta": self.meta, "records": records}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json_string())

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_string())

    def to_csv_string(self) -> str:
        lines = [",".join(self.fields)]
        for r in self.records:
            lines.append(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k]) for k in self.fields))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json(cls, path) -> PlotData:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("schema_version") != PLOT_SCHEMA_VERSION:
            raise ValueError("unsupported plot data schema version")
        out = cls._from_records(payload["records"])
        out.meta = payload.get("meta", {})
        return out

    @classmethod
    def from_csv(cls, path) -> PlotData:
        ints = {"lag", "row", "col", "block"}
        with open(path, encoding="utf-8", newline="") as fh:
            records = [{k: int(v) if k in ints else float(v) for k, v in r.items()} for r in csv.DictReader(fh)]
        return cls(records)

    @classmethod
    def _from_records(cls, records) -> PlotData:
        nan = float("nan")
        return cls([{k: nan if v is None else v for k, v in r.items()} for r in records])


def _pair_block(u, v, j, block, candidates, level, window=3):
    """Pairwise band (V^2 scale) and the block length used."""
    if block is not None:
        return float(np.quantile(block_statistics(u, v, j, block), level)), int(block)
    cands = candidates[candidates <= u.size - j]
    if cands.size < 3:
        raise ValueError(f"fewer than 3 usable block lengths at lag {j}")
    bands = [float(np.quantile(block_statistics(u, v, j, int(b)), level)) for b in cands]
    k = select_min_volatility(bands, window)
    return bands[k], int(cands[k])


def _simultaneous(u, v, lags, w, level, enabled, workers) -> float:
    if not enabled:
        return math.nan
    return float(np.quantile(wild_max_adcf(u, v, lags, w, workers), level))


def _to_adcf(band: float, denom: float) -> float:
    return math.sqrt(min(max(band / denom, 0.0), 1.0)) if denom > 0.0 else 0.0


def adcf_plot_data(
    x,
    max_lag: int | None = None,
    B: int = 499,
    seed=0,
    level: float = 0.95,
    block: int | None = None,
    candidates=None,
    multiplier: str = "normal",
    labels=None,
    simultaneous: bool = True,
    workers=None,
) -> PlotData:
    """Sample ADCF at lags ``1..max_lag`` with critical bands.

    The pairwise band comes from block subsampling; with ``block=None`` the
    block length is picked per lag by the minimum-volatility rule over
    ``candidates`` (default: geometric grid from ``n**0.3`` to ``n**0.6``).
    The simultaneous band comes from the wild bootstrap with ``B``
    replicates, one band per component pair; ``simultaneous=False`` skips
    it and reports NaN.
    """
    arr = as_multiseries(x)
    n, d = arr.shape
    B = _check_B(B)
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if max_lag is None:
        max_lag = default_max_lag(n)
    if not 1 <= max_lag <= n - 2:
        raise ValueError(f"max_lag must lie in 1..{n - 2}")
    if block is not None and not 2 <= block <= n - max_lag:
        raise ValueError(f"block must lie in [2, {n - max_lag}]")
    cands = default_block_candidates(n) if candidates is None else np.sort(np.asarray(candidates, dtype=int))
    profile = adcf_profile(arr if d > 1 else arr[:, 0], max_lag)
    lags = np.arange(1, max_lag + 1)
    w = _multipliers(seed, B, n, multiplier) if simultaneous else None
    v0 = profile.adcv[0] if d > 1 else np.array([[profile.adcv[0]]])
    records = []
    if d == 1:
        u = arr[:, 0]
        rho = acf_values(u, max_lag) if np.ptp(u) > 0.0 else np.zeros(max_lag + 1)
        acf_band = float(stats.norm.ppf(0.5 + level / 2.0) / math.sqrt(n))
        simult = _simultaneous(u, u, lags, w, level, simultaneous, workers)
        for j in lags:
            band, used = _pair_block(u, u, int(j), block, cands, level)
            records.append(
                {
                    "lag": int(j),
                    "adcf": float(profile.adcf[j]),
                    "acf": float(rho[j]),
                    "acf_band": acf_band,
                    "pairwise_band": _to_adcf(band, float(v0[0, 0])),
                    "simultaneous_band": simult,
                    "block": used,
                }
            )
    else:
        for r in range(d):
            for m in range(d):
                u, v = arr[:, r], arr[:, m]
                denom = math.sqrt(max(v0[r, r], 0.0) * max(v0[m, m], 0.0))
                simult = _simultaneous(u, v, lags, w, level, simultaneous, workers)
                for j in lags:
                    band, used = _pair_block(u, v, int(j), block, cands, level)
                    records.append(
                        {
                            "lag": int(j),
                            "row": r,
                            "col": m,
                            "adcf": float(profile.adcf[j, r, m]),
                            "pairwise_band": _to_adcf(band, denom),
                            "simultaneous_band": simult,
                            "block": used,
                        }
                    )
        records.sort(key=lambda rec: (rec["lag"], rec["row"], rec["col"]))
    meta = {
        "n": int(n),
        "d": int(d),
        "max_lag": int(max_lag),
        "level": float(level),
        "B": int(B),
        "seed": seed if isinstance(seed, int) else list(seed),
        "multiplier": multiplier,
        "labels": list(labels) if labels is not None else [f"x{i + 1}" for i in range(d)],
    }
    return PlotData(records, meta)
