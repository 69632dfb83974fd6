"""Lag-window kernels and the bandwidth rule ``p = ceil(c * n**lam)``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KERNELS = ("bartlett", "parzen", "daniell")


def _bartlett(z):
    return np.maximum(0.0, 1.0 - np.abs(z))


def _parzen(z):
    az = np.abs(z)
    return np.where(
        az <= 0.5,
        1.0 - 6.0 * az**2 + 6.0 * az**3,
        np.where(az <= 1.0, 2.0 * (1.0 - az) ** 3, 0.0),
    )


def _daniell(z):
    # np.sinc(z) = sin(pi z) / (pi z) with sinc(0) = 1
    return np.sinc(z)


_FUNCS = {"bartlett": _bartlett, "parzen": _parzen, "daniell": _daniell}


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "bartlett"

    def __post_init__(self):
        if self.kind not in _FUNCS:
            raise ValueError(f"unknown kernel {self.kind!r}; choose from {KERNELS}")

    @property
    def compact(self) -> bool:
        """True when k(z) = 0 for |z| >= 1."""
        return self.kind != "daniell"

    def __call__(self, z):
        return _FUNCS[self.kind](np.asarray(z, dtype=float))


def as_kernel(kernel: KernelSpec | str | None) -> KernelSpec:
    if kernel is None:
        return KernelSpec()
    if isinstance(kernel, KernelSpec):
        return kernel
    return KernelSpec(str(kernel).lower())


def kernel_weight(kernel: KernelSpec | str, z):
    """Evaluate the kernel at ``z`` (scalar in, float out)."""
    out = as_kernel(kernel)(z)
    return float(out) if np.ndim(out) == 0 else out


def squared_lag_weights(kernel: KernelSpec | str | None, p: float, n: int) -> np.ndarray:
    """``k(j/p)**2`` for j = 0..n-1, trimmed after the last nonzero lag.

    Index 0 is included so that ``w[j]`` lines up with lag ``j``.
    """
    if p <= 0:
        raise ValueError("bandwidth must be positive")
    k = as_kernel(kernel)
    w = k(np.arange(n) / p) ** 2
    nz = np.flatnonzero(w[1:])
    last = int(nz[-1]) + 1 if nz.size else 0
    return w[: last + 1]


def resolve_bandwidth(c: float, lam: float, n: int) -> int:
    """Bandwidth ``ceil(c * n**lam)``.

    The ceiling reproduces the published lag orders (e.g. 11 for n=500,
    lam=0.2, where rounding would give 10).
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    if not c > 0.0:
        raise ValueError("c must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")
    # guard against c * n**lam landing a hair above an integer
    p = math.ceil(c * n**lam - 1e-9)
    p = max(p, 1)
    if p >= n:
        raise ValueError(f"bandwidth {p} is not smaller than n={n}")
    return p
