"""Normal CDF, its inverse, and the one-sample Kolmogorov-Smirnov distance."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.special import erfc

from .errors import DomainError

_SQRT1_2 = 1.0 / math.sqrt(2.0)


def normal_cdf(x):
    """Standard normal CDF via erfc, accurate in both tails.

    normal_cdf(0) is exactly 0.5 and normal_cdf(-x) == 1 - normal_cdf(x)
    up to one rounding of the subtraction.
    """
    out = 0.5 * erfc(-np.asarray(x, dtype=float) * _SQRT1_2)
    return float(out) if np.ndim(out) == 0 else out


def normal_ppf(p, tol: float = 1e-12):
    """Inverse of `normal_cdf` by bisection on [-40, 40] to width `tol`."""
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("normal_ppf needs probabilities in (0, 1)")
    lo = np.full(p.shape, -40.0)
    hi = np.full(p.shape, 40.0)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        below = normal_cdf(mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out) if out.ndim == 0 else out


def ks_statistic(values, cdf: Callable = normal_cdf) -> float:
    """sup |F_n - F| for the empirical CDF of `values` against `cdf`."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise DomainError("KS distance of an empty sample")
    if not np.all(np.isfinite(x)):
        raise DomainError("KS distance needs finite values")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(min(1.0, max(d_plus, d_minus, 0.0)))
