"""Parametric laws for xi_1 used by the simulations and the moment provider.

Each family knows three things: how to draw from itself with strict support
(boundary and overflow hits are redrawn from the same stream), how to
integrate a function of ``ln xi`` against its law, and its support tag.
Closed-form log-moments live in :mod:`genmeans.asymptotics`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericalError, SpecError

QUAD_EPSABS = 1e-9
_MAX_REDRAWS = 64
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def quad(fn: Callable[[float], float], a: float, b: float) -> float:
    """Adaptive Gauss-Kronrod integral of `fn` over [a, b] (infinite ends allowed).

    Raises NumericalError when QUADPACK flags the integral (typically a
    divergent moment) or the error estimate misses the absolute tolerance.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                value, abserr = integrate.quad(
                    fn, a, b, epsabs=QUAD_EPSABS / 10, epsrel=1e-11, limit=400
                )
            except (integrate.IntegrationWarning, OverflowError, ZeroDivisionError) as exc:
                raise NumericalError(f"quadrature failed: {exc}") from None
    if not math.isfinite(value) or abserr > QUAD_EPSABS * max(1.0, abs(value)):
        raise NumericalError(f"quadrature did not converge (value={value}, err={abserr})")
    return value


def _times(h, x, density: float) -> float:
    # a density that underflowed contributes nothing, even where h overflowed
    return 0.0 if density == 0.0 else h(x) * density


def _normal_density(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def _redraw(draw: Callable[[int], np.ndarray], valid: Callable[[np.ndarray], np.ndarray], n: int) -> np.ndarray:
    x = draw(n)
    for _ in range(_MAX_REDRAWS):
        bad = ~valid(x)
        k = int(bad.sum())
        if k == 0:
            return x
        x[bad] = draw(k)
    raise NumericalError("sampler kept hitting the support boundary")


@dataclass(frozen=True)
class ExpLog:
    """xi = exp(eta) with eta exponential of rate `lam`."""

    lam: float
    family = "ExpLog"

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("ExpLog needs lam > 0")

    @property
    def support_tag(self) -> str:
        return "greater_than_one"

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        def draw(k):
            with np.errstate(over="ignore"):
                return np.exp(rng.standard_exponential(k) / self.lam)

        return _redraw(draw, lambda x: (x > 1.0) & np.isfinite(x), n)

    def expect_log(self, h: Callable[[float], float]) -> float:
        lam = self.lam
        return quad(lambda t: _times(h, t, lam * math.exp(-lam * t)), 0.0, math.inf)

    def to_dict(self) -> dict:
        return {"family": self.family, "lam": self.lam}


@dataclass(frozen=True)
class LogNormalBase:
    """xi lognormal: ln xi ~ N(mu, sigma**2)."""

    mu: float
    sigma: float
    family = "LogNormalBase"

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("LogNormalBase needs sigma > 0")

    @property
    def support_tag(self) -> str:
        return "positive"

    def sample(self, rng, n):
        def draw(k):
            with np.errstate(over="ignore"):
                return np.exp(self.mu + self.sigma * rng.standard_normal(k))

        return _redraw(draw, lambda x: (x > 0.0) & np.isfinite(x), n)

    def expect_log(self, h):
        mu, sigma = self.mu, self.sigma
        return quad(lambda z: _times(h, mu + sigma * z, _normal_density(z)), -math.inf, math.inf)

    def to_dict(self):
        return {"family": self.family, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class ShiftedLogNormal:
    """xi = 1 + lognormal(mu, sigma); support (1, inf) without closed log-moments."""

    mu: float
    sigma: float
    family = "ShiftedLogNormal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("ShiftedLogNormal needs sigma > 0")

    @property
    def support_tag(self) -> str:
        return "greater_than_one"

    def sample(self, rng, n):
        def draw(k):
            with np.errstate(over="ignore"):
                return 1.0 + np.exp(self.mu + self.sigma * rng.standard_normal(k))

        return _redraw(draw, lambda x: (x > 1.0) & np.isfinite(x), n)

    def expect_log(self, h):
        mu, sigma = self.mu, self.sigma
        return quad(
            lambda z: _times(h, float(np.logaddexp(0.0, mu + sigma * z)), _normal_density(z)),
            -math.inf,
            math.inf,
        )

    def to_dict(self):
        return {"family": self.family, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class UniformInterval:
    a: float
    b: float
    family = "UniformInterval"

    def __post_init__(self):
        if not (0.0 < self.a < self.b and math.isfinite(self.b)):
            raise DomainError("UniformInterval needs 0 < a < b < inf")

    @property
    def support_tag(self) -> str:
        return "greater_than_one" if self.a >= 1.0 else "positive"

    def sample(self, rng, n):
        a, b = self.a, self.b
        return _redraw(lambda k: a + (b - a) * rng.random(k), lambda x: (x > a) & (x < b), n)

    def expect_log(self, h):
        a, b = self.a, self.b
        # integrate over ln x so the integrand stays smooth near a
        return quad(lambda l: h(l) * math.exp(l) / (b - a), math.log(a), math.log(b))

    def to_dict(self):
        return {"family": self.family, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class PointMass:
    c: float
    family = "PointMass"

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError("PointMass needs a finite c > 0")

    @property
    def support_tag(self) -> str:
        return "greater_than_one" if self.c > 1.0 else "positive"

    def sample(self, rng, n):
        return np.full(n, float(self.c))

    def expect_log(self, h):
        return float(h(math.log(self.c)))

    def to_dict(self):
        return {"family": self.family, "c": self.c}


@dataclass(frozen=True)
class LogPareto:
    """xi = exp(sign * eta), eta Pareto with scale 1 and tail index `alpha`.

    E(eta**k) is finite iff k < alpha, so small alpha produces the
    divergent-moment laws used to show that moment conditions matter:
    sign=-1 with 1 < alpha <= 2 has E(xi) <= 1 but infinite D^2(ln xi);
    sign=+1 always has E(xi) = inf.
    """

    alpha: float
    sign: int = 1
    family = "LogPareto"

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("LogPareto needs alpha > 0")
        if self.sign not in (1, -1):
            raise DomainError("LogPareto sign must be +1 or -1")

    @property
    def support_tag(self) -> str:
        return "greater_than_one" if self.sign > 0 else "positive"

    def sample(self, rng, n):
        def draw(k):
            eta = np.power(1.0 - rng.random(k), -1.0 / self.alpha)
            with np.errstate(over="ignore"):
                return np.exp(self.sign * eta)

        lo = 1.0 if self.sign > 0 else 0.0
        return _redraw(draw, lambda x: (x > lo) & np.isfinite(x), n)

    def expect_log(self, h):
        alpha, sign = self.alpha, self.sign
        return quad(lambda t: _times(h, sign * t, alpha * t ** (-alpha - 1.0)), 1.0, math.inf)

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "sign": self.sign}


@dataclass(frozen=True)
class HeavyLogLog:
    """Law with finite D^2(ln xi) but infinite D^2(ln xi * ln ln xi).

    (ln xi)**2 has density C / (x**2 ln(x)**2) on [e, inf).  Writing
    Y = ln((ln xi)**2), Y has density C exp(-y) / y**2 on [1, inf), which is
    what both the sampler and the integrator use.
    """

    family = "HeavyLogLog"

    @property
    def norm(self) -> float:
        return 1.0 / float(special.expn(2, 1.0))

    @property
    def support_tag(self) -> str:
        return "greater_than_one"

    def _sample_y(self, rng, n):
        out = np.empty(n)
        filled = 0
        while filled < n:
            k = n - filled
            y = 1.0 + rng.standard_exponential(k)
            keep = y[rng.random(k) * y * y < 1.0]
            take = min(keep.size, k)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out

    def sample(self, rng, n):
        def draw(k):
            with np.errstate(over="ignore"):
                return np.exp(np.exp(self._sample_y(rng, k) / 2.0))

        return _redraw(draw, lambda x: (x > 1.0) & np.isfinite(x), n)

    def expect_log(self, h):
        c = self.norm

        def integrand(y):
            density = c * math.exp(-y) / (y * y)
            return 0.0 if density == 0.0 else h(math.exp(y / 2.0)) * density

        return quad(integrand, 1.0, math.inf)

    def to_dict(self):
        return {"family": self.family}


DistributionSpec = (
    ExpLog | LogNormalBase | ShiftedLogNormal | UniformInterval | PointMass | LogPareto | HeavyLogLog
)

_FAMILIES = {
    cls.family.lower(): cls
    for cls in (ExpLog, LogNormalBase, ShiftedLogNormal, UniformInterval, PointMass, LogPareto, HeavyLogLog)
}


def expect(dist: DistributionSpec, h: Callable[[float], float]) -> float:
    """E(h(xi)) under `dist`."""

    def on_log(l):
        with np.errstate(over="ignore", invalid="ignore"):
            return h(math.exp(l)) if l < 709.0 else h(math.inf)

    return dist.expect_log(on_log)


def distribution_from_dict(d: dict) -> DistributionSpec:
    if not isinstance(d, dict) or "family" not in d:
        raise SpecError(f"distribution must be an object with a 'family': {d!r}")
    cls = _FAMILIES.get(str(d["family"]).lower())
    if cls is None:
        raise SpecError(f"unknown distribution family {d['family']!r}")
    params = {k: v for k, v in d.items() if k != "family"}
    try:
        if "sign" in params:
            params["sign"] = int(params["sign"])
        return cls(**{k: (v if k == "sign" else float(v)) for k, v in params.items()})
    except TypeError as exc:
        raise SpecError(f"bad parameters for {d['family']}: {exc}") from None


def distribution_from_string(text: str) -> DistributionSpec:
    """Parse 'explog:lam=2' or 'lognormalbase:mu=0,sigma=0.5'."""
    head, _, rest = text.partition(":")
    d: dict = {"family": head}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise SpecError(f"expected key=value in distribution {text!r}")
        d[key.strip()] = value.strip()
    return distribution_from_dict(d)
