"""Theoretical limits, centerings and asymptotic variances.

The moment inputs come in a `MomentSet`.  Fields may be filled from closed
forms, by quadrature, by the caller, or (in the simulation module) from data;
`MomentSet.provenance` records which, so a theory value used to check a
simulation is never silently estimated from that same simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from . import distributions as dists
from . import generators as gen
from .errors import DegenerateError, DomainError, NumericalError
from .generators import Generator, WeightFunction
from .means import (
    Bajraktarevic,
    ExpCauchy,
    Gini,
    Holder,
    LogCauchy,
    MeanKind,
    MultCauchy,
    QuasiArithmetic,
)

EULER_GAMMA = float(np.euler_gamma)

_MOMENT_FIELDS = (
    "mean_pf",
    "mean_p",
    "var_pf",
    "var_p",
    "cov_pf_p",
    "mean_logs",
    "var_logs",
    "mean_xi",
    "mean_loglog",
    "var_loglog",
)


@dataclass(frozen=True)
class MomentSet:
    """Moments of xi_1 consumed by the limit theorems.

    ``None`` marks a field as unavailable; `provenance` maps each field to
    "analytic", "quadrature", "user", "empirical" or "unavailable: <why>".
    """

    mean_pf: float | None = None
    mean_p: float | None = None
    var_pf: float | None = None
    var_p: float | None = None
    cov_pf_p: float | None = None
    mean_logs: float | None = None
    var_logs: float | None = None
    mean_xi: float | None = None
    mean_loglog: float | None = None
    var_loglog: float | None = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("var_pf", "var_p", "var_logs", "var_loglog"):
            v = getattr(self, name)
            if v is not None and not v >= 0:
                raise DomainError(f"{name} must be non-negative, got {v}")
        if None not in (self.cov_pf_p, self.var_pf, self.var_p):
            if abs(self.cov_pf_p) > math.sqrt(self.var_pf * self.var_p) + 1e-12:
                raise DomainError("covariance exceeds the Cauchy-Schwarz bound")
        prov = dict(self.provenance)
        for name in _MOMENT_FIELDS:
            if getattr(self, name) is None:
                prov.setdefault(name, "unavailable")
            else:
                prov.setdefault(name, "user")
        object.__setattr__(self, "provenance", prov)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            why = ", ".join(f"{n} ({self.provenance.get(n, 'unavailable')})" for n in missing)
            raise DegenerateError(f"missing moments: {why}")

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in _MOMENT_FIELDS}
        out["provenance"] = dict(self.provenance)
        return out


@dataclass(frozen=True)
class CltParams:
    """Limit law of a mean statistic.

    `statistic` is "mean" (the mean itself) or "log_mean" (its logarithm).
    For ``scaling == "sqrt_n"`` the standardized statistic is
    sqrt(n) * (statistic - center(n)) / sqrt(asym_variance); for
    ``scaling == "ln_n"`` ln(n) * (statistic - limit) tends to
    `limit_constant`.
    """

    limit: float
    scaling: str = "sqrt_n"
    centering: str = "constant"
    centering_c: float | None = None
    asym_variance: float | None = None
    limit_constant: float | None = None
    statistic: str = "mean"
    degenerate: bool = False
    source: str = ""

    def __post_init__(self):
        if self.scaling not in ("sqrt_n", "ln_n"):
            raise DomainError(f"unknown scaling {self.scaling!r}")
        if self.centering not in ("constant", "constant_plus_c_over_ln_n"):
            raise DomainError(f"unknown centering {self.centering!r}")
        if (self.asym_variance is None) == (self.limit_constant is None):
            raise DomainError("exactly one of asym_variance / limit_constant must be set")
        if self.asym_variance is not None and not (
            self.asym_variance > 0 or (self.degenerate and self.asym_variance == 0)
        ):
            raise DomainError("asym_variance must be positive unless flagged degenerate")
        if self.centering == "constant_plus_c_over_ln_n" and self.centering_c is None:
            raise DomainError("ln(n) centering needs centering_c")

    def center(self, n: int) -> float:
        if self.centering == "constant":
            return self.limit
        return self.limit + self.centering_c / math.log(n)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class DifferentiableMap(NamedTuple):
    eval: Callable
    derivative: Callable


EXP_MAP = DifferentiableMap(np.exp, np.exp)


# -- delta method -------------------------------------------------------------


def delta_method(limit_mu: float, variance: float, g) -> tuple[float, float]:
    """Push a CLT for X_n through g: returns (g(mu), g'(mu)**2 * variance)."""
    d = float(g.derivative(limit_mu))
    if not math.isfinite(d):
        raise NumericalError(f"derivative is not finite at {limit_mu}")
    return float(g.eval(limit_mu)), d * d * variance


def ratio_delta_variance(
    mean_x: float, mean_y: float, var_x: float, var_y: float, cov_xy: float
) -> float:
    """D Sigma D^T for (x, y) -> x / y, with D = (1/my, -mx/my**2)."""
    if mean_y == 0:
        raise NumericalError("ratio map is not differentiable at mean_y = 0")
    return (
        var_x / mean_y**2
        - 2.0 * cov_xy * mean_x / mean_y**3
        + var_y * mean_x**2 / mean_y**4
    )


# -- theorems -----------------------------------------------------------------


def _in_range(g: Generator, value: float) -> None:
    if not bool(g.range.contains(value)):
        raise DomainError(
            f"{value!r} lies outside the range {g.range} of generator {g.name}"
        )


def kolmogorov_expectation(g: Generator, m) -> float:
    """g^{-1}(E g(xi)); `m` is the value E g(xi) itself or a MomentSet."""
    if isinstance(m, MomentSet):
        m.require("mean_pf")
        value = m.mean_pf if m.mean_p is None else m.mean_pf / m.mean_p
    else:
        value = float(m)
    _in_range(g, value)
    return float(g.inverse(value))


def quasi_arithmetic_clt_params(g: Generator, m: MomentSet) -> CltParams:
    """CLT for quasi-arithmetic means: variance D^2(f(xi)) / f'(E_f xi)**2."""
    m.require("mean_pf", "var_pf")
    limit = kolmogorov_expectation(g, m.mean_pf)
    d = float(g.derivative(limit))
    if d == 0 or not math.isfinite(d):
        raise DegenerateError(f"generator derivative is {d} at the limit {limit}")
    if m.var_pf == 0:
        raise DegenerateError("D^2(f(xi)) must be positive")
    return CltParams(limit=limit, asym_variance=m.var_pf / d**2, source="quasi-arithmetic CLT")


def bajraktarevic_clt_params(g: Generator, m: MomentSet) -> CltParams:
    m.require("mean_pf", "mean_p", "var_pf", "var_p", "cov_pf_p")
    if not m.mean_p > 0:
        raise DomainError("E(p(xi)) must be positive")
    limit = kolmogorov_expectation(g, m.mean_pf / m.mean_p)
    d = float(g.derivative(limit))
    if d == 0 or not math.isfinite(d):
        raise DegenerateError(f"generator derivative is {d} at the limit {limit}")
    bracket = (
        m.mean_p**2 * m.var_pf
        - 2.0 * m.mean_p * m.mean_pf * m.cov_pf_p
        + m.mean_pf**2 * m.var_p
    )
    variance = m.mean_p ** (-4) / d**2 * bracket
    if not variance > 0:
        raise DegenerateError(f"asymptotic variance is {variance}, not positive")
    return CltParams(limit=limit, asym_variance=variance, source="Bajraktarevic CLT")


def geometric_clt_params(m: MomentSet) -> CltParams:
    m.require("mean_logs", "var_logs")
    if not (0 < m.var_logs < math.inf):
        raise DegenerateError("geometric-mean CLT needs 0 < D^2(ln xi) < inf")
    limit, variance = delta_method(m.mean_logs, m.var_logs, EXP_MAP)
    return CltParams(limit=limit, asym_variance=variance, source="geometric-mean CLT")


def exp_cauchy_clt_params(m: MomentSet) -> CltParams:
    m.require("mean_xi", "mean_logs", "var_logs")
    return replace(geometric_clt_params(m), source="exponential Cauchy quotient CLT")


def log_cauchy_clt_params(m: MomentSet) -> CltParams:
    """Same law as the geometric mean; a point mass gives a degenerate result."""
    m.require("mean_xi", "mean_logs", "var_logs")
    if m.var_logs == 0:
        return CltParams(
            limit=math.exp(m.mean_logs),
            asym_variance=0.0,
            degenerate=True,
            source="logarithmic Cauchy quotient (point mass)",
        )
    return replace(geometric_clt_params(m), source="logarithmic Cauchy quotient CLT")


def mult_cauchy_log_constant(m: MomentSet) -> float:
    """ln(E ln xi) * E(ln xi) - E(ln xi * ln ln xi)."""
    m.require("mean_logs", "mean_loglog")
    if not m.mean_logs > 0:
        raise DomainError("E(ln xi) must be positive (xi > 1 almost surely)")
    return math.log(m.mean_logs) * m.mean_logs - m.mean_loglog


def mult_cauchy_limit_constant(m: MomentSet) -> float:
    """Limit in probability of ln(n) * (P_n - exp(E ln xi))."""
    return math.exp(m.mean_logs) * mult_cauchy_log_constant(m)


def mult_cauchy_constant_params(m: MomentSet) -> CltParams:
    return CltParams(
        limit=math.exp(m.mean_logs) if m.mean_logs is not None else math.nan,
        scaling="ln_n",
        limit_constant=mult_cauchy_limit_constant(m),
        source="multiplicative Cauchy quotient, ln(n) regime",
    )


def mult_cauchy_clt_params(m: MomentSet) -> CltParams:
    """CLT for ln(P_n) with the n-dependent centering E ln xi + c / ln n."""
    m.require("mean_logs", "var_logs", "mean_loglog", "var_loglog")
    if not (0 < m.var_loglog < math.inf):
        raise DegenerateError("needs 0 < D^2(ln xi * ln ln xi) < inf")
    return CltParams(
        limit=m.mean_logs,
        centering="constant_plus_c_over_ln_n",
        centering_c=mult_cauchy_log_constant(m),
        asym_variance=m.var_logs,
        statistic="log_mean",
        source="multiplicative Cauchy quotient CLT",
    )


# -- moment provider ----------------------------------------------------------


def _xlogx_moments(lam: float) -> tuple[float, float]:
    """Mean and variance of eta*ln(eta) for eta ~ Exp(rate lam)."""
    psi2 = float(special.digamma(2.0))
    psi3 = float(special.digamma(3.0))
    trigamma3 = float(special.polygamma(1, 3.0))
    ln_lam = math.log(lam)
    mean = (psi2 - ln_lam) / lam
    second = 2.0 * ((psi3 - ln_lam) ** 2 + trigamma3) / lam**2
    return mean, second - mean * mean


def _by_quadrature(dist, fn) -> tuple[float | None, str]:
    try:
        return dist.expect_log(fn), "quadrature"
    except NumericalError as exc:
        return None, f"unavailable: {exc}"


def _centered_var(dist, fn, mean) -> tuple[float | None, str]:
    if mean is None:
        return None, "unavailable: mean unavailable"
    return _by_quadrature(dist, lambda l: (fn(l) - mean) ** 2)


def _loglog(l: float) -> float:
    return l * math.log(l) if l > 0 else 0.0


def analytic_moments(dist) -> MomentSet:
    """Log-moments, E(xi) and ln*lnln moments of `dist`.

    Closed forms are used where they exist; remaining fields come from
    adaptive quadrature (absolute tolerance 1e-9).  Divergent moments and
    moments undefined on the support are returned as unavailable.
    """
    v: dict = {}
    prov: dict = {}

    def put(name, value, how):
        v[name] = value
        prov[name] = how

    match dist:
        case dists.ExpLog(lam=lam):
            put("mean_logs", 1.0 / lam, "analytic")
            put("var_logs", 1.0 / lam**2, "analytic")
            if lam > 1:
                put("mean_xi", lam / (lam - 1.0), "analytic")
            else:
                put("mean_xi", None, "unavailable: E(exp(eta)) diverges for lam <= 1")
            mean_ll, var_ll = _xlogx_moments(lam)
            put("mean_loglog", mean_ll, "analytic")
            put("var_loglog", var_ll, "analytic")
        case dists.LogNormalBase(mu=mu, sigma=sigma):
            put("mean_logs", mu, "analytic")
            put("var_logs", sigma**2, "analytic")
            put("mean_xi", math.exp(mu + sigma**2 / 2), "analytic")
            why = "unavailable: ln ln xi undefined on support (0, inf)"
            put("mean_loglog", None, why)
            put("var_loglog", None, why)
        case dists.ShiftedLogNormal(mu=mu, sigma=sigma):
            put("mean_xi", 1.0 + math.exp(mu + sigma**2 / 2), "analytic")
            put(*_named("mean_logs", _by_quadrature(dist, lambda l: l)))
            put(*_named("var_logs", _centered_var(dist, lambda l: l, v["mean_logs"])))
            put(*_named("mean_loglog", _by_quadrature(dist, _loglog)))
            put(*_named("var_loglog", _centered_var(dist, _loglog, v["mean_loglog"])))
        case dists.UniformInterval(a=a, b=b):
            put("mean_logs", (b * math.log(b) - a * math.log(a)) / (b - a) - 1.0, "analytic")
            put(*_named("var_logs", _centered_var(dist, lambda l: l, v["mean_logs"])))
            put("mean_xi", (a + b) / 2.0, "analytic")
            if a >= 1.0:
                put(*_named("mean_loglog", _by_quadrature(dist, _loglog)))
                put(*_named("var_loglog", _centered_var(dist, _loglog, v["mean_loglog"])))
            else:
                why = "unavailable: ln ln xi undefined below 1"
                put("mean_loglog", None, why)
                put("var_loglog", None, why)
        case dists.PointMass(c=c):
            lc = math.log(c)
            put("mean_logs", lc, "analytic")
            put("var_logs", 0.0, "analytic")
            put("mean_xi", float(c), "analytic")
            if c > 1:
                put("mean_loglog", _loglog(lc), "analytic")
                put("var_loglog", 0.0, "analytic")
            else:
                why = "unavailable: ln ln xi undefined for c <= 1"
                put("mean_loglog", None, why)
                put("var_loglog", None, why)
        case dists.LogPareto(alpha=alpha, sign=sign):
            if alpha > 1:
                put("mean_logs", sign * alpha / (alpha - 1.0), "analytic")
            else:
                put("mean_logs", None, "unavailable: E(eta) diverges for alpha <= 1")
            if alpha > 2:
                put("var_logs", alpha / ((alpha - 1.0) ** 2 * (alpha - 2.0)), "analytic")
            else:
                put("var_logs", None, "unavailable: E(eta^2) diverges for alpha <= 2")
            if sign > 0:
                put("mean_xi", None, "unavailable: E(exp(eta)) diverges for Pareto eta")
                if alpha > 1:
                    put("mean_loglog", alpha / (alpha - 1.0) ** 2, "analytic")
                else:
                    put("mean_loglog", None, "unavailable: diverges for alpha <= 1")
                if alpha > 2:
                    second = 2.0 * alpha / (alpha - 2.0) ** 3
                    put("var_loglog", second - (alpha / (alpha - 1.0) ** 2) ** 2, "analytic")
                else:
                    put("var_loglog", None, "unavailable: diverges for alpha <= 2")
            else:
                put(*_named("mean_xi", _by_quadrature(dist, lambda l: math.exp(l))))
                why = "unavailable: ln ln xi undefined for xi < 1"
                put("mean_loglog", None, why)
                put("var_loglog", None, why)
        case dists.HeavyLogLog():
            e1 = float(special.expn(2, 1.0))
            mean_l = float(special.expn(2, 0.5)) / e1
            put("mean_logs", mean_l, "analytic")
            put("var_logs", 1.0 / e1 - mean_l**2, "analytic")
            put("mean_xi", None, "unavailable: E(xi) diverges")
            put("mean_loglog", float(special.exp1(0.5)) / (2.0 * e1), "analytic")
            put("var_loglog", None, "unavailable: E((ln xi ln ln xi)^2) diverges")
        case _:
            raise DomainError(f"unsupported distribution {dist!r}")
    for name in ("mean_pf", "mean_p", "var_pf", "var_p", "cov_pf_p"):
        prov.setdefault(name, "unavailable: no generator given")
    return MomentSet(**v, provenance=prov)


def _named(name, pair):
    return (name, *pair)


def generator_moments(dist, g: Generator, p: WeightFunction | None = None) -> MomentSet:
    """`analytic_moments(dist)` plus the p*f / p moments for a Bajraktarevic mean.

    With ``p is None`` the weight is 1 and mean_p, var_p, cov are exact.
    Each p*f field is integrated independently; a divergent one is marked
    unavailable without affecting the others.
    """
    base = analytic_moments(dist)
    values = {name: getattr(base, name) for name in _MOMENT_FIELDS}
    prov = dict(base.provenance)

    def on_xi(fn):
        def h(l):
            x = math.exp(l) if l < 709.0 else math.inf
            return float(fn(x))

        return h

    pf = on_xi(lambda x: p.eval(x) * g.eval(x)) if p is not None else on_xi(g.eval)
    mean_pf, prov["mean_pf"] = _by_quadrature(dist, pf)
    var_pf, prov["var_pf"] = _centered_var(dist, pf, mean_pf)
    values.update(mean_pf=mean_pf, var_pf=var_pf)
    if p is None:
        values.update(mean_p=1.0, var_p=0.0, cov_pf_p=0.0)
        prov.update(mean_p="analytic", var_p="analytic", cov_pf_p="analytic")
    else:
        pw = on_xi(p.eval)
        mean_p, prov["mean_p"] = _by_quadrature(dist, pw)
        var_p, prov["var_p"] = _centered_var(dist, pw, mean_p)
        if mean_pf is None or mean_p is None:
            cov, prov["cov_pf_p"] = None, "unavailable: mean unavailable"
        else:
            cov, prov["cov_pf_p"] = _by_quadrature(
                dist, lambda l: (pf(l) - mean_pf) * (pw(l) - mean_p)
            )
        values.update(mean_p=mean_p, var_p=var_p, cov_pf_p=cov)
    return MomentSet(**values, provenance=prov)


# -- kind dispatch ------------------------------------------------------------


def bajraktarevic_form(kind: MeanKind) -> tuple[Generator, WeightFunction | None] | None:
    """(f, p) expressing `kind` as a Bajraktarevic mean, or None for Cauchy means."""
    match kind:
        case QuasiArithmetic(generator=g):
            return g, None
        case Bajraktarevic(generator=g, weight=p):
            return g, p
        case Holder(p=p):
            return (gen.log() if p == 0 else gen.power(p)), None
        case Gini(r=r, s=s):
            f = gen.log() if r == s else gen.power(abs(r - s))
            return f, gen.power_weight(min(r, s))
    return None


def theoretical_limit(kind: MeanKind, dist) -> float:
    """Almost-sure limit of the mean of an i.i.d. sample from `dist`."""
    form = bajraktarevic_form(kind)
    if form is None:
        m = analytic_moments(dist)
        m.require("mean_logs")
        return math.exp(m.mean_logs)
    g, p = form
    m = generator_moments(dist, g, p)
    m.require("mean_pf", "mean_p")
    return kolmogorov_expectation(g, m.mean_pf / m.mean_p)


def theory_for(kind: MeanKind, dist, mode: str = "clt") -> tuple[CltParams, MomentSet]:
    """CltParams matching (`kind`, `dist`, `mode`) and the moments they came from.

    `mode` is one of "slln", "clt", "mult_constant", "mult_clt"; the two
    mult modes require ``MultCauchy``.
    """
    form = bajraktarevic_form(kind)
    if mode in ("mult_constant", "mult_clt"):
        if not isinstance(kind, MultCauchy):
            raise DomainError(f"mode {mode} applies to mult-cauchy only")
        m = analytic_moments(dist)
        if mode == "mult_constant":
            return mult_cauchy_constant_params(m), m
        return mult_cauchy_clt_params(m), m
    if form is not None:
        g, p = form
        m = generator_moments(dist, g, p)
        if mode == "slln" and m.var_pf == 0:
            return _point_params(kind, g, m), m
        return bajraktarevic_clt_params(g, m), m
    m = analytic_moments(dist)
    if mode == "slln" and m.var_logs == 0:
        return _point_params(kind, None, m), m
    match kind:
        case ExpCauchy():
            return exp_cauchy_clt_params(m), m
        case LogCauchy():
            return log_cauchy_clt_params(m), m
        case MultCauchy():
            return mult_cauchy_constant_params(m), m
    raise DomainError(f"no theory for {kind!r}")


def _point_params(kind, g, m: MomentSet) -> CltParams:
    if g is None:
        limit = math.exp(m.mean_logs)
    else:
        limit = kolmogorov_expectation(g, m.mean_pf / m.mean_p)
    return CltParams(limit=limit, asym_variance=0.0, degenerate=True, source="point mass")
