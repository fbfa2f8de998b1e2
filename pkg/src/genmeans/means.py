"""Evaluation of the mean functionals.

Every mean here is computed with products and roots moved to the log domain
and with sums left to numpy's pairwise reduction, so inputs of size 10**6 and
magnitudes near the float limits neither overflow nor drift.  Results are
clamped into [min(xs), max(xs)]; the clamp only ever removes rounding noise,
since every mean in this module is a mean in the strict sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import generators as gen
from .errors import DomainError, NumericalError, SpecError
from .generators import GREATER_THAN_ONE, POSITIVE, Generator, Interval, WeightFunction

_TAGS = {"positive": POSITIVE, "greater_than_one": GREATER_THAN_ONE}
# below this |exponent * ln x| the second-order expansion in the exponent is
# exact to double precision, and expm1/log1p division by the exponent is not
_SECOND_ORDER = 1e-8


def _subset(inner: Interval, outer: Interval) -> bool:
    if inner.lo < outer.lo or (
        inner.lo == outer.lo and inner.lo_closed and not outer.lo_closed
    ):
        return False
    if inner.hi > outer.hi or (
        inner.hi == outer.hi and inner.hi_closed and not outer.hi_closed
    ):
        return False
    return True


@dataclass(frozen=True)
class Sample:
    """Non-empty tuple of reals together with the support it was drawn from.

    Construction validates every value against the tag with strict
    inequalities, so a value of exactly 1.0 is rejected for
    ``greater_than_one``.
    """

    values: np.ndarray
    domain_tag: str | Interval = "positive"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)
        if values.size == 0:
            raise DomainError("a sample needs at least one value")
        support = self.support
        bad = ~support.contains(values)
        if bad.any():
            raise DomainError(
                f"value {float(values[bad][0])!r} is outside the sample domain {support}"
            )

    @property
    def support(self) -> Interval:
        if isinstance(self.domain_tag, Interval):
            return self.domain_tag
        try:
            return _TAGS[self.domain_tag]
        except KeyError:
            raise DomainError(f"unknown domain tag {self.domain_tag!r}") from None

    def __len__(self) -> int:
        return self.values.size


# -- mean kinds ---------------------------------------------------------------


@dataclass(frozen=True)
class QuasiArithmetic:
    generator: Generator
    tag = "quasi-arithmetic"

    @property
    def domain(self) -> Interval:
        return self.generator.domain

    def to_dict(self) -> dict:
        return {"tag": self.tag, "generator": self.generator.name}


@dataclass(frozen=True)
class Bajraktarevic:
    generator: Generator
    weight: WeightFunction
    tag = "bajraktarevic"

    @property
    def domain(self) -> Interval:
        return self.generator.domain

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "generator": self.generator.name,
            "weight": self.weight.name,
        }


@dataclass(frozen=True)
class Gini:
    r: float
    s: float
    tag = "gini"
    domain = POSITIVE

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.s)):
            raise DomainError("Gini parameters must be finite")

    def to_dict(self) -> dict:
        return {"tag": self.tag, "r": self.r, "s": self.s}


@dataclass(frozen=True)
class Holder:
    p: float
    tag = "holder"
    domain = POSITIVE

    def __post_init__(self):
        if not math.isfinite(self.p):
            raise DomainError("Holder exponent must be finite")

    def to_dict(self) -> dict:
        return {"tag": self.tag, "p": self.p}


@dataclass(frozen=True)
class ExpCauchy:
    tag = "exp-cauchy"
    domain = POSITIVE

    def to_dict(self) -> dict:
        return {"tag": self.tag}


@dataclass(frozen=True)
class LogCauchy:
    tag = "log-cauchy"
    domain = GREATER_THAN_ONE

    def to_dict(self) -> dict:
        return {"tag": self.tag}


@dataclass(frozen=True)
class MultCauchy:
    tag = "mult-cauchy"
    domain = GREATER_THAN_ONE

    def to_dict(self) -> dict:
        return {"tag": self.tag}


MeanKind = (
    QuasiArithmetic | Bajraktarevic | Gini | Holder | ExpCauchy | LogCauchy | MultCauchy
)


def mean_kind_from_dict(d: dict) -> MeanKind:
    """Inverse of ``kind.to_dict()``; also accepts arithmetic/geometric/harmonic."""
    if not isinstance(d, dict) or "tag" not in d:
        raise SpecError(f"mean kind must be an object with a 'tag': {d!r}")
    tag = str(d["tag"]).lower()
    try:
        if tag == "arithmetic":
            return QuasiArithmetic(gen.identity())
        if tag == "geometric":
            return QuasiArithmetic(gen.log())
        if tag == "harmonic":
            return QuasiArithmetic(gen.reciprocal())
        if tag == "quasi-arithmetic":
            return QuasiArithmetic(gen.generator_from_name(d["generator"]))
        if tag == "bajraktarevic":
            return Bajraktarevic(
                gen.generator_from_name(d["generator"]),
                gen.weight_from_name(d.get("weight", "one")),
            )
        if tag == "gini":
            return Gini(float(d["r"]), float(d["s"]))
        if tag == "holder":
            return Holder(float(d["p"]))
    except KeyError as exc:
        raise SpecError(f"mean kind {tag!r} is missing field {exc}") from None
    simple = {"exp-cauchy": ExpCauchy, "log-cauchy": LogCauchy, "mult-cauchy": MultCauchy}
    if tag in simple:
        return simple[tag]()
    raise SpecError(f"unknown mean kind {tag!r}")


# -- helpers ------------------------------------------------------------------


def _values(xs, min_n: int = 1) -> np.ndarray:
    x = xs.values if isinstance(xs, Sample) else np.asarray(xs, dtype=float).ravel()
    if x.size < min_n:
        raise DomainError(f"need at least {min_n} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("values must be finite")
    return x


def _require(x: np.ndarray, domain: Interval) -> None:
    bad = ~domain.contains(x)
    if bad.any():
        raise DomainError(f"value {float(x[bad][0])!r} is outside the required domain {domain}")


def _finish(value: float, lo: float, hi: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NumericalError("mean evaluation produced a non-finite value")
    return min(max(value, lo), hi)


def _power_ratio(x: np.ndarray, r: float, s: float) -> float | None:
    """(sum x^r / sum x^s)^(1/(r-s)) when no power leaves the normal float range."""
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        a = float(np.sum(np.power(x, r)))
        b = float(np.sum(np.power(x, s)))
        if not (1e-290 < a < 1e290 and 1e-290 < b < 1e290):
            return None
        value = (a / b) ** (1.0 / (r - s))
    return value if math.isfinite(value) and value > 0 else None


def _constant(x: np.ndarray) -> float | None:
    lo, hi = x.min(), x.max()
    return float(lo) if lo == hi else None


# -- the means ----------------------------------------------------------------


def quasi_arithmetic_mean(g: Generator, xs) -> float:
    x = _values(xs)
    _require(x, g.domain)
    if (c := _constant(x)) is not None:
        return c
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        fx = g.eval(x)
        if not np.all(np.isfinite(fx)):
            raise NumericalError(f"generator {g.name} overflowed on the input")
        m = np.mean(fx)
        if not math.isfinite(m):
            raise NumericalError(f"average of {g.name}-values is not finite")
        result = g.inverse(m)
    return _finish(result, x.min(), x.max())


def bajraktarevic_mean(g: Generator, p: WeightFunction, xs) -> float:
    x = _values(xs)
    _require(x, g.domain)
    if (c := _constant(x)) is not None:
        return c
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        w = p.eval(x)
        if not np.all(np.isfinite(w)) or not np.all(w > 0):
            raise DomainError(f"weight {p.name} is not positive and finite on the input")
        # scale-free in w; normalising by the max keeps the weight sum >= 1
        w = w / w.max()
        fx = g.eval(x)
        if not np.all(np.isfinite(fx)):
            raise NumericalError(f"generator {g.name} overflowed on the input")
        total = np.sum(w)
        if total == 0.0:
            raise NumericalError("weight sum underflowed to zero")
        ratio = np.sum(w * fx) / total
        if not math.isfinite(ratio):
            raise NumericalError("weighted average of generator values is not finite")
        result = g.inverse(ratio)
    return _finish(result, x.min(), x.max())


def gini_mean(r: float, s: float, xs) -> float:
    x = _values(xs)
    _require(x, POSITIVE)
    if (c := _constant(x)) is not None:
        return c
    y = np.log(x)
    sy = s * y
    w = np.exp(sy - sy.max())
    d = r - s
    spread = abs(d) * np.max(np.abs(y))
    if spread < _SECOND_ORDER:
        # ln M = E_w(y) + d Var_w(y) / 2 + O(d^2); exact to rounding here
        w = w / np.sum(w)
        m = np.sum(w * y)
        log_result = m + d * np.sum(w * (y - m) ** 2) / 2.0
    elif spread <= 1.0:
        # ln(sum w e^{dy} / sum w) via log1p keeps r -> s continuous
        log_result = math.log1p(np.sum(w * np.expm1(d * y)) / np.sum(w)) / d
    elif (direct := _power_ratio(x, r, s)) is not None:
        return _finish(direct, x.min(), x.max())
    else:
        log_result = (logsumexp(r * y) - logsumexp(sy)) / d
    return _finish(math.exp(log_result), x.min(), x.max())


def holder_mean(p: float, xs) -> float:
    x = _values(xs)
    _require(x, POSITIVE)
    if (c := _constant(x)) is not None:
        return c
    y = np.log(x)
    spread = abs(p) * np.max(np.abs(y))
    if spread < _SECOND_ORDER:
        m = np.mean(y)
        log_result = m + p * np.mean((y - m) ** 2) / 2.0
    else:
        py = p * y
        if spread <= 1.0:
            # expm1/log1p keep the p -> 0 limit accurate
            log_result = math.log1p(np.mean(np.expm1(py))) / p
        elif (direct := _power_ratio(x, p, 0.0)) is not None:
            return _finish(direct, x.min(), x.max())
        else:
            log_result = (logsumexp(py) - math.log(x.size)) / p
    return _finish(math.exp(log_result), x.min(), x.max())


def exp_cauchy_mean(xs) -> float:
    """(n-1)-th root of n * prod(x) / sum(x), evaluated on x / max(x)."""
    x = _values(xs, min_n=2)
    _require(x, POSITIVE)
    if (c := _constant(x)) is not None:
        return c
    n = x.size
    if n == 2:
        # B_2 is the harmonic mean; the direct form is exact on small integers
        a, b = float(x[0]), float(x[1])
        value = 2.0 * a * b / (a + b)
        if math.isfinite(value) and value > 0:
            return _finish(value, x.min(), x.max())
    top = x.max()
    scaled = x / top
    if np.any(scaled == 0.0):
        y = np.log(x) - math.log(top)
    else:
        y = np.log(scaled)
    log_rel = (math.log(n) + np.sum(y) - logsumexp(y)) / (n - 1)
    return _finish(top * math.exp(log_rel), x.min(), x.max())


def log_cauchy_mean(xs) -> float:
    x = _values(xs, min_n=2)
    _require(x, GREATER_THAN_ONE)
    if (c := _constant(x)) is not None:
        return c
    n = x.size
    y = np.log(x)
    total = np.sum(y)
    log_result = total / (n - 1) + logsumexp(np.log(y) - y / (n - 1)) - math.log(total)
    return _finish(math.exp(log_result), x.min(), x.max())


def log_mult_cauchy_mean(ys) -> float:
    """ln P_n as a function of the log-scale values y_i = ln x_i > 0."""
    y = _values(ys, min_n=2)
    _require(y, POSITIVE)
    if (c := _constant(y)) is not None:
        return c
    n = y.size
    total = np.sum(y)
    # ln S - ln y stays finite for subnormal y, where S / y would overflow
    terms = y * (math.log(total) - np.log(y))
    return _finish(np.sum(terms) / (n * math.log(n)), y.min(), y.max())


def mult_cauchy_mean(xs) -> float:
    x = _values(xs, min_n=2)
    _require(x, GREATER_THAN_ONE)
    if (c := _constant(x)) is not None:
        return c
    return _finish(math.exp(log_mult_cauchy_mean(np.log(x))), x.min(), x.max())


def evaluate_mean(kind: MeanKind, xs) -> float:
    """Dispatch to the mean matching `kind`.

    A `Sample` whose declared support is not contained in the kind's domain
    is rejected before any value is looked at.
    """
    if isinstance(xs, Sample) and not _subset(xs.support, kind.domain):
        raise DomainError(
            f"{kind.tag} needs values in {kind.domain}, sample is tagged {xs.support}"
        )
    match kind:
        case QuasiArithmetic(generator=g):
            return quasi_arithmetic_mean(g, xs)
        case Bajraktarevic(generator=g, weight=p):
            return bajraktarevic_mean(g, p, xs)
        case Gini(r=r, s=s):
            return gini_mean(r, s, xs)
        case Holder(p=p):
            return holder_mean(p, xs)
        case ExpCauchy():
            return exp_cauchy_mean(xs)
        case LogCauchy():
            return log_cauchy_mean(xs)
        case MultCauchy():
            return mult_cauchy_mean(xs)
    raise SpecError(f"not a mean kind: {kind!r}")
