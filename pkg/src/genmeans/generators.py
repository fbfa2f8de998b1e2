"""Generators (f) and weight functions (p) used by the mean definitions.

A generator carries its own inverse and derivative; nothing here inverts a
function numerically.  The built-in catalogue covers the generators that
show up in practice (identity, log, reciprocal, powers) plus an affine
wrapper, which is enough to express every quasi-arithmetic, Holder and Gini
mean in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, SpecError

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above & below

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


REALS = Interval(-math.inf, math.inf)
POSITIVE = Interval(0.0, math.inf)
GREATER_THAN_ONE = Interval(1.0, math.inf)


@dataclass(frozen=True)
class Generator:
    """Strictly monotone continuous map with explicit inverse and derivative."""

    name: str
    eval: ArrayFn
    inverse: ArrayFn
    derivative: ArrayFn
    domain: Interval
    range: Interval
    increasing: bool = True

    @property
    def direction(self) -> str:
        return "increasing" if self.increasing else "decreasing"

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def check(self, grid, rtol: float = 1e-10) -> None:
        """Raise DomainError if the round-trip or monotonicity fails on `grid`."""
        grid = np.sort(np.asarray(grid, dtype=float))
        if not np.all(self.domain.contains(grid)):
            raise DomainError(f"grid leaves the domain {self.domain} of {self.name}")
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            # a broken inverse may produce nan; allclose reports it below
            values = self.eval(grid)
            back = self.inverse(values)
        if not np.allclose(back, grid, rtol=rtol, atol=0.0):
            raise DomainError(f"{self.name}: inverse(eval(x)) != x on grid")
        steps = np.diff(values)
        ok = np.all(steps > 0) if self.increasing else np.all(steps < 0)
        if not ok:
            raise DomainError(f"{self.name} is not strictly {self.direction} on grid")


@dataclass(frozen=True)
class WeightFunction:
    name: str
    eval: ArrayFn
    domain: Interval = field(default=POSITIVE)

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def check(self, grid) -> None:
        w = self.eval(np.asarray(grid, dtype=float))
        if not np.all(w > 0):
            raise DomainError(f"weight {self.name} is not positive on grid")


def identity() -> Generator:
    return Generator(
        "identity",
        eval=lambda x: np.asarray(x, dtype=float),
        inverse=lambda y: np.asarray(y, dtype=float),
        derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        domain=REALS,
        range=REALS,
    )


def log() -> Generator:
    return Generator(
        "ln",
        eval=np.log,
        inverse=np.exp,
        derivative=lambda x: 1.0 / np.asarray(x, dtype=float),
        domain=POSITIVE,
        range=REALS,
    )


def reciprocal() -> Generator:
    return Generator(
        "reciprocal",
        eval=lambda x: 1.0 / np.asarray(x, dtype=float),
        inverse=lambda y: 1.0 / np.asarray(y, dtype=float),
        derivative=lambda x: -1.0 / np.square(np.asarray(x, dtype=float)),
        domain=POSITIVE,
        range=POSITIVE,
        increasing=False,
    )


def power(p: float) -> Generator:
    """x -> x**p on (0, inf); p == 0 has no power generator (use `log`)."""
    p = float(p)
    if p == 0.0 or not math.isfinite(p):
        raise DomainError("power generator needs a finite non-zero exponent")
    if p == 1.0:
        g = identity()
        return Generator(
            "power:1", g.eval, g.inverse, g.derivative, POSITIVE, POSITIVE
        )
    if p == -1.0:
        g = reciprocal()
        return Generator(
            "power:-1", g.eval, g.inverse, g.derivative, POSITIVE, POSITIVE, False
        )
    inv = 1.0 / p
    return Generator(
        f"power:{p:g}",
        eval=lambda x: np.power(np.asarray(x, dtype=float), p),
        inverse=lambda y: np.power(np.asarray(y, dtype=float), inv),
        derivative=lambda x: p * np.power(np.asarray(x, dtype=float), p - 1.0),
        domain=POSITIVE,
        range=POSITIVE,
        increasing=p > 0,
    )


def affine(g: Generator, a: float, b: float) -> Generator:
    """a*g + b; generates the same quasi-arithmetic mean as g for a != 0."""
    a, b = float(a), float(b)
    if a == 0.0:
        raise DomainError("affine factor must be non-zero")
    ends = sorted((a * g.range.lo + b, a * g.range.hi + b))
    lo_closed, hi_closed = g.range.lo_closed, g.range.hi_closed
    if a < 0:
        lo_closed, hi_closed = hi_closed, lo_closed
    return Generator(
        f"{a:g}*{g.name}+{b:g}",
        eval=lambda x: a * g.eval(x) + b,
        inverse=lambda y: g.inverse((np.asarray(y, dtype=float) - b) / a),
        derivative=lambda x: a * g.derivative(x),
        domain=g.domain,
        range=Interval(ends[0], ends[1], lo_closed, hi_closed),
        increasing=g.increasing == (a > 0),
    )


def unit_weight() -> WeightFunction:
    return WeightFunction(
        "one", lambda x: np.ones_like(np.asarray(x, dtype=float)), REALS
    )


def power_weight(q: float) -> WeightFunction:
    q = float(q)
    if q == 0.0:
        return unit_weight()
    return WeightFunction(
        f"power:{q:g}", lambda x: np.power(np.asarray(x, dtype=float), q)
    )


def _split(name: str) -> tuple[str, float | None]:
    head, _, arg = name.strip().partition(":")
    if not arg:
        return head.lower(), None
    try:
        return head.lower(), float(arg)
    except ValueError:
        raise SpecError(f"bad numeric argument in {name!r}") from None


def generator_from_name(name: str) -> Generator:
    """Parse 'identity', 'ln', 'reciprocal' or 'power:<p>'."""
    head, arg = _split(name)
    if head in ("identity", "id", "x") and arg is None:
        return identity()
    if head in ("ln", "log") and arg is None:
        return log()
    if head in ("reciprocal", "inverse") and arg is None:
        return reciprocal()
    if head == "power" and arg is not None:
        return power(arg) if arg != 0 else log()
    raise SpecError(f"unknown generator {name!r}")


def weight_from_name(name: str) -> WeightFunction:
    """Parse 'one', 'identity' (p(x)=x) or 'power:<q>'."""
    head, arg = _split(name)
    if head in ("one", "unit", "1") and arg is None:
        return unit_weight()
    if head in ("identity", "id", "x") and arg is None:
        return power_weight(1.0)
    if head == "power" and arg is not None:
        return power_weight(arg)
    raise SpecError(f"unknown weight function {name!r}")
