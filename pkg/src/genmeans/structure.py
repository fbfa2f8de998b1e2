"""Structural checks: mean axioms, the P_n inequality chain, the entropy bound
and bisymmetry, including the non-bisymmetry witnesses for F and G.

Expressions whose natural inputs are as large as exp(2 (n-1)**2) are evaluated
in y = ln x coordinates, where they stay representable for every n we test.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp, xlogy

from . import generators as gen
from .errors import DomainError
from .generators import GREATER_THAN_ONE, POSITIVE, Interval
from .means import (
    Bajraktarevic,
    ExpCauchy,
    Gini,
    Holder,
    LogCauchy,
    MeanKind,
    MultCauchy,
    QuasiArithmetic,
    Sample,
    _subset,
    evaluate_mean,
    log_mult_cauchy_mean,
    quasi_arithmetic_mean,
)
from .montecarlo import stream

BISYM_TOL = 1e-10
SYMMETRY_RTOL = 1e-12
# non-strict inequalities are allowed this much relative rounding slack
SLACK = 1e-12

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# -- mean axioms --------------------------------------------------------------


@dataclass(frozen=True)
class AxiomVerdict:
    value: float
    bounds: bool
    strict: bool
    symmetric: bool

    @property
    def ok(self) -> bool:
        return self.bounds and self.strict and self.symmetric


def check_mean_axioms(kind: MeanKind, xs: Sample, rng: np.random.Generator | None = None) -> AxiomVerdict:
    """Bounds, strictness and symmetry of `kind` on `xs`.

    `strict` is vacuously true for constant samples.  Symmetry compares the
    value on a random permutation (from `rng`, seeded at 0 by default) to
    relative tolerance 1e-12.
    """
    if not isinstance(xs, Sample):
        xs = Sample(xs)
    if not _subset(xs.support, kind.domain):
        raise DomainError(f"{kind.tag} needs values in {kind.domain}, sample is tagged {xs.support}")
    x = xs.values
    lo, hi = float(x.min()), float(x.max())
    value = evaluate_mean(kind, xs)
    rng = rng if rng is not None else np.random.default_rng(0)
    permuted = evaluate_mean(kind, Sample(rng.permutation(x), xs.domain_tag))
    return AxiomVerdict(
        value=value,
        bounds=lo <= value <= hi,
        strict=lo == hi or lo < value < hi,
        symmetric=abs(permuted - value) <= SYMMETRY_RTOL * abs(value),
    )


# -- mean inequalities -------------------------------------------------------


@dataclass(frozen=True)
class ChainVerdict:
    lower: float
    middle: float
    upper: float
    holds: bool
    strict: bool


def strict_inequality_Pn(ys: Sequence[float]) -> ChainVerdict:
    """n ln(n) min(y) <= sum y_i ln(S / y_i) <= n ln(n) max(y) on log-scale values.

    Both inequalities must be strict unless all y_i are equal, in which case
    all three terms coincide.
    """
    y = np.asarray(ys, dtype=float).ravel()
    if y.size < 2:
        raise DomainError("the inequality chain needs at least two values")
    if not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise DomainError("log-scale values must be positive and finite")
    n = y.size
    nln = n * math.log(n)
    total = float(np.sum(y))
    middle = float(np.sum(y * np.log(total / y)))
    lower, upper = nln * float(y.min()), nln * float(y.max())
    slack = SLACK * max(abs(upper), 1.0)
    holds = lower <= middle + slack and middle <= upper + slack
    constant = y.min() == y.max()
    strict = constant or (lower < middle < upper)
    return ChainVerdict(lower, middle, upper, holds, bool(strict))


@dataclass(frozen=True)
class ProbVector:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).ravel()
        object.__setattr__(self, "p", p)
        if p.size == 0:
            raise DomainError("empty probability vector")
        if not np.all((p > 0) & (p < 1)) and not (p.size == 1 and p[0] == 1.0):
            raise DomainError("probabilities must lie in (0, 1)")
        if abs(float(np.sum(p)) - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {np.sum(p)!r}, not 1")

    @classmethod
    def from_positive(cls, y) -> "ProbVector":
        y = np.asarray(y, dtype=float)
        return cls(y / np.sum(y))


@dataclass(frozen=True)
class EntropyVerdict:
    entropy: float
    log_n: float
    upper: float
    holds: bool


def entropy_bound(p: ProbVector) -> EntropyVerdict:
    """-sum p ln p <= ln n <= n ln(n) max p."""
    n = p.p.size
    entropy = float(-np.sum(xlogy(p.p, p.p)))
    log_n = math.log(n)
    upper = n * log_n * float(p.p.max())
    slack = SLACK * max(log_n, 1.0)
    return EntropyVerdict(entropy, log_n, upper, entropy <= log_n + slack and log_n <= upper + slack)


# -- bisymmetry ---------------------------------------------------------------


@dataclass(frozen=True)
class BisymQuadruple:
    x: float
    y: float
    s: float
    t: float
    domain: Interval = POSITIVE

    def __post_init__(self):
        for name in ("x", "y", "s", "t"):
            v = getattr(self, name)
            if not (math.isfinite(v) and bool(self.domain.contains(v))):
                raise DomainError(f"{name}={v!r} is outside {self.domain}")

    def astuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.s, self.t)


def bisymmetry_gap(mean2: Callable[[float, float], float], q: BisymQuadruple) -> float:
    """M(M(x,y), M(s,t)) - M(M(x,s), M(y,t))."""
    inner = (mean2(q.x, q.y), mean2(q.s, q.t), mean2(q.x, q.s), mean2(q.y, q.t))
    for v in inner:
        if not (math.isfinite(v) and bool(q.domain.contains(v))):
            raise DomainError(f"inner value {v!r} left the domain {q.domain}")
    return mean2(inner[0], inner[1]) - mean2(inner[2], inner[3])


def log_F(u: float, v: float, n: int = 2) -> float:
    """ln F(e^u, e^v) for u, v > 0, never forming e^u itself."""
    if n < 2:
        raise DomainError("F needs n >= 2")
    if not (u > 0 and v > 0):
        raise DomainError("F needs x, y > 1")
    m = n - 1
    return float(logsumexp([u / m + math.log(v), v / m + math.log(u)]) - math.log(u + v))


def F_functional(x: float, y: float, n: int = 2) -> float:
    """(x^(1/(n-1)) ln y + y^(1/(n-1)) ln x) / ln(xy) on (1, inf)^2."""
    if not (x > 1 and y > 1):
        raise DomainError(f"F needs x, y > 1, got ({x!r}, {y!r})")
    if n < 2:
        raise DomainError("F needs n >= 2")
    if n == 2:
        lx, ly = math.log(x), math.log(y)
        return (x * ly + y * lx) / (lx + ly)
    return math.exp(log_F(math.log(x), math.log(y), n))


def G_functional(a: float, b: float) -> float:
    """ln((a+b)^(a+b) / (a^a b^b)) for a, b > 0."""
    if not (a > 0 and b > 0):
        raise DomainError(f"G needs a, b > 0, got ({a!r}, {b!r})")
    # a fixed argument order makes G(a, b) == G(b, a) bit for bit
    a, b = min(a, b), max(a, b)
    return float(xlogy(a + b, a + b) - xlogy(a, a) - xlogy(b, b))


@dataclass(frozen=True)
class CounterexampleReport:
    n: int
    lhs: float
    rhs: float
    scale: str
    convexity_lhs: float | None = None
    convexity_rhs: float | None = None

    @property
    def passed(self) -> bool:
        if self.n == 2:
            return self.lhs < 2800.0 < self.rhs
        return self.convexity_rhs - self.convexity_lhs > 0 and self.lhs != self.rhs

    def to_dict(self) -> dict:
        out = {"n": self.n, "lhs": self.lhs, "rhs": self.rhs, "scale": self.scale}
        if self.n > 2:
            out.update(
                convexity_lhs=self.convexity_lhs,
                convexity_rhs=self.convexity_rhs,
                convexity_margin=self.convexity_rhs - self.convexity_lhs,
            )
        out["verdict"] = "PASS" if self.passed else "FAIL"
        return out


def reproduce_counterexample_L(n: int) -> CounterexampleReport:
    """Both sides of the bisymmetry identity for F at the witness points.

    n = 2 uses x = y = e^10, s = e, t = e^2 on the direct scale.  For n > 2
    the witness is x = y = e^(2(n-1)^2), s = t = e^((n-1)^2); both sides are
    returned as logarithms, together with the logarithms of the two sides of
    ((e+2)/3)^(n-1) < (e^(n-1)+2)/3.
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    if n == 2:
        x = y = math.exp(10.0)
        s, t = math.e, math.e**2
        q = BisymQuadruple(x, y, s, t, GREATER_THAN_ONE)
        F = F_functional
        lhs = F(F(q.x, q.y), F(q.s, q.t))
        rhs = F(F(q.x, q.s), F(q.y, q.t))
        return CounterexampleReport(2, lhs, rhs, "direct")
    m = n - 1
    u = v = 2.0 * m * m
    a = b = float(m * m)
    lhs = log_F(log_F(u, v, n), log_F(a, b, n), n)
    rhs = log_F(log_F(u, a, n), log_F(v, b, n), n)
    conv_lhs = m * math.log((math.e + 2.0) / 3.0)
    conv_rhs = float(logsumexp([float(m), math.log(2.0)]) - math.log(3.0))
    return CounterexampleReport(n, lhs, rhs, "log", conv_lhs, conv_rhs)


@dataclass(frozen=True)
class Witness:
    quadruple: BisymQuadruple
    gap: float

    def to_dict(self) -> dict:
        return {
            "quadruple": list(self.quadruple.astuple()),
            "gap": self.gap,
            "verdict": "PASS" if abs(self.gap) > 1e-6 else "FAIL",
        }


def _g_gap(q: tuple) -> float:
    return bisymmetry_gap(G_functional, BisymQuadruple(*q))


def _golden_max(fn: Callable[[float], float], lo: float, hi: float, iters: int = 60) -> float:
    a, b = lo, hi
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return c if fc >= fd else d


def falsify_bisymmetry_G(search_grid: Sequence[float] = (0.5, 1.0, 2.0, 4.0), sweeps: int = 3) -> Witness:
    """Quadruple in (0, 10]^4 maximising |bisymmetry gap| of G.

    The coarse grid is scanned in lexicographic order keeping the first
    maximiser; each coordinate is then refined by golden-section search on
    the neighbouring grid cell.  The refinement is kept only if it improves.
    """
    grid = sorted(set(float(g) for g in search_grid))
    if not grid or grid[0] <= 0 or grid[-1] > 10:
        raise DomainError("search grid must lie in (0, 10]")
    best, best_gap = None, -1.0
    for q in itertools.product(grid, repeat=4):
        g = abs(_g_gap(q))
        if g > best_gap:
            best, best_gap = q, g
    if best_gap <= 1e-6:
        raise DomainError("no bisymmetry violation found on the grid")

    def cell(v):
        i = grid.index(v) if v in grid else None
        if i is None:
            return None
        lo = grid[i - 1] if i > 0 else grid[0] / 2.0
        hi = grid[i + 1] if i + 1 < len(grid) else min(10.0, grid[-1] * 2.0)
        return lo, hi

    bounds = [cell(v) for v in best]
    q = list(best)
    for _ in range(sweeps):
        for k in range(4):
            lo, hi = bounds[k]

            def along(v, k=k):
                trial = list(q)
                trial[k] = v
                return abs(_g_gap(tuple(trial)))

            v = _golden_max(along, lo, hi)
            if along(v) > abs(_g_gap(tuple(q))):
                q[k] = v
    quad = BisymQuadruple(*q)
    return Witness(quad, _g_gap(tuple(q)))


# -- property sweeps ----------------------------------------------------------


def _sweep_kinds() -> list:
    return [
        QuasiArithmetic(gen.identity()),
        QuasiArithmetic(gen.log()),
        QuasiArithmetic(gen.reciprocal()),
        QuasiArithmetic(gen.power(2.0)),
        Bajraktarevic(gen.log(), gen.power_weight(1.0)),
        Gini(2.0, 1.0),
        Gini(-1.0, 0.5),
        Holder(3.0),
        Holder(-2.0),
        Holder(0.0),
        ExpCauchy(),
        LogCauchy(),
        MultCauchy(),
    ]


def _label(kind) -> str:
    params = ",".join(f"{k}={v}" for k, v in kind.to_dict().items() if k != "tag")
    return f"{kind.tag}({params})"


def run_structure_suite(trials: int = 10_000, seed: int = 0) -> dict:
    """Randomised sweeps of every structural property, counting violations.

    Each sweep draws from its own Philox stream, so the result is a pure
    function of (trials, seed).
    """
    out = {}

    rng = stream(seed, 0)
    per_kind = {}
    for kind in _sweep_kinds():
        bad = 0
        for _ in range(trials):
            n = int(rng.integers(2, 11))
            if kind.domain == GREATER_THAN_ONE:
                xs = Sample(np.exp(np.exp(rng.uniform(-3.0, 2.0, n))), "greater_than_one")
            else:
                xs = Sample(np.exp(rng.uniform(-3.0, 3.0, n)))
            bad += not check_mean_axioms(kind, xs, rng).ok
        per_kind[_label(kind)] = bad
    out["mean_axioms"] = {"trials_per_kind": trials, "violations": per_kind}

    # the chain divided by n ln n is ln P_n, so it holds iff ln P_n lies in [min y, max y]
    rng = stream(seed, 1)
    bad = 0
    for _ in range(trials):
        y = np.sort(np.exp(rng.uniform(-3.0, 3.0, int(rng.integers(2, 11)))))
        v = strict_inequality_Pn(y)
        raw = v.middle / (y.size * math.log(y.size))
        agrees = abs(raw - log_mult_cauchy_mean(y)) <= 1e-12 * abs(raw)
        inside = y[0] < raw < y[-1]
        bad += not (v.holds and v.strict and agrees and inside)
    out["pn_chain"] = {"trials": trials, "violations": bad}

    rng = stream(seed, 2)
    bad = 0
    for _ in range(trials):
        w = rng.dirichlet(np.ones(int(rng.integers(2, 21))))
        bad += not entropy_bound(ProbVector(w / w.sum())).holds
    out["entropy_bound"] = {"trials": trials, "violations": bad}

    rng = stream(seed, 3)
    gens = [gen.identity(), gen.log(), gen.reciprocal(), gen.power(2.0), gen.power(0.5), gen.power(-1.5)]
    bad = 0
    worst = 0.0
    for i in range(trials):
        g = gens[i % len(gens)]
        q = BisymQuadruple(*rng.uniform(0.1, 10.0, 4))
        gap = abs(bisymmetry_gap(lambda a, b: quasi_arithmetic_mean(g, [a, b]), q))
        worst = max(worst, gap)
        bad += gap > BISYM_TOL
    out["quasi_arithmetic_bisymmetry"] = {"trials": trials, "violations": bad, "max_abs_gap": worst}

    out["G_witness"] = falsify_bisymmetry_G().to_dict()
    total = sum(per_kind.values()) + sum(
        out[k]["violations"] for k in ("pn_chain", "entropy_bound", "quasi_arithmetic_bisymmetry")
    )
    out["verdict"] = "PASS" if total == 0 and out["G_witness"]["verdict"] == "PASS" else "FAIL"
    return out
