"""House apportionment with mean-based priority values.

Every state first receives max(1, floor(house * N_i / sum N)) seats.  The k
remaining seats go to the states with the smallest priority value
M_2(r/N, (r+1)/N), either from a single ranking ("one_shot", at most one
extra seat per state) or by re-ranking after each award ("iterative").
"""

from __future__ import annotations

import csv
import heapq
import io
import re
from dataclasses import dataclass, field

from . import generators as gen
from .errors import DomainError, OversubscriptionError, SpecError
from .means import Bajraktarevic, ExpCauchy, MeanKind, QuasiArithmetic, evaluate_mean
from .serialize import dumps

MODES = ("one_shot", "iterative")
_INTEGER = re.compile(r"^\s*\d+\s*$")


@dataclass(frozen=True)
class StateRecord:
    name: str
    population: int

    def __post_init__(self):
        if not isinstance(self.population, int) or isinstance(self.population, bool):
            raise DomainError(f"population of {self.name!r} must be an integer")
        if self.population < 1:
            raise DomainError(f"population of {self.name!r} must be at least 1")


@dataclass(frozen=True)
class ApportionmentConfig:
    house_size: int = 435
    method: MeanKind = field(default_factory=lambda: QuasiArithmetic(gen.log()))
    mode: str = "one_shot"

    def __post_init__(self):
        if self.house_size < 1:
            raise DomainError("house size must be positive")
        if self.mode not in MODES:
            raise SpecError(f"mode must be one of {MODES}")
        if not isinstance(self.method, (QuasiArithmetic, Bajraktarevic, ExpCauchy)):
            raise SpecError(
                "apportionment methods are quasi-arithmetic, Bajraktarevic or exp-cauchy means"
            )


@dataclass
class SeatAllocation:
    states: list
    seats: dict
    mode: str
    audit: list = field(default_factory=list)
    # "floors" (integer parts of the quotas) or "one_seat" (one seat per state)
    start: str = "floors"

    def __post_init__(self):
        if any(r < 1 for r in self.seats.values()):
            raise DomainError("every state must hold at least one seat")

    @property
    def total(self) -> int:
        return sum(self.seats.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "population", "seats"])
        for s in self.states:
            w.writerow([s.name, s.population, self.seats[s.name]])
        return buf.getvalue()

    def audit_json(self) -> str:
        return dumps(
            {"mode": self.mode, "start": self.start, "total_seats": self.total, "awards": self.audit}
        )


def _check_census(states) -> list:
    states = list(states)
    if not states:
        raise DomainError("census is empty")
    names = [s.name for s in states]
    if len(set(names)) != len(names):
        raise DomainError("state names must be unique")
    return states


def initial_allocation(states, house_size: int) -> tuple[dict, int]:
    """max(1, floor(house * N_i / sum N)) seats each, plus the seats left over.

    Integer arithmetic throughout, so the floors are exact.
    """
    states = _check_census(states)
    if house_size < len(states):
        raise OversubscriptionError(
            f"house size {house_size} is smaller than the number of states {len(states)}"
        )
    total = sum(s.population for s in states)
    seats = {s.name: max(1, house_size * s.population // total) for s in states}
    k = house_size - sum(seats.values())
    if k < 0:
        raise OversubscriptionError(
            f"the one-seat minimum oversubscribes the house by {-k} seat(s)"
        )
    return seats, k


def priority_value(method: MeanKind, r: int, N: int) -> float:
    """M_2(r/N, (r+1)/N); a lower value is a stronger claim to the next seat."""
    if r < 1 or N < 1:
        raise DomainError("priority needs r >= 1 and N >= 1")
    return evaluate_mean(method, [r / N, (r + 1) / N])


def _rank_key(value: float, state: StateRecord) -> tuple:
    # ties: larger population first, then name
    return (value, -state.population, state.name)


def assign_remaining(states, seats: dict, k: int, config: ApportionmentConfig) -> SeatAllocation:
    states = _check_census(states)
    if k < 0:
        raise DomainError("k must be non-negative")
    seats = dict(seats)
    audit = []
    method = config.method
    if config.mode == "one_shot":
        if k > len(states):
            raise OversubscriptionError(
                f"one_shot mode gives at most one extra seat per state; {k} seats for "
                f"{len(states)} states needs iterative mode"
            )
        ranked = sorted(
            ((priority_value(method, seats[s.name], s.population), s) for s in states),
            key=lambda item: _rank_key(*item),
        )
        for value, s in ranked[:k]:
            seats[s.name] += 1
            audit.append(_award(len(audit), s, seats[s.name], value, "one_shot"))
    else:
        heap = [
            (*_rank_key(priority_value(method, seats[s.name], s.population), s), i)
            for i, s in enumerate(states)
        ]
        heapq.heapify(heap)
        for _ in range(k):
            value, _, _, i = heapq.heappop(heap)
            s = states[i]
            seats[s.name] += 1
            audit.append(_award(len(audit), s, seats[s.name], value, "iterative"))
            nxt = priority_value(method, seats[s.name], s.population)
            heapq.heappush(heap, (*_rank_key(nxt, s), i))
    return SeatAllocation(states, seats, config.mode, audit)


def _award(order: int, s: StateRecord, seats_after: int, value: float, mode: str) -> dict:
    return {
        "order": order,
        "state": s.name,
        "population": s.population,
        "seats_after": seats_after,
        "priority": value,
        "mode": mode,
    }


def apportion(states, config: ApportionmentConfig = ApportionmentConfig()) -> SeatAllocation:
    """Allocate the whole house.

    one_shot starts from the floored quotas and hands out the k leftover
    seats from a single ranking.  iterative is the full divisor method: it
    starts from one seat per state and awards every other seat by repeated
    ranking, so with f = ln it is exactly Huntington-Hill.  Starting it from
    the floors instead would pin a state at its lower quota even where the
    divisor method gives it fewer seats.
    """
    if config.mode == "one_shot":
        seats, k = initial_allocation(states, config.house_size)
        return assign_remaining(states, seats, k, config)
    states = _check_census(states)
    if config.house_size < len(states):
        raise OversubscriptionError(
            f"house size {config.house_size} is smaller than the number of states {len(states)}"
        )
    seats = {s.name: 1 for s in states}
    allocation = assign_remaining(states, seats, config.house_size - len(states), config)
    allocation.start = "one_seat"
    return allocation


def fairness_check(A: tuple[int, int], B: tuple[int, int], method: MeanKind) -> bool:
    """True iff giving the next seat to A rather than B is fair under `method`.

    A and B are (seats, population).  Bajraktarevic methods are decided by
    the expanded four-term inequality, which needs no inverse of f.
    """
    (ra, na), (rb, nb) = A, B
    if isinstance(method, Bajraktarevic):
        return bajraktarevic_expanded(A, B, method.generator, method.weight) > 0
    return priority_value(method, ra, na) < priority_value(method, rb, nb)


def bajraktarevic_expanded(A, B, f: gen.Generator, p: gen.WeightFunction) -> float:
    """Four-term sum  sum_{a in A, b in B} p(a) p(b) (f(b) - f(a)), signed by f's direction.

    Positive exactly when the Bajraktarevic priority of A is below that of B.
    """
    (ra, na), (rb, nb) = A, B
    xa = (ra / na, (ra + 1) / na)
    xb = (rb / nb, (rb + 1) / nb)
    total = 0.0
    for a in xa:
        for b in xb:
            total += float(p.eval(a) * p.eval(b) * (f.eval(b) - f.eval(a)))
    return total if f.increasing else -total


def harmonic_fairness(A, B) -> bool:
    """N_A/(r_A+1) - N_B/r_B > N_B/(r_B+1) - N_A/r_A."""
    (ra, na), (rb, nb) = A, B
    return na / (ra + 1) - nb / rb > nb / (rb + 1) - na / ra


# -- census I/O ---------------------------------------------------------------


def read_census(text: str) -> list:
    """Parse CSV with header `name,population`; populations must be integers."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["name", "population"]:
        raise SpecError("census CSV must start with the header 'name,population'")
    states = []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise SpecError(f"line {line}: expected 2 columns, got {len(row)}")
        name, pop = row[0].strip(), row[1]
        if not _INTEGER.match(pop):
            raise DomainError(f"line {line}: population {pop!r} is not a positive integer")
        states.append(StateRecord(name, int(pop)))
    return _check_census(states)


def load_census(path) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        return read_census(fh.read())


def write_allocation(allocation: SeatAllocation, csv_path, audit_path) -> None:
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(allocation.to_csv())
    with open(audit_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(allocation.audit_json())
        fh.write("\n")

