import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genmeans import apportionment as ap
from genmeans import generators as gen
from genmeans.errors import DomainError, OversubscriptionError, SpecError
from genmeans.means import Bajraktarevic, ExpCauchy, QuasiArithmetic

GEOMETRIC = QuasiArithmetic(gen.log())


def census(*pops):
    return [ap.StateRecord(f"S{i}", p) for i, p in enumerate(pops)]


def huntington_hill(pops, house):
    """Classic divisor method: one seat each, then the top N/sqrt(r(r+1)) claims."""
    claims = sorted(
        ((-n / math.sqrt(r * (r + 1)), i) for i, n in enumerate(pops) for r in range(1, house + 1)),
    )
    seats = [1] * len(pops)
    for _, i in claims[: house - len(pops)]:
        seats[i] += 1
    return seats


def random_census(rng):
    k = int(rng.integers(5, 51))
    pops = np.exp(rng.uniform(math.log(5e4), math.log(4e7), k)).astype(int)
    return census(*(int(p) for p in pops))


class TestInitialAllocation:
    def test_examples(self):
        assert ap.initial_allocation(census(100, 100, 100), 6) == ({"S0": 2, "S1": 2, "S2": 2}, 0)
        assert ap.initial_allocation(census(600, 300, 100), 10) == ({"S0": 6, "S1": 3, "S2": 1}, 0)

    def test_oversubscription_is_surfaced(self):
        with pytest.raises(OversubscriptionError, match="1 seat"):
            ap.initial_allocation(census(980, 10, 10), 10)

    def test_house_smaller_than_states(self):
        with pytest.raises(OversubscriptionError):
            ap.initial_allocation(census(1, 2, 3), 2)


class TestPriority:
    def test_examples(self):
        assert ap.priority_value(QuasiArithmetic(gen.identity()), 1, 100) == pytest.approx(0.015, rel=1e-15)
        assert ap.priority_value(ExpCauchy(), 1, 100) == pytest.approx(2 / 150, rel=1e-15)
        assert ap.priority_value(GEOMETRIC, 3, 200) == pytest.approx(math.sqrt(12) / 200, rel=1e-15)

    def test_rejects_zero_seats(self):
        with pytest.raises(DomainError):
            ap.priority_value(GEOMETRIC, 0, 10)

    @given(st.integers(1, 500), st.integers(1, 10**8))
    def test_b2_equals_harmonic(self, r, n):
        a = ap.priority_value(ExpCauchy(), r, n)
        b = ap.priority_value(QuasiArithmetic(gen.reciprocal()), r, n)
        assert abs(a - b) <= 1e-14 * b


class TestAssign:
    def test_k_zero(self):
        states = census(100, 200)
        out = ap.assign_remaining(states, {"S0": 1, "S1": 3}, 0, ap.ApportionmentConfig(house_size=4))
        assert out.seats == {"S0": 1, "S1": 3} and out.audit == []

    def test_two_state_example(self):
        states = census(100, 200)
        out = ap.assign_remaining(states, {"S0": 1, "S1": 3}, 1, ap.ApportionmentConfig(house_size=5))
        assert out.seats == {"S0": 2, "S1": 3}
        assert out.audit[0]["priority"] == pytest.approx(math.sqrt(2) / 100)

    def test_one_shot_refuses_too_many_seats(self):
        with pytest.raises(OversubscriptionError, match="iterative"):
            ap.assign_remaining(census(5, 5), {"S0": 1, "S1": 1}, 3, ap.ApportionmentConfig(house_size=5))

    def test_iterative_can_repeat_a_state(self):
        cfg = ap.ApportionmentConfig(house_size=5, mode="iterative")
        out = ap.assign_remaining(census(1000, 1), {"S0": 1, "S1": 1}, 3, cfg)
        assert out.seats == {"S0": 4, "S1": 1}

    def test_ties_prefer_population_then_name(self):
        cfg = ap.ApportionmentConfig(house_size=3)
        out = ap.assign_remaining([ap.StateRecord("b", 10), ap.StateRecord("a", 10)], {"a": 1, "b": 1}, 1, cfg)
        assert out.seats == {"a": 2, "b": 1}


class TestApportion:
    def test_default_is_one_shot(self):
        out = ap.apportion(census(600, 300, 100), ap.ApportionmentConfig(house_size=10))
        assert out.mode == "one_shot" and out.start == "floors"
        assert out.seats == {"S0": 6, "S1": 3, "S2": 1}

    def test_iterative_handles_the_oversubscribed_census(self):
        out = ap.apportion(census(980, 10, 10), ap.ApportionmentConfig(house_size=10, mode="iterative"))
        assert out.total == 10 and min(out.seats.values()) == 1
        assert out.start == "one_seat"

    def test_matches_huntington_hill(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            states = random_census(rng)
            out = ap.apportion(states, ap.ApportionmentConfig(mode="iterative"))
            assert [out.seats[s.name] for s in states] == huntington_hill([s.population for s in states], 435)

    @pytest.mark.parametrize("mode", ["one_shot", "iterative"])
    def test_affine_generators_allocate_identically(self, mode):
        rng = np.random.default_rng(5)
        states = census(*(int(p) for p in rng.integers(10**5, 10**7, 12)))
        base = ap.apportion(states, ap.ApportionmentConfig(method=GEOMETRIC, mode=mode))
        for a, b in ((3.0, -7.0), (0.25, 100.0), (-2.0, 1.0)):
            cfg = ap.ApportionmentConfig(method=QuasiArithmetic(gen.affine(gen.log(), a, b)), mode=mode)
            assert ap.apportion(states, cfg).seats == base.seats

    def test_b2_and_reciprocal_allocate_identically(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            states = random_census(rng)
            a = ap.apportion(states, ap.ApportionmentConfig(method=ExpCauchy(), mode="iterative"))
            b = ap.apportion(states, ap.ApportionmentConfig(method=QuasiArithmetic(gen.reciprocal()), mode="iterative"))
            assert a.seats == b.seats

    def test_population_monotonicity(self):
        rng = np.random.default_rng(21)
        states = census(*(int(p) for p in rng.integers(10**5, 10**7, 15)))
        cfg = ap.ApportionmentConfig(mode="iterative")
        base = ap.apportion(states, cfg)
        for i, s in enumerate(states):
            bigger = list(states)
            bigger[i] = ap.StateRecord(s.name, 2 * s.population)
            assert ap.apportion(bigger, cfg).seats[s.name] >= base.seats[s.name]

    def test_config_validation(self):
        with pytest.raises(SpecError):
            ap.ApportionmentConfig(mode="sometimes")
        with pytest.raises(DomainError):
            ap.ApportionmentConfig(house_size=0)


class TestFairness:
    def test_symmetric_is_not_strict(self):
        assert not ap.fairness_check((2, 100), (2, 100), GEOMETRIC)

    def test_two_state_example(self):
        assert ap.fairness_check((1, 100), (3, 200), GEOMETRIC)
        assert not ap.fairness_check((3, 200), (1, 100), GEOMETRIC)

    @settings(max_examples=300)
    @given(
        st.tuples(st.integers(1, 60), st.integers(100, 10**7)),
        st.tuples(st.integers(1, 60), st.integers(100, 10**7)),
        st.sampled_from(["identity", "ln", "reciprocal", "power:2", "power:-0.5"]),
        st.sampled_from([-2, -1, 1, 2]),
    )
    def test_expanded_bajraktarevic_agrees_with_direct(self, A, B, fname, q):
        f, p = gen.generator_from_name(fname), gen.power_weight(q)
        kind = Bajraktarevic(f, p)
        ma = ap.priority_value(kind, *A)
        mb = ap.priority_value(kind, *B)
        if abs(ma - mb) > 1e-12 * max(ma, mb):
            assert ap.fairness_check(A, B, kind) == (ma < mb)

    @given(
        st.tuples(st.integers(1, 60), st.integers(100, 10**7)),
        st.tuples(st.integers(1, 60), st.integers(100, 10**7)),
    )
    def test_harmonic_display(self, A, B):
        ma = ap.priority_value(ExpCauchy(), *A)
        mb = ap.priority_value(ExpCauchy(), *B)
        if abs(ma - mb) > 1e-12 * max(ma, mb):
            assert ap.harmonic_fairness(A, B) == (ma < mb) == ap.fairness_check(A, B, ExpCauchy())


class TestCensusIO:
    def test_round_trip(self, tmp_path):
        text = "name,population\nAlpha,600\nBeta,300\nGamma,100\n"
        states = ap.read_census(text)
        out = ap.apportion(states, ap.ApportionmentConfig(house_size=10))
        ap.write_allocation(out, tmp_path / "a.csv", tmp_path / "a.json")
        assert (tmp_path / "a.csv").read_text().splitlines()[1] == "Alpha,600,6"
        audit = json.loads((tmp_path / "a.json").read_text())
        assert audit["total_seats"] == 10 and audit["mode"] == "one_shot"

    @pytest.mark.parametrize(
        "text, err",
        [
            ("state,pop\nA,1\n", SpecError),
            ("name,population\nA,1.5\n", DomainError),
            ("name,population\nA,0\n", DomainError),
            ("name,population\nA,1,2\n", SpecError),
            ("name,population\nA,4\nA,5\n", DomainError),
            ("name,population\n", DomainError),
        ],
    )
    def test_rejections(self, text, err):
        with pytest.raises(err):
            ap.read_census(text)

    def test_state_record_needs_int(self):
        with pytest.raises(DomainError):
            ap.StateRecord("A", 2.0)
