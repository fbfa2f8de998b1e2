import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genmeans import generators as gen
from genmeans.errors import DomainError, SpecError

GRID = np.geomspace(1e-3, 1e3, 257)


@pytest.mark.parametrize(
    "g",
    [gen.identity(), gen.log(), gen.reciprocal(), gen.power(2.0), gen.power(-0.5), gen.power(1.0), gen.power(-1.0)],
    ids=lambda g: g.name,
)
def test_builtin_generators_round_trip_and_are_monotone(g):
    g.check(GRID)


def test_directions():
    assert gen.log().direction == "increasing"
    assert gen.reciprocal().direction == "decreasing"
    assert not gen.power(-2.0).increasing
    assert not gen.affine(gen.log(), -1.0, 0.0).increasing
    assert gen.affine(gen.reciprocal(), -3.0, 1.0).increasing


@given(st.floats(-4, 4).filter(lambda a: abs(a) > 1e-3), st.floats(-10, 10))
def test_affine_wrapper_round_trips(a, b):
    g = gen.affine(gen.log(), a, b)
    g.check(GRID)
    assert g.derivative(2.0) == pytest.approx(a / 2.0)


def test_affine_range_flips_for_negative_factor():
    g = gen.affine(gen.reciprocal(), -2.0, 1.0)
    assert g.range.hi == 1.0 and g.range.lo == -math.inf


def test_check_catches_a_wrong_inverse():
    bad = gen.Generator("bad", np.log, np.exp, lambda x: 1 / x, gen.POSITIVE, gen.REALS, increasing=False)
    with pytest.raises(DomainError, match="decreasing"):
        bad.check(GRID)
    broken = gen.Generator("broken", np.log, np.sqrt, lambda x: 1 / x, gen.POSITIVE, gen.REALS)
    with pytest.raises(DomainError, match="inverse"):
        broken.check(GRID)


def test_power_zero_is_rejected():
    with pytest.raises(DomainError):
        gen.power(0.0)


def test_weights():
    gen.power_weight(-3).check(GRID)
    gen.unit_weight().check([-2.0, 0.0, 5.0])
    assert gen.power_weight(0).name == "one"


def test_name_parsing():
    assert gen.generator_from_name("ln").name == "ln"
    assert gen.generator_from_name("power:0").name == "ln"
    assert gen.generator_from_name("power:2.5").name == "power:2.5"
    assert gen.weight_from_name("identity")(3.0) == 3.0
    for bad in ("sqrt", "power", "power:x"):
        with pytest.raises(SpecError):
            gen.generator_from_name(bad)
    with pytest.raises(SpecError):
        gen.weight_from_name("log")


def test_interval_membership_is_strict_by_default():
    assert not gen.GREATER_THAN_ONE.contains(1.0)
    assert gen.Interval(1.0, 2.0, True, True).contains(np.array([1.0, 2.0])).all()
    assert str(gen.Interval(0, 1, True, False)) == "[0, 1)"
