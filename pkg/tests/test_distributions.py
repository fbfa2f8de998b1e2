import math

import numpy as np
import pytest

from genmeans import distributions as d
from genmeans.errors import DomainError, NumericalError, SpecError
from genmeans.montecarlo import sample, stream

FAMILIES = [
    d.ExpLog(1.0),
    d.ExpLog(2.0),
    d.LogNormalBase(0.0, 0.5),
    d.ShiftedLogNormal(0.0, 1.0),
    d.UniformInterval(0.5, 2.0),
    d.UniformInterval(1.0, 4.0),
    d.PointMass(math.e),
    d.LogPareto(1.5, -1),
    d.LogPareto(3.0, 1),
    d.HeavyLogLog(),
]


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda x: repr(x))
def test_samples_respect_strict_support(dist):
    xs = sample(dist, 20_000, stream(42, 0))
    x = xs.values
    assert np.all(np.isfinite(x))
    if dist.support_tag == "greater_than_one":
        assert np.all(x > 1.0)
    else:
        assert np.all(x > 0.0)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda x: repr(x))
def test_round_trip_through_dict(dist):
    assert d.distribution_from_dict(dist.to_dict()) == dist


def test_point_mass_sample():
    assert list(sample(d.PointMass(math.e), 3, stream(0, 0)).values) == [math.e] * 3


def test_same_stream_same_draws():
    a = sample(d.ExpLog(1.0), 100, stream(42, 0)).values
    b = sample(d.ExpLog(1.0), 100, stream(42, 0)).values
    c = sample(d.ExpLog(1.0), 100, stream(42, 1)).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_support_tags():
    assert d.UniformInterval(1.0, 2.0).support_tag == "greater_than_one"
    assert d.UniformInterval(0.9, 2.0).support_tag == "positive"
    assert d.PointMass(1.0).support_tag == "positive"
    assert d.LogPareto(2.0, -1).support_tag == "positive"


def test_parameter_validation():
    for bad in (lambda: d.ExpLog(0), lambda: d.LogNormalBase(0, 0), lambda: d.UniformInterval(2, 1),
                lambda: d.PointMass(-1), lambda: d.LogPareto(1.0, 0)):
        with pytest.raises(DomainError):
            bad()


def test_string_parsing():
    assert d.distribution_from_string("explog:lam=2") == d.ExpLog(2.0)
    assert d.distribution_from_string("LogNormalBase:mu=0,sigma=0.5") == d.LogNormalBase(0.0, 0.5)
    with pytest.raises(SpecError):
        d.distribution_from_string("gamma:k=2")
    with pytest.raises(SpecError):
        d.distribution_from_string("explog:2")


def test_expectations_by_quadrature():
    assert d.expect(d.ExpLog(2.0), lambda x: x) == pytest.approx(2.0, abs=1e-9)
    assert d.expect(d.LogNormalBase(0.0, 0.5), lambda x: x) == pytest.approx(math.exp(0.125), abs=1e-9)
    assert d.expect(d.UniformInterval(1.0, 3.0), lambda x: x * x) == pytest.approx(13 / 3, abs=1e-9)


def test_divergent_integral_is_flagged():
    with pytest.raises(NumericalError):
        d.expect(d.ExpLog(1.0), lambda x: x)


def test_heavy_loglog_normalised():
    assert d.HeavyLogLog().expect_log(lambda l: 1.0) == pytest.approx(1.0, abs=1e-9)
