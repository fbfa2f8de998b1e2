import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genmeans.errors import DomainError
from genmeans.stats import ks_statistic, normal_cdf, normal_ppf


class TestNormalCdf:
    def test_center_and_quantile(self):
        assert normal_cdf(0.0) == 0.5
        assert normal_cdf(1.959963985) == pytest.approx(0.975, abs=1e-7)

    def test_far_tail(self):
        assert 0 < normal_cdf(-8.0) < 1e-14

    @given(st.floats(-30, 30))
    def test_reflection(self, x):
        assert abs(normal_cdf(-x) - (1.0 - normal_cdf(x))) <= 1e-15

    def test_against_erf_table(self):
        for x, expected in [(1.0, 0.8413447460685429), (-2.5, 0.006209665325776132), (3.0, 0.9986501019683699)]:
            assert normal_cdf(x) == pytest.approx(expected, abs=1e-15)

    def test_vectorised(self):
        out = normal_cdf(np.array([-1.0, 0.0, 1.0]))
        assert out.shape == (3,) and out[1] == 0.5


class TestNormalPpf:
    @given(st.floats(1e-10, 1 - 1e-10))
    def test_inverts_cdf(self, p):
        assert normal_cdf(normal_ppf(p)) == pytest.approx(p, rel=1e-9, abs=1e-15)

    def test_rejects_bounds(self):
        with pytest.raises(DomainError):
            normal_ppf(0.0)
        with pytest.raises(DomainError):
            normal_ppf(np.array([0.5, 1.0]))


class TestKs:
    @pytest.mark.parametrize("R", [1, 10, 1000])
    def test_midpoint_quantiles(self, R):
        q = normal_ppf((np.arange(1, R + 1) - 0.5) / R)
        assert ks_statistic(q) == pytest.approx(0.5 / R, abs=1e-9)

    def test_single_value_at_median(self):
        assert ks_statistic([0.0]) == 0.5

    def test_normal_draws_are_close(self):
        rng = np.random.default_rng(7)
        assert ks_statistic(rng.standard_normal(10_000)) < 0.02

    def test_shifted_draws_are_far(self):
        rng = np.random.default_rng(7)
        assert ks_statistic(rng.standard_normal(5000) + 0.5) > 0.15

    def test_custom_cdf(self):
        u = (np.arange(100) + 0.5) / 100
        assert ks_statistic(u, lambda x: np.clip(x, 0, 1)) == pytest.approx(0.005)

    def test_errors(self):
        with pytest.raises(DomainError):
            ks_statistic([])
        with pytest.raises(DomainError):
            ks_statistic([0.0, math.nan])
