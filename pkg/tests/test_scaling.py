import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pentabot.scaling import (
    ScalingQuery,
    acceleration_scale,
    report_paper_scenarios,
    scaled_radius,
)


def q(m0=1.0, r0=1.0, new=1.0):
    return ScalingQuery(base_dipole=m0, base_radius=r0, base_payload=8e-4,
                        new_dipole=new)


class TestScaledRadius:
    def test_identity(self):
        assert scaled_radius(q()) == 1.0

    def test_ratio_128_gives_4(self):
        assert scaled_radius(q(new=128.0)) == pytest.approx(4.0, rel=1e-12)

    def test_half_ratio(self):
        assert scaled_radius(q(new=0.5)) == pytest.approx(0.5 ** (2 / 7),
                                                          rel=1e-12)
        assert scaled_radius(q(new=0.5)) == pytest.approx(0.8203, abs=5e-5)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            q(new=0.0)
        with pytest.raises(ValueError):
            q(m0=-1.0)

    @given(a=st.floats(0.01, 100), b=st.floats(0.01, 100))
    @settings(max_examples=100, deadline=None)
    def test_multiplicative(self, a, b):
        r1 = scaled_radius(q(new=a))
        r2 = r1 * (scaled_radius(q(new=b)))
        combined = scaled_radius(q(new=a * b))
        assert r2 == pytest.approx(combined, rel=1e-12)

    @given(rho=st.floats(0.01, 100))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, rho):
        r1 = scaled_radius(q(new=rho))
        back = scaled_radius(ScalingQuery(rho, r1, 8e-4, 1.0))
        assert back == pytest.approx(1.0, rel=1e-12)


class TestAccelerationScale:
    def test_doubling_m(self):
        assert acceleration_scale(2.0, 1.0) == 4.0 * acceleration_scale(1.0, 1.0)

    def test_doubling_r(self):
        assert acceleration_scale(1.0, 2.0) == \
            pytest.approx(acceleration_scale(1.0, 1.0) / 128.0, rel=1e-12)

    def test_consistency_with_scaled_radius(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            m0, r0 = rng.uniform(0.1, 10.0, 2)
            m1 = rng.uniform(0.1, 10.0)
            query = ScalingQuery(m0, r0, 8e-4, m1)
            a0 = acceleration_scale(m0, r0)
            a1 = acceleration_scale(m1, scaled_radius(query))
            assert a1 == pytest.approx(a0, rel=1e-9)

    def test_invalid(self):
        with pytest.raises(ValueError):
            acceleration_scale(0.0, 1.0)


class TestReport:
    def test_quoted_values_present(self):
        text = report_paper_scenarios()
        assert "3.5 cm^3" in text
        assert "26.2 kg" in text
        assert "(27.3 m)^3" in text
        assert "3.8e5 kg" in text
        assert text.count("paper-quoted") >= 3

    def test_query_appends_ratio(self):
        text = report_paper_scenarios(q(new=128.0))
        assert "radius ratio 4" in text
