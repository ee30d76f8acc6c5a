import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmctori.elliptic import elliptic_KE, elliptic_KE_comp, jacobi_dn, quad
from cmctori.errors import DomainError, NumericsError, RangeError


def ke_by_quadrature(q):
    """Independent oracle: adaptive quadrature of the defining integrals."""
    kk = quad(lambda t: 1.0 / math.sqrt(1.0 - (q * math.sin(t)) ** 2), 0.0, math.pi / 2, 1e-14)
    ee = quad(lambda t: math.sqrt(1.0 - (q * math.sin(t)) ** 2), 0.0, math.pi / 2, 1e-14)
    return kk, ee


class TestEllipticKE:
    def test_degenerate_modulus(self):
        pair = elliptic_KE(0.0)
        assert pair.kk == pytest.approx(math.pi / 2, abs=1e-15)
        assert pair.ee == pytest.approx(math.pi / 2, abs=1e-15)

    def test_near_one_modulus(self):
        # K diverges logarithmically, E -> 1 (E' >= 1 at the complementary modulus)
        q = 1.0 - 1e-12
        pair = elliptic_KE(q)
        assert pair.kk > 10.0
        assert pair.ee == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("q", [0.05, 0.25, 0.5, 0.75, 0.9, 0.99])
    def test_against_quadrature_oracle(self, q):
        kk, ee = ke_by_quadrature(q)
        pair = elliptic_KE(q)
        assert pair.kk == pytest.approx(kk, rel=1e-12)
        assert pair.ee == pytest.approx(ee, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            elliptic_KE(1.0)
        with pytest.raises(DomainError):
            elliptic_KE(-0.1)


class TestComplementary:
    def test_q_one(self):
        for q in (1.0, -1.0):
            pair = elliptic_KE_comp(q)
            assert pair.kk == pytest.approx(math.pi / 2, abs=1e-15)
            assert pair.ee == pytest.approx(math.pi / 2, abs=1e-15)

    def test_even(self):
        a, b = elliptic_KE_comp(0.37), elliptic_KE_comp(-0.37)
        assert a.kk == b.kk and a.ee == b.ee

    def test_q_zero_diverges(self):
        with pytest.raises(RangeError):
            elliptic_KE_comp(0.0)

    @pytest.mark.parametrize("q", [0.96, 0.99, 1.0 - 1e-4])
    def test_series_at_one(self, q):
        # K'(q) = pi (1/2 - (q-1)/4 + 5(q-1)^2/32 - 7(q-1)^3/64 + O((q-1)^4))
        # E'(q) = pi (1/2 + (q-1)/4 + (q-1)^2/32 - (q-1)^3/64 + O((q-1)^4))
        u = q - 1.0
        kk_series = math.pi * (0.5 - u / 4 + 5 * u * u / 32 - 7 * u**3 / 64)
        ee_series = math.pi * (0.5 + u / 4 + u * u / 32 - u**3 / 64)
        pair = elliptic_KE_comp(q)
        bound = max(2.0 * abs(u) ** 4, 8 * math.pi * 2.3e-16)
        assert abs(pair.kk - kk_series) < bound
        assert abs(pair.ee - ee_series) < bound

    def test_integral_chain_example(self):
        # 1 <= 2E'/(1+q^2) < K' < E'/|q| at q = 0.6
        kk, ee = elliptic_KE_comp(0.6)
        assert 1.0 <= 2 * ee / (1 + 0.36) < kk < ee / 0.6

    @given(st.floats(min_value=1e-3, max_value=1.0 - 1e-9))
    @settings(max_examples=200, deadline=None)
    def test_legendre_relation(self, q):
        kk, ee = elliptic_KE(q)
        kkc, eec = elliptic_KE_comp(q)
        residual = ee * kkc + eec * kk - kk * kkc - math.pi / 2
        assert abs(residual) < 1e-12

    @given(st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
    @settings(max_examples=200, deadline=None)
    def test_alpha_less_beta_chain(self, q):
        kk, ee = elliptic_KE_comp(q)
        assert 1.0 <= 2 * ee / (1 + q * q)
        assert 2 * ee / (1 + q * q) < kk
        assert kk < ee / q


class TestJacobiDn:
    @pytest.mark.parametrize("q", [0.1, 0.3, 0.6, 0.9, 1.0])
    def test_value_and_slope_at_zero(self, q):
        assert jacobi_dn(0.0, q) == pytest.approx(1.0, abs=1e-14)
        d = 1e-6
        slope = (jacobi_dn(d, q) - jacobi_dn(-d, q)) / (2 * d)
        assert abs(slope) < 1e-9

    def test_q_one_constant(self):
        y = np.linspace(-5, 5, 101)
        assert np.allclose(jacobi_dn(y, 1.0), 1.0, atol=1e-15)

    def test_q_zero_sech(self):
        y = np.linspace(-4, 4, 81)
        assert np.allclose(jacobi_dn(y, 0.0), 1 / np.cosh(y), atol=1e-15)

    def test_small_q_sech_limit(self):
        y = np.linspace(-3, 3, 61)
        assert np.max(np.abs(jacobi_dn(y, 1e-8) - 1 / np.cosh(y))) < 1e-6

    @pytest.mark.parametrize("q", [0.2, 0.5, 0.8])
    def test_range(self, q):
        y = np.linspace(0, 30, 4001)
        v = jacobi_dn(y, q)
        assert np.all(v <= 1.0 + 1e-12)
        assert np.all(v >= q - 1e-12)
        # extrema sit exactly at multiples of K'
        kkc = elliptic_KE_comp(q).kk
        assert jacobi_dn(kkc, q) == pytest.approx(q, abs=1e-12)
        assert jacobi_dn(2 * kkc, q) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("q", [0.15, 0.5, 0.85])
    def test_period(self, q):
        period = 2 * elliptic_KE_comp(q).kk
        y = np.linspace(-3, 3, 37)
        assert np.max(np.abs(jacobi_dn(y + period, q) - jacobi_dn(y, q))) < 1e-10

    @given(
        st.floats(min_value=-8.0, max_value=8.0),
        st.floats(min_value=0.05, max_value=0.999),
    )
    @settings(max_examples=200, deadline=None)
    def test_ode_residual(self, y, q):
        # (v')^2 + (v^2 - 1)(v^2 - q^2) = 0 with centered-difference v'
        d = 1e-5
        v = jacobi_dn(y, q)
        vp = (jacobi_dn(y + d, q) - jacobi_dn(y - d, q)) / (2 * d)
        residual = vp * vp + (v * v - 1.0) * (v * v - q * q)
        assert abs(residual) < 1e-8


class TestQuad:
    def test_sin(self):
        assert quad(math.sin, 0.0, math.pi, 1e-12) == pytest.approx(2.0, abs=1e-12)

    def test_zero(self):
        assert quad(lambda t: 0.0, 0.0, 1.0, 1e-12) == 0.0

    def test_elliptic_cross_check(self):
        val = quad(lambda t: (1 - 0.25 * math.sin(t) ** 2) ** -0.5, 0.0, math.pi / 2, 1e-13)
        assert val == pytest.approx(elliptic_KE(0.5).kk, abs=1e-12)

    def test_budget_exhaustion_carries_estimate(self):
        # Oscillation too fast for the interval budget at this tolerance
        with pytest.raises(NumericsError) as err:
            quad(lambda t: math.cos(1.0 / t) / t, 1e-9, 1.0, 1e-13)
        assert err.value.best_estimate is not None
