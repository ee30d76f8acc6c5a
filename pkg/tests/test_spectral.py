import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmctori.elliptic import elliptic_KE_comp, quad
from cmctori.errors import BranchError, ClosingError, DomainError, RangeError
from cmctori.spectral import (
    KnotType,
    SymPoints,
    best_rational,
    closing_residual,
    coords_to_sym,
    cut_angle,
    knot_type,
    nu_circle,
    nu_omega,
    omega_circle,
    omega_tracked,
    real_locus,
    sym_to_coords,
)

angles = st.floats(min_value=0.05, max_value=math.pi - 0.05)


class TestNu:
    def test_q_zero_collapses(self):
        for theta in np.linspace(0, math.pi, 11):
            assert nu_circle(theta, 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_radicand_values(self):
        assert nu_circle(math.pi / 2, 0.5) == pytest.approx(0.75, abs=1e-15)
        assert nu_circle(0.0, 0.5) == pytest.approx(0.25, abs=1e-15)

    def test_dnu_stationary_only_at_radicand_extrema(self):
        # d(nu)/d(theta) vanishes on the circle only where cos 2theta = +-1
        q = 0.7
        theta = np.linspace(0.01, math.pi - 0.01, 500)
        d = 1e-6
        deriv = np.array(
            [(nu_circle(t + d, q) - nu_circle(t - d, q)) / (2 * d) for t in theta]
        )
        interior = np.abs(theta - math.pi / 2) > 1e-2
        assert np.all(np.abs(deriv[interior]) > 1e-4)


class TestOmega:
    def test_normalization_point(self):
        assert omega_circle(math.pi / 2, 0.5) == pytest.approx(0.0, abs=1e-12)
        assert omega_circle(0.3, -0.4) != 0.0
        # for q < 0 the normalization sits at lam = +1, i.e. theta -> 0 or pi
        assert omega_circle(1e-8, -0.4) == pytest.approx(0.0, abs=1e-7)

    def test_q_one_closed_form(self):
        # At q = 1 the integrand is sin t, so omega(theta) = cos theta.
        for theta in np.linspace(0.1, math.pi - 0.1, 9):
            assert omega_circle(theta, 1.0) == pytest.approx(math.cos(theta), abs=1e-11)

    def test_small_q_limit(self):
        assert omega_circle(math.pi / 4, 1e-6) == pytest.approx(0.5, abs=1e-4)
        for theta in (0.3, 1.0, 2.5):
            assert omega_circle(theta, 1e-6) == pytest.approx(
                1 - 2 * theta / math.pi, abs=1e-4
            )

    @pytest.mark.parametrize("q", [0.2, 0.5, 0.9, -0.3, -0.8, 1.0])
    def test_full_circle_increment(self, q):
        kkc, eec = elliptic_KE_comp(q)
        total = quad(
            lambda t: (eec - q * kkc * math.cos(2 * t)) / (math.pi * nu_circle(t, q)),
            0.0,
            math.pi,
            1e-12,
        )
        assert total == pytest.approx(2.0, abs=1e-10)

    @given(angles, st.floats(min_value=0.05, max_value=0.95))
    @settings(max_examples=60, deadline=None)
    def test_skew_symmetry(self, theta, q):
        a = omega_circle(theta, q)
        b = omega_circle(math.pi - theta, q)
        assert abs(a + b) < 1e-9

    def test_sheet_offset(self):
        v0 = omega_circle(0.8, 0.5, sheet=0)
        assert omega_circle(0.8, 0.5, sheet=3) == pytest.approx(v0 + 6.0, abs=1e-14)

    def test_tracked_is_continuous_and_decreasing(self):
        q = 0.6
        thetas = np.linspace(-0.45, 3.5, 40)
        vals = [omega_tracked(t, q) for t in thetas]
        diffs = np.diff(vals)
        assert np.all(diffs < 0.0)

    def test_cut_raises(self):
        with pytest.raises(BranchError):
            omega_circle(0.0, 0.5)
        with pytest.raises(BranchError):
            omega_circle(math.pi / 2, -0.5)
        assert cut_angle(0.5) == 0.0
        assert cut_angle(-0.5) == math.pi / 2

    @pytest.mark.parametrize("q", [0.3, 0.7])
    def test_domega_root_bracketed_in_q_one(self, q):
        # the root of 2E' - q K'(lam + 1/lam) sits in (q, 1): no common zero
        # with d(nu), whose only roots are lam = q, 1/q
        kkc, eec = elliptic_KE_comp(q)

        def g(lam):
            return 2 * eec - q * kkc * (lam + 1.0 / lam)

        assert g(q) < 0.0 < g(1.0)
        lo, hi = q, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
        root = 0.5 * (lo + hi)
        assert q + 1e-12 < root < 1.0 - 1e-12


class TestCoords:
    def test_clifford_sym_points(self):
        k, h, H = sym_to_coords(SymPoints(math.pi / 4, 3 * math.pi / 4))
        assert k == pytest.approx(-1.0, abs=1e-15)
        assert h == pytest.approx(0.0, abs=1e-15)
        assert H == pytest.approx(0.0, abs=1e-15)

    def test_h_to_H(self):
        sp = coords_to_sym(0.2, 1 / math.sqrt(2))
        assert sym_to_coords(sp)[2] == pytest.approx(1.0, abs=1e-12)

    def test_coincident_points_raise(self):
        with pytest.raises(RangeError):
            sym_to_coords(SymPoints(0.3, 0.3 + 1e-13))

    def test_inversion_example(self):
        sp = coords_to_sym(-1.0, 0.0)
        assert (sp.theta1, sp.theta2) == pytest.approx((math.pi / 4, 3 * math.pi / 4))

    def test_k_equals_h_puts_a_sym_point_at_lam_one(self):
        sp = coords_to_sym(0.6, 0.6)
        lam1 = np.exp(2j * sp.theta1)
        lam2 = np.exp(2j * sp.theta2)
        assert min(abs(lam1 - 1), abs(lam2 - 1)) < 1e-12

    @given(
        st.floats(min_value=-0.999, max_value=0.999),
        st.floats(min_value=-0.999, max_value=0.999),
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, k, h):
        if k >= h:
            k, h = h, k
        if k == h:
            return
        for branch in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
            sp = coords_to_sym(k, h, branch)
            k2, h2, _ = sym_to_coords(sp)
            assert abs(k - k2) < 1e-12
            assert abs(h - h2) < 1e-12

    def test_k_above_h_has_no_branch(self):
        with pytest.raises(BranchError):
            coords_to_sym(0.5, 0.0)

    @given(
        st.floats(min_value=-0.999, max_value=0.999),
        st.floats(min_value=-0.999, max_value=0.999),
        st.floats(min_value=0.05, max_value=0.95),
    )
    @settings(max_examples=100, deadline=None)
    def test_nu_ordering(self, k, h, q):
        if k >= h:
            k, h = h, k
        if k == h:
            return
        sp = coords_to_sym(k, h)
        assert nu_circle(sp.theta1, q) >= nu_circle(sp.theta2, q) - 1e-12


class TestKnot:
    def test_exact_ratio(self):
        assert knot_type(3.0, 1.0) == KnotType(1, 2)

    def test_degenerate_axis(self):
        assert knot_type(1.0, 1.0) == KnotType(0, 1)

    def test_irrational_signals(self):
        with pytest.raises(ClosingError):
            best_rational(math.sqrt(2) - 1, 1e-14, max_den=10**6)

    def test_best_rational_small(self):
        assert best_rational(1 / 3 + 1e-12, 1e-9) == (1, 3)


class TestClosingResidual:
    def test_symmetric_nu_cancels(self):
        sp = SymPoints(1.0, math.pi - 1.0)  # reciprocal pair: equal nu
        r1, _ = closing_residual((0, 1, -1), 0.5, sp)
        assert r1 == pytest.approx(0.0, abs=1e-14)

    def test_generic_data_nonzero(self):
        sp = SymPoints(1.1, 0.4)
        r1, r2 = closing_residual((1, 2, -3), 0.37, sp)
        assert abs(r1) > 1e-3 and abs(r2) > 1e-3

    def test_zero_vector_rejected(self):
        with pytest.raises(DomainError):
            closing_residual((0, 0, 0), 0.5, SymPoints(1.0, 2.0))


class TestRealLocus:
    def test_unit_circle(self):
        nu_r, om_r = real_locus(complex(math.cos(1.0), math.sin(1.0)), 0.5)
        assert nu_r and om_r

    def test_between_branch_points(self):
        nu_r, om_r = real_locus(0.7, 0.5)
        assert nu_r and not om_r

    def test_generic_complex(self):
        assert real_locus(2 + 1j, 0.5) == (False, False)

    def test_negative_axis_for_positive_q(self):
        nu_r, om_r = real_locus(-3.0, 0.5)
        assert nu_r and not om_r

    def test_omega_segments(self):
        assert real_locus(0.2, 0.5) == (False, True)
        assert real_locus(3.0, 0.5) == (False, True)

    def test_negative_q_sets(self):
        assert real_locus(-1.0 + 0j, -0.5)[0]  # on circle
        assert real_locus(-1.2, -0.5) == (True, False)  # in [1/q, q]
        assert real_locus(0.7, -0.5) == (True, False)  # positive axis
        assert real_locus(-0.2, -0.5) == (False, True)  # in [q, 0]
        assert real_locus(-4.0, -0.5) == (False, True)  # in (-inf, 1/q]

    @pytest.mark.parametrize("q", [0.4, 0.85, -0.6])
    def test_double_points_only_at_branch_points(self, q):
        # annulus scan: both real and off the circle happens only at q, 1/q
        for r in np.linspace(0.3, 3.0, 28):
            for a in np.linspace(0, 2 * math.pi, 41):
                lam = r * complex(math.cos(a), math.sin(a))
                nu_r, om_r = real_locus(lam, q, eps=1e-6)
                if nu_r and om_r and abs(abs(lam) - 1.0) > 1e-6:
                    assert min(abs(lam - q), abs(lam - 1.0 / q)) < 1e-5


class TestNuOmegaBundle:
    def test_reciprocal_pair_values(self):
        # theta2 = pi - theta1: nu2 = nu1 and omega2 = -omega1 (branch values)
        sp = SymPoints(0.7, math.pi - 0.7)
        vals = nu_omega(0.6, sp)
        assert vals.nu1 == pytest.approx(vals.nu2, abs=1e-14)
        assert vals.omega1 == pytest.approx(-vals.omega2, abs=1e-10)
