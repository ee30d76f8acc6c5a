import math

import numpy as np
import pytest

from cmctori.errors import DomainError
from cmctori.flow import (
    FlowOptions,
    bouquet_limit,
    endpoint_H,
    flat_endpoint,
    level_constant,
    minimal_in_family,
    trace_family,
    trace_rotational,
    vector_field,
)
from cmctori.genus0 import Triple
from cmctori.spectral import ModuliPoint, closing_residual, sym_to_coords


def twizzled_triples(max_l2):
    out = []
    for l2 in range(3, max_l2 + 1):
        for l0 in range(2, l2):
            for l1 in range(1, l0):
                if math.gcd(l0, math.gcd(l1, l2)) == 1:
                    out.append(Triple(l0, l1, l2))
    return out


class TestVectorField:
    def test_zero_set(self):
        # zero set is {q^2 = 1} intersect {k = q h}
        dq, dk, dh = vector_field(ModuliPoint(1.0, 0.3, 0.3))
        assert (dq, dk, dh) == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)
        dq, dk, dh = vector_field(ModuliPoint(-1.0, -0.3, 0.3))
        assert (dq, dk, dh) == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)

    def test_q_one_series_limit(self):
        # at q = 1, dq -> (pi/2)(k - h) and dk, dh -> 0
        dq, dk, dh = vector_field(ModuliPoint(1.0, -0.6875, 0.25))
        assert dq == pytest.approx(0.5 * math.pi * (-0.6875 - 0.25), abs=1e-12)
        assert dk == pytest.approx(0.0, abs=1e-12)
        assert dh == pytest.approx(0.0, abs=1e-12)

    def test_series_seam_is_smooth(self):
        # no jump across the series/direct switch at |1 - q| = 1e-3: second
        # differences of the nearly-linear dk(q) stay at rounding level
        qs = [1.0 - (1e-3 + j * 5e-5) for j in range(-4, 5)]
        dks = [vector_field(ModuliPoint(q, 0.2, -0.4))[1] for q in qs]
        second = np.abs(np.diff(dks, n=2))
        assert np.max(second) < 1e-11

    def test_monotonicity_signs(self):
        for q in (0.2, 0.6, 0.95):
            _, dk, dh = vector_field(ModuliPoint(q, 0.1, -0.3))
            assert dk > 0.0 and dh < 0.0
            _, dk, dh = vector_field(ModuliPoint(-q, 0.1, -0.3))
            assert dk > 0.0 and dh > 0.0

    def test_singular_at_q_zero(self):
        with pytest.raises(DomainError):
            ModuliPoint(0.0, 0.1, 0.1)


class TestLevelConstant:
    def test_rational_example(self):
        c = level_constant(ModuliPoint(1.0, -11 / 16, -1 / 4))
        assert c == pytest.approx(2025 / 2809, abs=1e-15)

    def test_rotational_boundary(self):
        assert level_constant(ModuliPoint(0.7, 1.0, 0.3)) == 0.0

    def test_interior_range(self):
        for q in (0.3, 0.8):
            for k in (-0.5, 0.2):
                for h in (-0.4, 0.6):
                    assert 0.0 < level_constant(ModuliPoint(q, k, h)) < 1.0


class TestFlatEndpoints:
    def test_213_start(self):
        q, k, h, sp = flat_endpoint(Triple(2, 1, 3), "start")
        assert (q, k, h) == pytest.approx((1.0, -11 / 16, 1 / 4), abs=1e-14)
        assert k - h < 0.0
        # sym points must reproduce the same coordinates
        k2, h2, _ = sym_to_coords(sp)
        assert (k2, h2) == pytest.approx((k, h), abs=1e-12)

    def test_213_end_is_negation(self):
        q, k, h, _ = flat_endpoint(Triple(2, 1, 3), "end")
        assert (q, k, h) == pytest.approx((1.0, 11 / 16, -1 / 4), abs=1e-14)

    def test_endpoint_H_values(self):
        h0, h1 = endpoint_H(Triple(2, 1, 3))
        assert h0 == pytest.approx(1 / math.sqrt(15), abs=1e-14)
        assert h1 == pytest.approx(-1 / math.sqrt(15), abs=1e-14)
        h0, h1 = endpoint_H(Triple(3, 1, 4))
        assert h0 == pytest.approx(-1 / (2 * math.sqrt(56)), abs=1e-14)
        assert h1 == pytest.approx(-0.75, abs=1e-14)

    def test_self_involutive_symmetry(self):
        # (n-k, n, n+k) families: H1 = -H0
        for n, k in [(2, 1), (3, 1), (3, 2), (4, 1)]:
            t = Triple(n - k, n, n + k) if n - k > n else None
            # ordering: l1 < l0 < l2 requires n < n-k, impossible; the paper's
            # (n-k, n, n+k) means (l0, l1, l2) = (n, n-k, n+k) up to labels
            t = Triple(n, n - k, n + k)
            h0, h1 = endpoint_H(t)
            assert h1 == pytest.approx(-h0, abs=1e-14)

    def test_start_H_matches_formula(self):
        for t in twizzled_triples(6):
            _, _, h, _ = flat_endpoint(t, "start")
            H = h / math.sqrt(1 - h * h)
            assert H == pytest.approx(endpoint_H(t)[0], abs=1e-12)


class TestTraceFamily:
    def test_213_full_contract(self):
        tr = trace_family(Triple(2, 1, 3))
        assert tr.end_triple == Triple(2, 1, 3)
        assert tr.qdot_sign_changes == 1
        assert tr.level_drift < 1e-8
        assert tr.c0 == pytest.approx(0.36, abs=1e-12)
        Hs = [s.H for s in tr.samples]
        assert abs(Hs[0] - 1 / math.sqrt(15)) < 1e-9
        assert abs(Hs[-1] + 1 / math.sqrt(15)) < 1e-6
        assert np.all(np.diff(Hs) < 1e-12)  # monotone decreasing
        kinds = [e.kind for e in tr.events]
        assert kinds.count("minimal") == 1
        assert kinds.count("cut-crossing") == 1

    def test_314_ends_at_214_without_minimal(self):
        tr = trace_family(Triple(3, 1, 4))
        assert tr.end_triple == Triple(2, 1, 4)
        assert not any(e.kind == "minimal" for e in tr.events)

    def test_knot_ratio_constant(self):
        tr = trace_family(Triple(3, 2, 5))
        assert tr.knot_ratio_drift < 1e-7

    def test_closing_residuals_along_trace(self):
        tr = trace_family(Triple(2, 1, 3))
        idx = np.linspace(1, len(tr.samples) - 2, 7).astype(int)
        for i in idx:
            s = tr.samples[i]
            r1, r2 = closing_residual(tr.s, s.point.q, s.sp)
            assert abs(r1) < 1e-6 and abs(r2) < 1e-6

    def test_q_bound_from_level(self):
        tr = trace_family(Triple(2, 1, 3))
        bound = math.sqrt(tr.c0) / (2 + 2 * math.sqrt(tr.c0))
        assert all(abs(s.point.q) >= bound - 1e-12 for s in tr.samples)

    def test_rotational_rejected(self):
        with pytest.raises(DomainError):
            trace_family(Triple(1, 0, 2))

    @pytest.mark.parametrize("t", twizzled_triples(7))
    def test_involution_sweep(self, t):
        tr = trace_family(t)
        assert tr.end_triple == t.involute()
        assert tr.qdot_sign_changes == 1
        assert tr.level_drift < 1e-8
        assert tr.knot_ratio_drift < 1e-7


class TestRotational:
    def test_12_family(self):
        tr = trace_rotational(1, 2)
        assert tr.samples[0].H == pytest.approx(1 / math.sqrt(3), abs=1e-12)
        bq = [e for e in tr.events if e.kind == "bouquet"][0]
        assert bq.data["theta0"] == pytest.approx(math.pi / 4, abs=1e-4)
        assert abs(bq.data["H"]) < 1e-4
        # H decreases monotonically toward the bouquet
        Hs = [s.H for s in tr.samples]
        assert np.all(np.diff(Hs) < 1e-12)

    def test_13_family(self):
        tr = trace_rotational(1, 3)
        bq = [e for e in tr.events if e.kind == "bouquet"][0]
        assert bq.data["theta0"] == pytest.approx(math.pi / 3, abs=1e-4)
        assert bq.data["H"] == pytest.approx(1 / math.tan(math.pi / 3), abs=1e-4)
        assert tr.samples[0].H == pytest.approx(7 / (4 * math.sqrt(2)), abs=1e-12)

    def test_k_held_exactly(self):
        tr = trace_rotational(2, 3)
        assert all(s.point.k == -1.0 for s in tr.samples)

    def test_glued_end_triple(self):
        assert trace_rotational(1, 3).end_triple == Triple(2, 0, 3)

    def test_bouquet_limit_values(self):
        assert bouquet_limit(1, 2) == pytest.approx((math.pi / 4, 0.0), abs=1e-15)
        assert bouquet_limit(1, 3) == pytest.approx(
            (math.pi / 3, 1 / math.sqrt(3)), abs=1e-14
        )

    def test_bouquet_mirror_pairing(self):
        # (m, n) and (n-m, n) bouquets: same geometric object, opposite H sign
        t0a, ha = bouquet_limit(1, 5)
        t0b, hb = bouquet_limit(4, 5)
        assert t0a + t0b == pytest.approx(math.pi / 2, abs=1e-14)
        assert ha == pytest.approx(-hb, abs=1e-12)

    def test_non_coprime_rejected(self):
        with pytest.raises(DomainError):
            bouquet_limit(2, 4)
        with pytest.raises(DomainError):
            trace_rotational(2, 4)


class TestMinimal:
    def test_213_has_minimal(self):
        st = minimal_in_family(Triple(2, 1, 3))
        assert st is not None
        assert abs(st.H) < 1e-8

    def test_314_has_none(self):
        # sqrt(17) < 3 sqrt(2)
        assert minimal_in_family(Triple(3, 1, 4)) is None

    def test_embedded_rotational_never_minimal(self):
        for l2 in (2, 3, 4, 5):
            assert minimal_in_family(Triple(1, 0, l2)) is None

    def test_rotational_criterion(self):
        st = minimal_in_family(Triple(2, 0, 3))  # r = 2/3 in (1/2, 1/sqrt 2]
        assert st is not None and abs(st.H) < 1e-8
        assert minimal_in_family(Triple(3, 0, 4)) is None  # r = 3/4 > 1/sqrt 2

    def test_criterion_matches_trace_sweep(self):
        for t in twizzled_triples(6):
            predicted = math.hypot(t.l1, t.l2) >= math.sqrt(2) * max(
                t.l0, t.involute().l0
            )
            tr = trace_family(t)
            found = any(e.kind == "minimal" for e in tr.events)
            assert predicted == found, t


class TestMonotonicityAlongTrace:
    def test_k_increases_h_decreases(self):
        tr = trace_family(Triple(3, 2, 5))
        ks = [s.point.k for s in tr.samples]
        hs = [s.point.h for s in tr.samples]
        assert np.all(np.diff(ks) > -1e-13)
        assert np.all(np.diff(hs) < 1e-13)


class TestToleranceRobustness:
    @pytest.mark.parametrize("rtol", [1e-7, 1e-9, 1e-11])
    def test_trace_completes_across_tolerances(self, rtol):
        opts = FlowOptions(rtol=rtol, atol=0.1 * rtol)
        tr = trace_family(Triple(3, 1, 4), opts)
        assert tr.end_triple == Triple(2, 1, 4)
        assert tr.qdot_sign_changes == 1
