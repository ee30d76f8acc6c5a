"""Library-level invariant suites, shared by the CLI `verify` command.

Each suite returns a list of (name, passed, detail) records; suites are keyed
by module name.  These are the spec-level invariants at desk scale; the
acceptance criteria live in the test suite and reuse the same machinery.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import elliptic, flow, genus0, moduli, spectral, surface
from .genus0 import Triple

Record = tuple[str, bool, str]


def parallel_map(fn: Callable, items):
    """Map with thread count capped by the CMC_THREADS environment variable."""
    workers = int(os.environ.get("CMC_THREADS", "1"))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _records(checks) -> list[Record]:
    out = []
    for name, fn in checks:
        try:
            detail = fn()
            out.append((name, True, detail or ""))
        except AssertionError as err:
            out.append((name, False, str(err)))
    return out


def suite_elliptic() -> list[Record]:
    def legendre():
        worst = 0.0
        for q in np.arange(0.05, 0.951, 0.05):
            kk, ee = elliptic.elliptic_KE(q)
            kkc, eec = elliptic.elliptic_KE_comp(q)
            worst = max(worst, abs(ee * kkc + eec * kk - kk * kkc - math.pi / 2))
        assert worst < 1e-12, f"legendre residual {worst:.2e}"
        return f"max residual {worst:.2e}"

    def chain():
        for q in np.linspace(5e-3, 1 - 5e-3, 200):
            kkc, eec = elliptic.elliptic_KE_comp(q)
            assert 1.0 <= 2 * eec / (1 + q * q) < kkc < eec / q, f"chain fails at q={q}"
        return "200-point grid"

    def dn_ode():
        worst = 0.0
        for q in (0.1, 0.4, 0.7, 0.95):
            for y in np.linspace(-6, 6, 25):
                d = 1e-5
                v = elliptic.jacobi_dn(y, q)
                vp = (elliptic.jacobi_dn(y + d, q) - elliptic.jacobi_dn(y - d, q)) / (2 * d)
                worst = max(worst, abs(vp * vp + (v * v - 1) * (v * v - q * q)))
        assert worst < 1e-8, f"dn ODE residual {worst:.2e}"
        return f"max residual {worst:.2e}"

    def dn_period():
        worst = 0.0
        for q in (0.2, 0.5, 0.8):
            per = 2 * elliptic.elliptic_KE_comp(q).kk
            y = np.linspace(-3, 3, 31)
            worst = max(
                worst,
                float(np.max(np.abs(elliptic.jacobi_dn(y + per, q) - elliptic.jacobi_dn(y, q)))),
            )
        assert worst < 1e-10, f"dn periodicity {worst:.2e}"
        return f"max defect {worst:.2e}"

    return _records(
        [
            ("legendre relation", legendre),
            ("integral chain 1 <= 2E'/(1+q^2) < K' < E'/q", chain),
            ("dn ODE residual", dn_ode),
            ("dn periodicity", dn_period),
        ]
    )


def suite_spectral() -> list[Record]:
    def skew():
        worst = 0.0
        for q in (0.3, 0.7, -0.5):
            for th in np.linspace(0.2, math.pi / 2 - 0.1, 7):
                a = spectral.omega_circle(th, q)
                b = spectral.omega_circle(math.pi - th, q)
                worst = max(worst, abs(a + b))
        assert worst < 1e-8, f"skew symmetry {worst:.2e}"
        return f"max violation {worst:.2e}"

    def increment():
        worst = 0.0
        for q in (0.25, 0.6, 0.9, -0.4):
            kkc, eec = elliptic.elliptic_KE_comp(q)
            total = elliptic.quad(
                lambda t: (eec - q * kkc * math.cos(2 * t))
                / (math.pi * spectral.nu_circle(t, q)),
                0.0,
                math.pi,
                1e-12,
            )
            worst = max(worst, abs(total - 2.0))
        assert worst < 1e-8, f"circle increment {worst:.2e}"
        return f"max deviation {worst:.2e}"

    def domega_roots():
        for q in (0.2, 0.5, 0.8):
            kkc, eec = elliptic.elliptic_KE_comp(q)
            g = lambda lam: 2 * eec - q * kkc * (lam + 1 / lam)
            assert g(q) < 0 < g(1.0), f"no bracket in (q, 1) at q={q}"
        return "root bracketed in (q, 1)"

    def both_real_locus():
        for q in (0.4, -0.6):
            for r in np.linspace(0.3, 3.0, 18):
                for a in np.linspace(0, 2 * math.pi, 25):
                    lam = r * complex(math.cos(a), math.sin(a))
                    nu_r, om_r = spectral.real_locus(lam, q, eps=1e-6)
                    if nu_r and om_r and abs(abs(lam) - 1) > 1e-6:
                        near = min(abs(lam - q), abs(lam - 1 / q))
                        assert near < 1e-5, f"spurious double point at {lam}"
        return "annulus scan clean"

    return _records(
        [
            ("omega skew symmetry", skew),
            ("omega circle increment = 2", increment),
            ("d(omega) roots avoid d(nu) roots", domega_roots),
            ("double points only at branch points", both_real_locus),
        ]
    )


def suite_genus0() -> list[Record]:
    def roundtrip():
        for t in _triples(6):
            back = genus0.triple_from_spectral(genus0.spectral_from_triple(t))
            assert back == t, f"roundtrip failed for {t}"
        return "triples with l2 <= 6"

    def tau_sign():
        for t in _triples(8):
            s = (2 * t.l0, t.l1 + t.l2, t.l1 - t.l2)
            val = genus0.tau(s)
            assert val == 16 * (t.l0**2 - t.l1**2) * (t.l0**2 - t.l2**2) < 0
        return "exact integer identity"

    def square_iff_flat_minimal():
        import cmath

        for h in np.linspace(-0.8, 0.8, 17):
            t1 = 0.5 * (math.acos(-0.3) + math.acos(h))
            t2 = 0.5 * (math.acos(-0.3) - math.acos(h))
            g1, g2 = genus0.periods_from_windings(
                cmath.exp(2j * t1), cmath.exp(2j * t2), 1, 1, 1, -1
            )
            mismatch = abs(abs(g1) / abs(g2) - 1.0)
            if abs(h) < 1e-12:
                assert mismatch < 1e-12
            else:
                assert mismatch > 1e-3
        return "square lattice exactly at H = 0"

    return _records(
        [
            ("triple <-> spectral data bijection", roundtrip),
            ("tau(s) < 0 identity", tau_sign),
            ("embedded lattice square iff minimal", square_iff_flat_minimal),
        ]
    )


def suite_flow() -> list[Record]:
    def contract_213():
        tr = flow.trace_family(Triple(2, 1, 3))
        assert tr.end_triple == Triple(2, 1, 3), "wrong end triple"
        assert tr.qdot_sign_changes == 1, "dq sign changes != 1"
        assert tr.level_drift < 1e-8, f"level drift {tr.level_drift:.2e}"
        hs = [s.H for s in tr.samples]
        assert all(b < a + 1e-12 for a, b in zip(hs, hs[1:])), "H not monotone"
        bound = math.sqrt(tr.c0) / (2 + 2 * math.sqrt(tr.c0))
        assert all(abs(s.point.q) >= bound - 1e-12 for s in tr.samples)
        return f"drift {tr.level_drift:.1e}"

    def closing_residuals():
        tr = flow.trace_family(Triple(3, 1, 4))
        idx = np.linspace(1, len(tr.samples) - 2, 6).astype(int)
        worst = 0.0
        for i in idx:
            s = tr.samples[i]
            r1, r2 = spectral.closing_residual(tr.s, s.point.q, s.sp)
            worst = max(worst, abs(r1), abs(r2))
        assert worst < 1e-6, f"closing residual {worst:.2e}"
        return f"max residual {worst:.2e}"

    def involution_small():
        traces = parallel_map(flow.trace_family, _twizzled(5))
        for t, tr in zip(_twizzled(5), traces):
            assert tr.end_triple == t.involute(), f"{t} -> {tr.end_triple}"
            assert tr.knot_ratio_drift < 1e-7
        return "l2 <= 5"

    return _records(
        [
            ("(2,1,3) trace contract", contract_213),
            ("closing residuals along trace", closing_residuals),
            ("involution for small triples", involution_small),
        ]
    )


def suite_surface() -> list[Record]:
    def clifford():
        mesh = surface.build_mesh((1j, -1j), resolution=(32, 32))
        v = mesh.vertices4
        assert np.max(np.abs(np.linalg.norm(v, axis=1) - 1)) < 1e-10
        assert mesh.closure_defect < 1e-6
        a = np.hypot(v[:, 0], v[:, 1])
        assert np.max(np.abs(a - 1 / math.sqrt(2))) < 1e-10
        return f"closure {mesh.closure_defect:.1e}"

    def rotational_residuals():
        tr = flow.trace_rotational(1, 2)
        st = min(tr.samples, key=lambda s: abs(s.point.q - 0.8))
        st = flow.polish_closing_state(st, tr.s)
        res = surface.fundamental_form_residuals(st, tr.s)
        assert res["conformality"] < 1e-6 * res["scale"]
        assert res["mean_H"] < 1e-3
        assert res["frame"] < 1e-6
        assert res["monodromy"] < 1e-6
        return f"frame {res['frame']:.1e}, monodromy {res['monodromy']:.1e}"

    def profile_turning():
        for l0, l2, q in [(1, 2, 0.8), (1, 3, 0.6), (2, 3, 0.6)]:
            curve, _ = surface.rotational_profile_curve(l0, l2, q)
            assert curve.turning == l0, f"({l0},0,{l2}) turning {curve.turning}"
        return "turning number = l0"

    return _records(
        [
            ("clifford mesh", clifford),
            ("rotational frame/form residuals", rotational_residuals),
            ("rotational profile turning numbers", profile_turning),
        ]
    )


def suite_moduli() -> list[Record]:
    def involution():
        for t in _triples(30):
            assert moduli.apply_move(moduli.apply_move(t, "1"), "1") == t
        return "move 1 involution, l2 <= 30"

    def shift_preserves():
        for t in _triples(12):
            shifted = moduli.shift_l2(t, 1)
            for pb, pa in zip(
                genus0.triple_sublattices(t), genus0.triple_sublattices(shifted)
            ):
                for n1 in range(-8, 9):
                    for n2 in range(-8, 9):
                        assert pb(n1, n2) == pa(n1, n2)
        return "lattices unchanged, l2 <= 12"

    def reduction():
        for t in _triples(20):
            seq = moduli.reduce_to_base(t)
            end = seq.end or t
            assert end.l1 == 0 or end.l2 == 2 * end.l0
        return "terminates at base, l2 <= 20"

    def connected():
        report = moduli.connectivity_check(8)
        for entry in report["lattices"]:
            idx = entry["index"]
            for step in entry["path"]:
                assert step["next_index"] < idx
                idx = step["next_index"]
            assert idx == 1
        return f"max path length {report['maxPathLen']}"

    return _records(
        [
            ("move-1 involution", involution),
            ("shift preserves sublattices", shift_preserves),
            ("reduction to base", reduction),
            ("connectivity to index 8", connected),
        ]
    )


SUITES = {
    "elliptic": suite_elliptic,
    "spectral": suite_spectral,
    "genus0": suite_genus0,
    "flow": suite_flow,
    "surface": suite_surface,
    "moduli": suite_moduli,
}


def _triples(max_l2):
    out = []
    for l2 in range(2, max_l2 + 1):
        for l0 in range(1, l2):
            for l1 in range(0, l0):
                if math.gcd(l0, math.gcd(l1, l2)) == 1:
                    out.append(Triple(l0, l1, l2))
    return out


def _twizzled(max_l2):
    return [t for t in _triples(max_l2) if not t.rotational]


def run_suites(names=None) -> tuple[list[tuple[str, Record]], bool]:
    chosen = names or list(SUITES)
    results = []
    ok = True
    for name in chosen:
        if name not in SUITES:
            raise KeyError(name)
        for record in SUITES[name]():
            results.append((name, record))
            ok = ok and record[1]
    return results, ok
