"""The genus-one Whitham flow on the (q, k, h) cuboid.

The vector field is

    dq = q (E' k - q K' h)
    dk = (1 - k^2) A(q) / (1 - q^2),   A = (1 + q^2) E' - 2 q^2 K'
    dh = q (1 - h^2) B(q) / (1 - q^2), B = 2 E' - (1 + q^2) K'

with removable singularities at q = +-1 (A and B vanish to second order
there; a truncated series of K', E' takes over once |1 - |q|| < 1e-6).

Integration is carried out in the angle variables (q, theta1, theta2) of the
sym points lam_j = exp(2 i theta_j), which stay smooth through the branch cut
where the (k, h) square-root conventions flip:

    dtheta1 = -(sin(t1+t2) A~ + q sin(t1-t2) B~) / 2
    dtheta2 = -(sin(t1+t2) A~ - q sin(t1-t2) B~) / 2,   X~ = X / (1 - q^2).

Each integral curve conserves c = (1-k^2)(1-h^2) / ((1+q^2)/(2q) - k h)^2;
the integrator rejects steps that drift this level (no projection, so the
drift is an honest accuracy monitor).  Families are traced with q > 0; the
q < 0 mirror follows from the lam -> -lam symmetry and is not integrated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .elliptic import elliptic_KE_comp
from .errors import ClosingError, DomainError, NumericsError
from .genus0 import Triple
from .spectral import (
    ModuliPoint,
    SymPoints,
    best_rational,
    coords_to_sym,
    nu_circle,
    omega_tracked,
)

_SERIES_CUT = 1e-3


def _ke_comp_series(u: float) -> tuple[float, float]:
    # K', E' expansions at q = 1, error O(u^5)
    kk = math.pi * (0.5 - u / 4 + 5 * u * u / 32 - 7 * u**3 / 64 + 169 * u**4 / 2048)
    ee = math.pi * (0.5 + u / 4 + u * u / 32 - u**3 / 64 + 17 * u**4 / 2048)
    return kk, ee


def _ke_comp(q: float) -> tuple[float, float]:
    # analytic continuation slightly past |q| = 1 keeps integrator stages
    # defined while a step straddles the flat boundary; the series error
    # O(u^5) only affects transient stage values there
    a = abs(q)
    if a > 1.0:
        if a > 1.05:
            raise DomainError(f"|q| too far beyond 1: {q}")
        return _ke_comp_series(a - 1.0)
    return tuple(elliptic_KE_comp(a))


def _ab_tilde(q: float) -> tuple[float, float]:
    """A/(1-q^2) and B/(1-q^2), analytic through q = +-1.

    Near |q| = 1 the direct difference cancels catastrophically, so a series
    in u = |q| - 1 takes over (A = pi(3u^2/4 + 3u^3/8 - 3u^4/128 + O(u^5)),
    B = pi(-u^2/4 + u^3/8 - 11u^4/128 + O(u^5))).
    """
    a = abs(q)
    u = a - 1.0
    if abs(u) < _SERIES_CUT:
        at = -math.pi * u * (0.75 + 0.375 * u - 3.0 * u * u / 128.0) / (2.0 + u)
        bt = math.pi * u * (0.25 - 0.125 * u + 11.0 * u * u / 128.0) / (2.0 + u)
        return at, bt
    kk, ee = _ke_comp(a)
    den = 1.0 - q * q
    return ((1 + q * q) * ee - 2 * q * q * kk) / den, (2 * ee - (1 + q * q) * kk) / den


def vector_field(p: ModuliPoint) -> tuple[float, float, float]:
    """(dq, dk, dh) at a moduli point; q = 0 is the singular locus."""
    if p.q == 0.0:
        raise DomainError("the flow field is singular at q = 0")
    kk, ee = _ke_comp(p.q)
    at, bt = _ab_tilde(p.q)
    dq = p.q * (ee * p.k - p.q * kk * p.h)
    dk = (1.0 - p.k * p.k) * at
    dh = p.q * (1.0 - p.h * p.h) * bt
    return dq, dk, dh


def _theta_field(y: np.ndarray) -> np.ndarray:
    q, t1, t2 = y
    kk, ee = _ke_comp(q)
    at, bt = _ab_tilde(q)
    s_sum = math.sin(t1 + t2)
    s_dif = math.sin(t1 - t2)
    dq = q * (ee * math.cos(t1 + t2) - q * kk * math.cos(t1 - t2))
    dt1 = -0.5 * (s_sum * at + q * s_dif * bt)
    dt2 = -0.5 * (s_sum * at - q * s_dif * bt)
    return np.array([dq, dt1, dt2])


def level_constant(p: ModuliPoint) -> float:
    """Conserved level c in (0, 1) for interior points."""
    den = (1.0 + p.q * p.q) / (2.0 * p.q) - p.k * p.h
    return (1.0 - p.k * p.k) * (1.0 - p.h * p.h) / (den * den)


def endpoint_H(t: Triple) -> tuple[float, float]:
    """Mean curvatures (H0, H1) of the flat tori at the two ends of the flow."""
    l0, l1, l2 = t.l0, t.l1, t.l2
    h0 = (l1 * l1 + l2 * l2 - 2 * l0 * l0) / (
        2.0 * math.sqrt((l2 * l2 - l0 * l0) * (l0 * l0 - l1 * l1))
    )
    m0 = t.involute().l0
    h1 = -(l1 * l1 + l2 * l2 - 2 * m0 * m0) / (
        2.0 * math.sqrt((l2 * l2 - m0 * m0) * (m0 * m0 - l1 * l1))
    )
    return h0, h1


def flat_endpoint(t: Triple, variant: str = "start"):
    """Flat-torus data (q=1, k, h, sym points) at one end of the flow of t.

    The endpoint coordinates solve l1/l0 = sqrt((1+k)/(1+h)) and
    l2/l0 = sqrt((1-k)/(1-h)); the two assignments of {l1, l2} to the two
    ratios give the two flow endpoints, and the start lies in {k - h < 0}.
    For the end variant, (k, h) are the flow-continued coordinates (the
    negated start of the involuted triple); the returned sym points are the
    canonical (0, pi) representatives of the same spectral data.
    """
    if variant not in ("start", "end"):
        raise DomainError(f"variant must be 'start' or 'end', got {variant}")
    base = t if variant == "start" else t.involute()
    r1 = (base.l1 / base.l0) ** 2
    r2 = (base.l2 / base.l0) ** 2
    h = (2.0 - r1 - r2) / (r1 - r2)
    k = r1 * (1.0 + h) - 1.0
    if not k - h < 0.0:
        raise NumericsError(f"start endpoint of {base} not in the k - h < 0 chamber")
    # canonical sym points always come from the start-form coordinates
    sp = coords_to_sym(k, h)
    if variant == "end":
        k, h = -k, -h
    return 1.0, k, h, sp


@dataclass(frozen=True)
class FlowState:
    """One point of an integrated family."""

    t: float
    point: ModuliPoint
    sp: SymPoints
    c: float
    windings: Optional[tuple[tuple[int, int, int], tuple[int, int, int]]] = None
    xs: Optional[tuple[float, float]] = None
    theta2_raw: Optional[float] = None  # continuous angle, before folding

    @property
    def H(self) -> float:
        return self.point.h / math.sqrt(1.0 - self.point.h * self.point.h)


@dataclass(frozen=True)
class FlowEvent:
    kind: str  # cut-crossing | minimal | bouquet | flat-endpoint
    t: float
    data: dict


@dataclass
class FamilyTrace:
    """An integrated flow family with its events and endpoint bookkeeping."""

    samples: list[FlowState]
    events: list[FlowEvent]
    start_triple: Triple
    end_triple: Optional[Triple]
    s: tuple[int, int, int]
    c0: float
    qdot_sign_changes: int = 0
    level_drift: float = 0.0
    knot_ratio_drift: float = 0.0

    def to_jsonable(self) -> dict:
        return {
            "triple": str(self.start_triple),
            "end_triple": str(self.end_triple) if self.end_triple else None,
            "c": self.c0,
            "s": list(self.s),
            "samples": [
                {
                    "t": s.t,
                    "q": s.point.q,
                    "k": s.point.k,
                    "h": s.point.h,
                    "theta1": s.sp.theta1,
                    "theta2": s.sp.theta2,
                    "H": s.H,
                }
                for s in self.samples
            ],
            "events": [
                {"kind": e.kind, "t": e.t, **e.data} for e in self.events
            ],
        }


@dataclass(frozen=True)
class FlowOptions:
    rtol: float = 1e-11
    atol: float = 1e-12
    drift_tol: float = 1e-9
    max_steps: int = 200_000
    endpoint_eps: float = 1e-10
    q_min: float = 1e-4  # rotational bouquet cutoff
    max_samples: int = 400
    residual_checks: int = 7


# Cash-Karp 4(5) tableau
_CK_C = (0.0, 0.2, 0.3, 0.6, 1.0, 0.875)
_CK_A = (
    (),
    (0.2,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_CK_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_CK_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)


def _ck_step(f: Callable, t: float, y: np.ndarray, dt: float):
    k = [f(y)]
    for i in range(1, 6):
        yi = y + dt * sum(a * kk for a, kk in zip(_CK_A[i], k))
        k.append(f(yi))
    y5 = y + dt * sum(b * kk for b, kk in zip(_CK_B5, k))
    y4 = y + dt * sum(b * kk for b, kk in zip(_CK_B4, k))
    return y5, np.max(np.abs(y5 - y4)), k[0], f(y5)


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


class _Integrator:
    """Adaptive Cash-Karp stepper with level-drift rejection and events."""

    def __init__(self, f, y0, t0, opts: FlowOptions, drift_fn=None):
        self.f = f
        self.t = t0
        self.y = np.asarray(y0, float)
        self.opts = opts
        self.drift_fn = drift_fn
        self.f_now = f(self.y)
        self.dt = 1e-6
        self.steps = 0

    def step(self):
        """Advance one accepted step; returns (t_old, y_old, f_old)."""
        o = self.opts
        while True:
            self.steps += 1
            if self.steps > o.max_steps:
                raise NumericsError("flow integration exceeded step budget")
            try:
                y5, err, f0, f5 = _ck_step(self.f, self.t, self.y, self.dt)
            except DomainError:
                self.dt *= 0.5
                continue
            scale = o.atol + o.rtol * max(np.max(np.abs(self.y)), np.max(np.abs(y5)))
            drift_bad = self.drift_fn and self.drift_fn(self.y, y5) > o.drift_tol
            if not np.isfinite(err) or err > scale or drift_bad:
                if np.isfinite(err) and err <= scale:
                    shrink = 0.5  # drift rejection: the error signal is silent
                else:
                    shrink = max(0.2, min(0.9, 0.9 * (scale / max(err, 1e-300)) ** 0.2))
                self.dt *= shrink
                continue
            t_old, y_old, f_old = self.t, self.y, self.f_now
            self.t += self.dt
            self.y, self.f_now = y5, f5
            self.dt *= min(5.0, max(0.2, 0.9 * (scale / max(err, 1e-300)) ** 0.2))
            return t_old, y_old, f_old

    def refine(self, t0, y0, f0, g, lo=None, hi=None):
        """Root of g(y(t)) in the last step using Hermite interpolation."""
        t1, y1, f1 = self.t, self.y, self.f_now
        a = lo if lo is not None else t0
        b = hi if hi is not None else t1

        def gval(tt):
            return g(_hermite(t0, y0, f0, t1, y1, f1, tt))

        ga = gval(a)
        for _ in range(80):
            mid = 0.5 * (a + b)
            gm = gval(mid)
            if ga * gm <= 0:
                b = mid
            else:
                a, ga = mid, gm
        t_root = 0.5 * (a + b)
        return t_root, _hermite(t0, y0, f0, t1, y1, f1, t_root)


def _state_from_theta(t: float, y: np.ndarray) -> FlowState:
    q, th1, th2 = y
    k = math.cos(th1 + th2)
    h = math.cos(th1 - th2)
    n = math.floor(th2 / math.pi)
    sp = SymPoints(th1, th2 - n * math.pi, sheet=-n)
    point = ModuliPoint(min(q, 1.0), k, h)
    return FlowState(t, point, sp, level_constant(point), theta2_raw=th2)


def _recover_triple(y: np.ndarray, tol: float = 1e-7) -> Triple:
    """Rational recovery of the endpoint triple from branch values of nu, omega."""
    q, th1, th2 = y
    q = min(q, 1.0)
    th2f = th2 - math.floor(th2 / math.pi) * math.pi
    n1, n2 = nu_circle(th1, q), nu_circle(th2f, q)
    if n1 < n2:
        n1, n2 = n2, n1
        th1, th2f = th2f, th1
    w1 = omega_tracked(th1, q)
    w2 = omega_tracked(th2f, q)
    knot_num, knot_den = best_rational((n1 - n2) / (n1 + n2), tol)
    scale_num, scale_den = best_rational(
        abs(n1 * w2 - n2 * w1) / (n1 + n2), tol
    )
    l2 = math.lcm(knot_den, scale_den)
    l1 = knot_num * (l2 // knot_den)
    l0 = scale_num * (l2 // scale_den)
    return Triple(l0, l1, l2)


def _closing_vector(t: Triple, th1: float, th2: float) -> tuple[int, int, int]:
    # s is proportional to (nu1 w2 - nu2 w1, nu2, -nu1); at q = 1 the branch
    # values are nu = sin theta, omega = cos theta
    s1, s2 = t.l2 - t.l1, -(t.l1 + t.l2)
    s0 = -round(s1 * math.cos(th1) + s2 * math.cos(th2))
    if abs(s0) != 2 * t.l0 or abs(s0 + s1 * math.cos(th1) + s2 * math.cos(th2)) > 1e-9:
        raise ClosingError(f"start data of {t} does not close")
    return s0, s1, s2


def trace_family(t: Triple, opts: FlowOptions = FlowOptions()) -> FamilyTrace:
    """Integrate the twizzled family of t from its q = 1 start to its end.

    Records the single dq sign change, the cut crossing of lam2 (sheet
    increment), an H = 0 event when present, and the terminal flat endpoint
    with the involuted triple recovered by rational arithmetic.
    """
    if t.l1 < 1:
        raise DomainError("rotational families are traced by trace_rotational")
    _, k0, h0, sp0 = flat_endpoint(t, "start")
    s = _closing_vector(t, sp0.theta1, sp0.theta2)
    y0 = np.array([1.0, sp0.theta1, sp0.theta2])
    p0 = ModuliPoint(1.0, k0, h0)
    c0 = level_constant(p0)

    def level_of(y):
        # raw formula: analytic across q = 1, where ModuliPoint would reject
        q, t1, t2 = y
        k = math.cos(t1 + t2)
        h = math.cos(t1 - t2)
        den = (1.0 + q * q) / (2.0 * q) - k * h
        return (1.0 - k * k) * (1.0 - h * h) / (den * den)

    def drift(y_old, y_new):
        # per-step drift rejection; the accumulated drift is only monitored
        return abs(level_of(y_new) - level_of(y_old)) / c0

    ode = _Integrator(_theta_field, y0, 0.0, opts, drift_fn=drift)
    samples = [_state_from_theta(0.0, y0)]
    events: list[FlowEvent] = []
    turns = 0
    ratio0 = t.l1 / t.l2
    ratio_drift = 0.0
    level_drift = 0.0
    end_state = None

    while end_state is None:
        t_old, y_old, f_old = ode.step()
        # q-turn: sign change of dq
        if f_old[0] < 0.0 <= ode.f_now[0] or f_old[0] > 0.0 >= ode.f_now[0]:
            turns += 1
        # cut crossing of theta2 through a multiple of pi
        m_old = math.floor(y_old[2] / math.pi)
        m_new = math.floor(ode.y[2] / math.pi)
        if m_new != m_old:
            boundary = max(m_old, m_new) * math.pi
            t_c, y_c = ode.refine(t_old, y_old, f_old, lambda yy: yy[2] - boundary)
            events.append(
                FlowEvent(
                    "cut-crossing",
                    t_c,
                    {"q": y_c[0], "sheet_after": -m_new, "theta2": y_c[2]},
                )
            )
        # minimal torus: h = cos(theta1 - theta2) through 0
        h_old = math.cos(y_old[1] - y_old[2])
        h_new = math.cos(ode.y[1] - ode.y[2])
        if h_old * h_new < 0.0:
            t_m, y_m = ode.refine(
                t_old, y_old, f_old, lambda yy: math.cos(yy[1] - yy[2])
            )
            events.append(
                FlowEvent("minimal", t_m, {"q": y_m[0], "state": list(y_m)})
            )
        # terminal: q back through 1 - eps after the turn
        target = 1.0 - opts.endpoint_eps
        if turns > 0 and ode.y[0] >= target:
            t_e, y_e = ode.refine(t_old, y_old, f_old, lambda yy: yy[0] - target)
            end_state = (t_e, y_e)
        else:
            st = _state_from_theta(ode.t, ode.y)
            samples.append(st)
            level_drift = max(level_drift, abs(st.c - c0) / c0)
            n1 = nu_circle(st.sp.theta1, st.point.q)
            n2 = nu_circle(st.sp.theta2, st.point.q)
            hi, lo = max(n1, n2), min(n1, n2)
            ratio_drift = max(ratio_drift, abs((hi - lo) / (hi + lo) - ratio0))

    t_e, y_e = end_state
    samples.append(_state_from_theta(t_e, y_e))
    # rational recovery resolution follows the integration accuracy; vertex
    # ratios have small denominators, so a loose ceiling stays unambiguous
    recover_tol = max(1e-7, min(1e-4, 1e3 * opts.rtol))
    end_triple = _recover_triple(y_e, tol=recover_tol)
    events.append(
        FlowEvent(
            "flat-endpoint",
            t_e,
            {"q": y_e[0], "triple": str(end_triple)},
        )
    )
    if len(samples) > opts.max_samples:
        idx = np.unique(
            np.linspace(0, len(samples) - 1, opts.max_samples).astype(int)
        )
        samples = [samples[i] for i in idx]
    return FamilyTrace(
        samples=samples,
        events=sorted(events, key=lambda e: e.t),
        start_triple=t,
        end_triple=end_triple,
        s=s,
        c0=c0,
        qdot_sign_changes=turns,
        level_drift=level_drift,
        knot_ratio_drift=ratio_drift,
    )


def polish_closing_state(
    state: FlowState,
    s: tuple[int, int, int],
    hold: str = "q",
    tol: float = 1e-12,
) -> FlowState:
    """Newton-polish a traced state onto the exact closing set of s.

    The closing conditions s.(0, nu1, nu2) = 0 = s.(1, omega1, omega2) cut a
    curve in (q, theta1, theta2); one coordinate is held to fix the gauge:
    ``hold='q'`` solves for the angles at fixed modulus, ``hold='h'`` holds
    theta1 - theta2 (exact h, e.g. a minimal torus) and solves for
    (q, theta1).
    """
    q = state.point.q
    th1 = state.sp.theta1
    th2 = state.theta2_raw if state.theta2_raw is not None else state.sp.theta2

    def residual(vec):
        if hold == "q":
            qq, a, b = q, vec[0], vec[1]
        else:
            qq, a = vec[0], vec[1]
            b = a - (th1 - th2)
        n1, n2 = nu_circle(a, qq), nu_circle(b - math.floor(b / math.pi) * math.pi, qq)
        w1 = omega_tracked(a, qq)
        w2 = omega_tracked(b, qq)
        return np.array(
            [s[1] * n1 + s[2] * n2, s[0] + s[1] * w1 + s[2] * w2]
        )

    vec = np.array([th1, th2]) if hold == "q" else np.array([q, th1])
    for _ in range(12):
        r = residual(vec)
        if max(abs(r[0]), abs(r[1])) < tol:
            break
        d = 1e-7
        jac = np.empty((2, 2))
        for j in range(2):
            dv = np.zeros(2)
            dv[j] = d
            jac[:, j] = (residual(vec + dv) - residual(vec - dv)) / (2 * d)
        vec = vec - np.linalg.solve(jac, r)
    else:
        raise NumericsError("closing polish did not converge")
    if hold == "q":
        y = np.array([q, vec[0], vec[1]])
    else:
        y = np.array([vec[0], vec[1], vec[1] - (th1 - th2)])
    return _state_from_theta(state.t, y)


def bouquet_limit(l0: int, l2: int) -> tuple[float, float]:
    """(theta0, H) of the (l0, l2) sphere bouquet: the q -> 0 family limit."""
    if not (1 <= l0 < l2 and math.gcd(l0, l2) == 1):
        raise DomainError(f"need coprime 1 <= l0 < l2, got ({l0}, {l2})")
    return 0.5 * math.pi * (1.0 - l0 / l2), 1.0 / math.tan(math.pi * l0 / l2)


def _rotational_field(y: np.ndarray) -> np.ndarray:
    # k = -1 exactly; state (q, theta1), theta2 = pi - theta1
    q, th1 = y
    kk, ee = _ke_comp(q)
    _, bt = _ab_tilde(q)
    h = -math.cos(2.0 * th1)
    dq = q * (-ee - q * kk * h)
    dth1 = 0.5 * q * math.sin(2.0 * th1) * bt
    return np.array([dq, dth1])


def _rotational_state(t: float, y: np.ndarray) -> FlowState:
    q, th1 = y
    h = -math.cos(2.0 * th1)
    point = ModuliPoint(min(q, 1.0), -1.0, h)
    sp = SymPoints(th1, math.pi - th1)
    # k^2 = 1 is the rotational boundary: the level constant degenerates to 0
    return FlowState(t, point, sp, 0.0, theta2_raw=math.pi - th1)


def trace_rotational(l0: int, l2: int, opts: FlowOptions = FlowOptions()) -> FamilyTrace:
    """Trace the (l0, l2) rotational family from its flat torus to the bouquet.

    k = -1 is held exactly (h = -cos 2 theta1); the trace runs from q = 1
    down to q < opts.q_min, where theta1 is Richardson-extrapolated to q = 0
    against the model theta1(q) = theta0 + a q log(1/q) + b q.
    """
    if not (1 <= l0 < l2 and math.gcd(l0, l2) == 1):
        raise DomainError(f"need coprime 1 <= l0 < l2, got ({l0}, {l2})")
    t = Triple(l0, 0, l2)
    th1_0 = math.acos(l0 / l2)  # omega(theta1; q=1) = cos theta1 = l0/l2
    s = (-2 * l0, l2, -l2)
    y0 = np.array([1.0, th1_0])
    ode = _Integrator(_rotational_field, y0, 0.0, opts)
    samples = [_rotational_state(0.0, y0)]
    events: list[FlowEvent] = []
    marks = {}  # q-value -> theta1 at q_min, 2 q_min, 4 q_min
    targets = [4 * opts.q_min, 2 * opts.q_min, opts.q_min]

    while True:
        t_old, y_old, f_old = ode.step()
        h_old = -math.cos(2 * y_old[1])
        h_new = -math.cos(2 * ode.y[1])
        if h_old * h_new < 0.0:
            t_m, y_m = ode.refine(
                t_old, y_old, f_old, lambda yy: -math.cos(2 * yy[1])
            )
            events.append(FlowEvent("minimal", t_m, {"q": y_m[0], "state": list(y_m)}))
        for qt in targets:
            if y_old[0] > qt >= ode.y[0] and qt not in marks:
                _, y_c = ode.refine(t_old, y_old, f_old, lambda yy: yy[0] - qt)
                marks[qt] = y_c[1]
        samples.append(_rotational_state(ode.t, ode.y))
        if ode.y[0] < opts.q_min:
            break

    # 3-point fit of theta1(q) = theta0 + a q ln(1/q) + b q
    qs = np.array(sorted(marks.keys()))
    ths = np.array([marks[q] for q in qs])
    basis = np.vstack([np.ones_like(qs), qs * np.log(1.0 / qs), qs]).T
    theta0 = float(np.linalg.solve(basis, ths)[0])
    h0 = -math.cos(2 * theta0)
    H0 = h0 / math.sqrt(1.0 - h0 * h0)
    events.append(
        FlowEvent("bouquet", ode.t, {"theta0": theta0, "H": H0, "q_stop": ode.y[0]})
    )
    end_triple = Triple(l2 - l0, 0, l2) if math.gcd(l2 - l0, l2) == 1 else None
    return FamilyTrace(
        samples=samples,
        events=sorted(events, key=lambda e: e.t),
        start_triple=t,
        end_triple=end_triple,
        s=s,
        c0=0.0,
        qdot_sign_changes=0,
        level_drift=0.0,
        knot_ratio_drift=0.0,
    )


def minimal_boundary_case(t: Triple) -> int:
    """0 (interior), +1 / -1 when the minimal torus is the end / start flat torus.

    These are the exact-equality cases l1^2 + l2^2 = 2 max(l0, l0_hat)^2: the
    family's minimal member is itself flat (a Clifford cover).
    """
    if t.l1 * t.l1 + t.l2 * t.l2 == 2 * t.l0 * t.l0:
        return -1
    m0 = t.involute().l0
    if t.l1 * t.l1 + t.l2 * t.l2 == 2 * m0 * m0:
        return 1
    return 0


def minimal_in_family(t: Triple, opts: FlowOptions = FlowOptions()):
    """The unique H = 0 state of the family of t, or None.

    Twizzled families contain one exactly when sqrt(l1^2 + l2^2) >=
    sqrt(2) max(l0, l1 + l2 - l0); rotational ones when l0/l2 lies in
    (1/2, 1/sqrt(2)].  At exact equality the minimal torus is the flat
    endpoint itself and the returned state sits at q = 1.
    """
    if t.rotational:
        r = t.l0 / t.l2
        if not 0.5 < r <= 1.0 / math.sqrt(2.0):
            return None
        trace = trace_rotational(t.l0, t.l2, opts)
    else:
        bound = math.sqrt(2.0) * max(t.l0, t.involute().l0)
        if math.hypot(t.l1, t.l2) < bound:
            return None
        side = minimal_boundary_case(t)
        if side != 0:
            variant = "start" if side < 0 else "end"
            q, k, h, sp = flat_endpoint(t, variant)
            point = ModuliPoint(q, k, h)
            return FlowState(0.0, point, sp, level_constant(point))
        trace = trace_family(t, opts)
    hits = [e for e in trace.events if e.kind == "minimal"]
    if not hits:
        raise NumericsError(f"minimal torus predicted but not found for {t}")
    event = hits[0]
    y = np.array(event.data["state"])
    if t.rotational:
        return _rotational_state(event.t, y)
    return polish_closing_state(_state_from_theta(event.t, y), trace.s, hold="h")
