"""Spectral data of genus <= 1 curves on the unit circle.

The curve is 4 nu^2 = (lam - q)(1/lam - q) with real modulus q in [-1,1]\\{0}.
Points on the unit circle are written lam = exp(2 i theta) with theta in
(0, pi); then

    nu(theta; q)   = sqrt(1 - 2 q cos 2theta + q^2) / 2   (positive branch)
    d omega        = (E' - q K' cos 2t) / (pi nu(t)) dt    (up to orientation)

omega is single valued on the circle minus the cut at lam = sign(q), is
normalized to 0 at lam = -sign(q), and oriented so that omega -> 1 - 2 theta/pi
as q -> 0.  Crossing the cut jumps the branch value by -+2; a separate integer
sheet counter keeps continued values omega + 2*sheet.

Two unimodular sym points lam_j = exp(2 i theta_j) map to the symmetric
coordinates k = cos(theta1 + theta2), h = cos(theta1 - theta2), and the mean
curvature is H = h / sqrt(1 - h^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .elliptic import elliptic_KE_comp, quad
from .errors import BranchError, ClosingError, DomainError, RangeError

_CUT_TOL = 1e-13


@dataclass(frozen=True)
class SymPoints:
    """Angles of the two sym points, theta_j in (0, pi), lam_j = exp(2 i theta_j).

    Convention: nu(theta1) >= nu(theta2) at construction time.  ``sheet`` is
    the omega-sheet counter of theta2 relative to the branch cut; it is 0 for
    freshly constructed data and changes by +-1 at cut crossings along a flow.
    """

    theta1: float
    theta2: float
    sheet: int = 0

    def __post_init__(self):
        if abs(self.theta1 - self.theta2) < 1e-15:
            raise DomainError("sym points must be distinct")


@dataclass(frozen=True)
class ModuliPoint:
    """Flow coordinates (q, k, h); interior points fill (-1,1)^3 minus {q=0}."""

    q: float
    k: float
    h: float

    def __post_init__(self):
        if not (-1.0 <= self.q <= 1.0) or self.q == 0.0:
            raise DomainError(f"q must lie in [-1,1] minus 0, got {self.q}")
        if not (-1.0 <= self.k <= 1.0 and -1.0 <= self.h <= 1.0):
            raise DomainError("k, h must lie in [-1, 1]")


@dataclass(frozen=True)
class NuOmega:
    """Values of nu and omega at the two sym points (omega sheet-corrected)."""

    nu1: float
    nu2: float
    omega1: float
    omega2: float


@dataclass(frozen=True)
class KnotType:
    """(m, n) torus-knot type of the equivariant orbits, gcd(m, n) = 1, n > 0."""

    m: int
    n: int

    def __post_init__(self):
        if self.n <= 0 or math.gcd(self.m, self.n) != 1:
            raise DomainError(f"invalid knot type ({self.m}, {self.n})")


def nu_circle(theta: float, q: float) -> float:
    """nu at lam = exp(2 i theta), positive branch; defined for q in [-1, 1]."""
    if not -1.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [-1, 1], got {q}")
    radicand = 1.0 - 2.0 * q * math.cos(2.0 * theta) + q * q
    return 0.5 * math.sqrt(max(radicand, 0.0))


def cut_angle(q: float) -> float:
    """Angle in [0, pi) at which the circle meets the branch cut (lam = sign q)."""
    return 0.0 if q > 0.0 else math.pi / 2.0


def omega_circle(theta: float, q: float, sheet: int = 0, tol: float = 1e-11) -> float:
    """Branch value of omega at lam = exp(2 i theta), plus 2*sheet.

    theta is first reduced mod pi into (0, pi).  Evaluation at the cut angle
    raises :class:`BranchError`.
    """
    if q == 0.0 or not -1.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [-1,1] minus 0, got {q}")
    th = math.fmod(theta, math.pi)
    if th < 0.0:
        th += math.pi
    kkc, eec = elliptic_KE_comp(q)

    def integrand(t: float) -> float:
        return (eec - q * kkc * math.cos(2.0 * t)) / (math.pi * nu_circle(t, q))

    if q > 0.0:
        if th < _CUT_TOL or math.pi - th < _CUT_TOL:
            raise BranchError("omega evaluated at the branch cut lam = 1")
        base = -quad(integrand, math.pi / 2.0, th, tol)
    else:
        if abs(th - math.pi / 2.0) < _CUT_TOL:
            raise BranchError("omega evaluated at the branch cut lam = -1")
        anchor = 0.0 if th < math.pi / 2.0 else math.pi
        base = -quad(integrand, anchor, th, tol)
    return base + 2.0 * sheet


def omega_tracked(theta: float, q: float, tol: float = 1e-11) -> float:
    """Continuous omega for real theta: branch value minus 2*floor(theta/pi).

    This is the single-valued continuation used along flows (q > 0), strictly
    decreasing in theta.  At multiples of pi (the cut itself) the continuation
    takes the exact odd-integer value 1 - 2m by the skew symmetry.
    """
    if q <= 0.0:
        raise DomainError("the tracked continuation is defined for q > 0")
    m = round(theta / math.pi)
    if abs(theta - m * math.pi) < 1e-12:
        return float(1 - 2 * m)
    n = math.floor(theta / math.pi)
    return omega_circle(theta - n * math.pi, q, sheet=-n, tol=tol)


def sym_to_coords(sp: SymPoints) -> tuple[float, float, float]:
    """(k, h, H) from the sym-point angles; h = +-1 means H is infinite."""
    k = math.cos(sp.theta1 + sp.theta2)
    h = math.cos(sp.theta1 - sp.theta2)
    if 1.0 - h * h <= 0.0:
        raise RangeError("coincident sym points: mean curvature is infinite")
    return k, h, h / math.sqrt(1.0 - h * h)


def coords_to_sym(k: float, h: float, branch: tuple[int, int] = (1, 1)) -> SymPoints:
    """Invert (k, h) -> (theta1, theta2) up to the supplied branch signs.

    On (0, pi)^2 one always has k < h is false, i.e. cos(t1+t2) < cos(t1-t2),
    so preimages with both angles in (0, pi) exist exactly for k <= h; for
    k > h no branch choice works and the caller must continue the angles
    beyond the cut (shift by pi) itself.  branch = (conjugate, swap) signs
    select among the four preimages; the default is canonical: both angles in
    (0, pi), nu(theta1) >= nu(theta2) for q > 0, ties broken ascending.
    """
    if not (-1.0 <= k <= 1.0 and -1.0 <= h <= 1.0):
        raise DomainError("k, h must lie in [-1, 1]")
    if k > h:
        raise BranchError(
            f"no sym-point branch in (0, pi)^2 for k={k} > h={h}; "
            "shift one angle by pi for the other lam-preimage"
        )
    big = math.acos(k)
    small = math.acos(h)
    theta1 = 0.5 * (big + small)
    theta2 = 0.5 * (big - small)
    if branch[0] < 0:
        theta1, theta2 = math.pi - theta1, math.pi - theta2
    if branch[1] < 0:
        theta1, theta2 = theta2, theta1
    # cos 2theta1 <= cos 2theta2 holds for the default branch, so the nu
    # order is canonical for q > 0; break exact ties by ascending angle.
    if abs(math.cos(2 * theta1) - math.cos(2 * theta2)) < 1e-14 and theta1 > theta2:
        theta1, theta2 = theta2, theta1
    return SymPoints(theta1, theta2)


def nu_omega(q: float, sp: SymPoints, tol: float = 1e-11) -> NuOmega:
    """nu and omega at both sym points; omega2 carries the sheet correction.

    For q > 0 the evaluation goes through the tracked continuation, which is
    well defined even when a sym point sits exactly on the cut.
    """
    if q > 0.0:
        w1 = omega_tracked(sp.theta1, q, tol)
        w2 = omega_tracked(sp.theta2 - sp.sheet * math.pi, q, tol)
    else:
        w1 = omega_circle(sp.theta1, q, 0, tol)
        w2 = omega_circle(sp.theta2, q, sp.sheet, tol)
    return NuOmega(
        nu1=nu_circle(sp.theta1, q),
        nu2=nu_circle(sp.theta2, q),
        omega1=w1,
        omega2=w2,
    )


def best_rational(x: float, tol: float, max_den: int = 10**6) -> tuple[int, int]:
    """Smallest-denominator fraction within tol of x, by continued fractions.

    Raises :class:`ClosingError` when no fraction with denominator <= max_den
    approximates x to tol (the "irrational" signal).
    """
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    frac = Fraction(x).limit_denominator(max_den)
    if abs(float(frac) - x) < tol:
        return frac.numerator, frac.denominator
    raise ClosingError(f"no rational within {tol} of {x} below denominator {max_den}")


def knot_type(nu1: float, nu2: float, tol: float = 1e-9) -> KnotType:
    """Torus-knot type (m, n) with m/n = (nu1 - nu2)/(nu1 + nu2)."""
    if not nu1 >= nu2 > 0.0:
        raise DomainError("need nu1 >= nu2 > 0")
    ratio = (nu1 - nu2) / (nu1 + nu2)
    m, n = best_rational(ratio, tol)
    return KnotType(m, n)


def closing_residual(
    s: tuple[int, int, int], q: float, sp: SymPoints, tol: float = 1e-11
) -> tuple[float, float]:
    """Residuals (s . (0, nu1, nu2), s . (1, omega1, omega2)).

    Both vanish exactly on closing spectral data; omega2 is taken on the
    tracked sheet carried by ``sp``.
    """
    if s == (0, 0, 0):
        raise DomainError("s must be nonzero")
    vals = nu_omega(q, sp, tol)
    r1 = s[1] * vals.nu1 + s[2] * vals.nu2
    r2 = s[0] + s[1] * vals.omega1 + s[2] * vals.omega2
    return r1, r2


def real_locus(lam: complex, q: float, eps: float = 1e-9) -> tuple[bool, bool]:
    """(nu real, omega real) membership at lam, per the closed-form sets.

    For q in (0, 1]: nu is real iff lam lies on the unit circle, on [q, 1/q],
    or on the negative real axis; omega is real on the unit circle and, among
    real lam, exactly on [0, q] u [1/q, inf).  For q in [-1, 0) the mirrored
    sets apply (cut through lam = -1, segments on the negative axis).
    """
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lam must be nonzero")
    if q == 0.0 or not -1.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [-1,1] minus 0, got {q}")
    on_circle = abs(abs(lam) - 1.0) <= eps
    is_real = abs(lam.imag) <= eps
    x = lam.real
    qa, qb = (q, 1.0 / q) if q > 0 else (1.0 / q, q)  # qa <= qb
    if q > 0:
        nu_real = on_circle or (is_real and (qa - eps <= x <= qb + eps or x <= eps))
        omega_real = on_circle or (
            is_real and (-eps <= x <= qa + eps or x >= qb - eps)
        )
    else:
        nu_real = on_circle or (is_real and (qa - eps <= x <= qb + eps or x >= -eps))
        omega_real = on_circle or (
            is_real and (qb - eps <= x <= eps or x <= qa + eps)
        )
    return nu_real, omega_real
