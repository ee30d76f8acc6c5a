"""Complete elliptic integrals, the Jacobi dn function, and adaptive quadrature.

Conventions
-----------
All public functions take the elliptic *modulus* q (so the defining integrals
contain q^2 sin^2 t).  The Jacobi function ``jacobi_dn(y, q)`` is the square
root of the conformal factor of a genus-one equivariant surface: it solves

    (v')^2 + (v^2 - 1)(v^2 - q^2) = 0,   v(0) = 1, v'(0) = 0,

has range [min(1, q), max(1, q)] and period ``2 * elliptic_KE_comp(q).kk``.
In Abramowitz-Stegun notation this is dn(y | m) with *parameter* m = 1 - q^2;
the three properties above are what the implementation is tested against, not
the notation.

K and E are evaluated by the arithmetic-geometric mean, E via the descending
c_n sum (machine precision in ~10 iterations, no table dependence).  dn is
evaluated by the descending Landen transformation seeded from the same AGM
sequence, with a sech-based expansion once 1 - sqrt(1 - q^2) < 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NumericsError, RangeError

_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class EllipticPair:
    """A pair (K, E) of complete integrals of the first and second kind."""

    kk: float
    ee: float

    def __iter__(self):
        return iter((self.kk, self.ee))


def _agm_ke(modulus: float) -> tuple[float, float]:
    # AGM with a0 = 1, b0 = sqrt(1 - q^2); E from the descending c_n sum
    a = 1.0
    b = math.sqrt((1.0 - modulus) * (1.0 + modulus))
    c = modulus
    csum = 0.5 * c * c
    pow2 = 0.5
    for _ in range(40):
        if abs(c) < 0.5 * _EPS * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        pow2 *= 2.0
        csum += pow2 * c * c
    else:
        raise NumericsError("AGM failed to converge", best_estimate=a)
    kk = math.pi / (2.0 * a)
    return kk, kk * (1.0 - csum)


def elliptic_KE(q: float) -> EllipticPair:
    """K(q) and E(q) for modulus q in [0, 1)."""
    if not 0.0 <= q < 1.0:
        raise DomainError(f"modulus must lie in [0, 1), got {q}")
    if q == 0.0:
        return EllipticPair(math.pi / 2.0, math.pi / 2.0)
    kk, ee = _agm_ke(q)
    return EllipticPair(kk, ee)


def elliptic_KE_comp(q: float) -> EllipticPair:
    """Complementary pair (K'(q), E'(q)) = (K, E) at modulus sqrt(1 - q^2).

    Even in q.  At q = +-1 the analytic continuation gives (pi/2, pi/2);
    at q = 0 the integral K' diverges.
    """
    q = abs(q)
    if q == 0.0:
        raise RangeError("K'(q) diverges logarithmically as q -> 0")
    if q > 1.0:
        raise DomainError(f"|q| must lie in (0, 1], got {q}")
    if q == 1.0:
        return EllipticPair(math.pi / 2.0, math.pi / 2.0)
    comp = math.sqrt((1.0 - q) * (1.0 + q))
    kk, ee = _agm_ke(comp)
    return EllipticPair(kk, ee)


def _sn_cn_dn(u, m: float):
    """Jacobi sn, cn, dn of argument u (scalar or array) and parameter m in [0, 1]."""
    u = np.asarray(u, dtype=float)
    if m == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    if m == 1.0:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech
    a, b, c = 1.0, math.sqrt(1.0 - m), math.sqrt(m)
    a_seq, c_seq = [a], [c]
    n = 0
    while abs(c) > _EPS * a:
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
        n += 1
        if n > 40:
            raise NumericsError("Landen sequence failed to converge", best_estimate=a)
    phi = (2.0**n) * a_seq[n] * u
    for k in range(n, 0, -1):
        ratio = np.clip(c_seq[k] / a_seq[k] * np.sin(phi), -1.0, 1.0)
        phi = 0.5 * (phi + np.arcsin(ratio))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(np.maximum(1.0 - m * sn * sn, 0.0))
    return sn, cn, dn


def jacobi_dn(y, q: float):
    """v(y) = dn with parameter 1 - q^2: the conformal-factor square root.

    Accepts scalar or array y.  q = 0 is handled as the explicit sech limit,
    and for 1 - sqrt(1 - q^2) < 1e-12 a sech-based expansion avoids the
    cancellation in the Landen recursion.
    """
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    if q == 0.0:
        v = 1.0 / np.cosh(y)
    elif q * q < 2e-12:
        # dn(y | m) ~ sech y + (1-m)/4 (sinh y cosh y + y) tanh y sech y
        sech = 1.0 / np.cosh(y)
        v = sech + 0.25 * q * q * (np.sinh(y) * np.cosh(y) + y) * np.tanh(y) * sech
    else:
        _, _, v = _sn_cn_dn(y, 1.0 - q * q)
    return float(v) if scalar else v


# Gauss-Kronrod 7-15 nodes and weights (positive half; node 0 first).
_XGK = (
    0.0,
    0.2077849550078985,
    0.4058451513773972,
    0.5860872354676911,
    0.7415311855993944,
    0.8648644233597691,
    0.9491079123427585,
    0.9914553711208126,
)
_WGK = (
    0.2094821410847278,
    0.2044329400752989,
    0.1903505780647854,
    0.1690047266392679,
    0.1406532597155259,
    0.1047900103222502,
    0.06309209262997855,
    0.02293532201052922,
)
_WG = (
    0.4179591836734694,
    0.3818300505051189,
    0.2797053914892767,
    0.1294849661688697,
)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    f0 = f(mid)
    gauss = _WG[0] * f0
    kron = _WGK[0] * f0
    for i in range(1, 8):
        x = half * _XGK[i]
        fs = f(mid - x) + f(mid + x)
        kron += _WGK[i] * fs
        if i % 2 == 0:
            gauss += _WG[i // 2] * fs
    kron *= half
    gauss *= half
    return kron, abs(kron - gauss)


def quad(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive Gauss-Kronrod bisection with absolute error target ``tol``.

    Raises :class:`NumericsError` (with the best estimate attached) if the
    interval budget is exhausted before the error bound is met.
    """
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    if a == b:
        return 0.0
    val, err = _gk15(f, a, b)
    stack = [(a, b, val, err)]
    total = val
    total_err = err
    for _ in range(4000):
        if total_err <= tol:
            return total
        stack.sort(key=lambda seg: seg[3])
        a0, b0, v0, e0 = stack.pop()
        m0 = 0.5 * (a0 + b0)
        vl, el = _gk15(f, a0, m0)
        vr, er = _gk15(f, m0, b0)
        total += vl + vr - v0
        total_err += el + er - e0
        stack.append((a0, m0, vl, el))
        stack.append((m0, b0, vr, er))
    raise NumericsError(
        f"quadrature error {total_err:.3e} above tol {tol:.3e}", best_estimate=total
    )
