"""Flat CMC tori in the 3-sphere and their integer-triple classification.

A flat torus is framed by the vacuum frame whose eigenvalue exponent is

    log mu(z, lam) = pi i (z lam^{-1/2} + conj(z) lam^{1/2}) = 2 pi i <z, lam^{1/2}>

with <x, y> = Re(x conj(y)).  Closing along a period gamma means
log mu(gamma, lam_j) in pi i Z with even differences between the two sym
points, so the winding integers are p = 2 <gamma, lam^{1/2}>.  Consequently
lattice duality throughout this module is taken with respect to the doubled
pairing 2 <.,.>: the dual basis of (kappa1, kappa2) is then exactly the period
lattice of the underlying embedded rectangular torus (generators 1/sqrt(2) and
i/sqrt(2) for the Clifford torus), and the duality is still an involution.

Square roots of unimodular numbers are principal (half the argument in
(-pi/2, pi/2]); the sign freedom is the D' move of the triple classification
and never changes a lattice or a triple.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ClosingError, DomainError
from .spectral import best_rational


def dot(x: complex, y: complex) -> float:
    """Real pairing <x, y> = Re(x conj(y)) on C = R^2."""
    return (x * y.conjugate()).real


@dataclass(frozen=True)
class Lattice:
    """Rank-2 lattice in C with generators g1, g2 (non-collinear)."""

    g1: complex
    g2: complex

    def __post_init__(self):
        if abs(self.area()) < 1e-14:
            raise DomainError("lattice generators are collinear")

    def area(self) -> float:
        """Signed area of the fundamental parallelogram."""
        return self.g1.real * self.g2.imag - self.g1.imag * self.g2.real

    def dual(self) -> "Lattice":
        """Dual under the doubled pairing: 2 <g_i*, g_j> = delta_ij."""
        det = 2.0 * self.area()
        d1 = complex(self.g2.imag, -self.g2.real) / det
        d2 = complex(-self.g1.imag, self.g1.real) / det
        return Lattice(d1, d2)

    def coords(self, z: complex) -> tuple[float, float]:
        """Real coordinates of z in the generator basis."""
        det = self.area()
        a = (z.real * self.g2.imag - z.imag * self.g2.real) / det
        b = (z.imag * self.g1.real - z.real * self.g1.imag) / det
        return a, b

    def contains(self, z: complex, tol: float = 1e-9) -> bool:
        a, b = self.coords(z)
        return abs(a - round(a)) < tol and abs(b - round(b)) < tol


@dataclass(frozen=True, order=True)
class Triple:
    """Integer invariant (l0, l1, l2) of a flat torus with a double point.

    gcd(l0, l1, l2) = 1 and 0 <= l1 < l0 < l2.  l1 = 0 labels the rotational
    families; l1 >= 1 the twizzled ones.
    """

    l0: int
    l1: int
    l2: int

    def __post_init__(self):
        if not (0 <= self.l1 < self.l0 < self.l2):
            raise DomainError(f"triple ordering violated: {self}")
        if math.gcd(self.l0, math.gcd(self.l1, self.l2)) != 1:
            raise DomainError(f"triple not primitive: {self}")

    def involute(self) -> "Triple":
        """The flow involution (l0, l1, l2) -> (l1 + l2 - l0, l1, l2)."""
        return Triple(self.l1 + self.l2 - self.l0, self.l1, self.l2)

    @property
    def rotational(self) -> bool:
        return self.l1 == 0

    def __str__(self):
        return f"{self.l0},{self.l1},{self.l2}"

    @classmethod
    def parse(cls, text: str) -> "Triple":
        parts = [int(p) for p in text.split(",")]
        if len(parts) != 3:
            raise DomainError(f"expected 'l0,l1,l2', got {text!r}")
        return cls(*parts)


@dataclass(frozen=True)
class SpectralDataFlat:
    """Unimodular (double point, sym point, sym point), pairwise distinct."""

    lam0: complex
    lam1: complex
    lam2: complex

    def __post_init__(self):
        for lam in (self.lam0, self.lam1, self.lam2):
            if abs(abs(lam) - 1.0) > 1e-9:
                raise DomainError("spectral data must be unimodular")
        pairs = (
            (self.lam0, self.lam1),
            (self.lam0, self.lam2),
            (self.lam1, self.lam2),
        )
        if any(abs(a - b) < 1e-12 for a, b in pairs):
            raise DomainError("spectral data entries must be pairwise distinct")


def _sqrt_unimodular(lam: complex) -> complex:
    root = cmath.sqrt(lam)
    return root / abs(root)


def flat_log_mu(z: complex, lam: complex) -> complex:
    """log mu of the vacuum frame: pi i (z lam^{-1/2} + conj(z) lam^{1/2})."""
    root = _sqrt_unimodular(lam)
    return 2j * math.pi * dot(z, root)


def base_lattice(lam1: complex, lam2: complex) -> tuple[Lattice, Lattice]:
    """(Lambda, Lambda*) for sym points lam1 != lam2.

    Lambda is generated by kappa_j = (lam1^{1/2} +- lam2^{1/2}) / 2; Lambda*
    is its dual under the doubled pairing, i.e. the period lattice of the
    underlying embedded rectangular torus.
    """
    if abs(lam1 - lam2) < 1e-12:
        raise DomainError("sym points must be distinct")
    r1, r2 = _sqrt_unimodular(lam1), _sqrt_unimodular(lam2)
    kappa1 = 0.5 * (r1 + r2)
    kappa2 = 0.5 * (r1 - r2)
    lam = Lattice(kappa1, kappa2)
    return lam, lam.dual()


def periods_from_windings(
    lam1: complex,
    lam2: complex,
    p11: int,
    p12: int,
    p21: int,
    p22: int,
) -> tuple[complex, complex]:
    """Periods gamma_j solving log mu(gamma_j, lam_k) = pi i p_jk."""
    if abs(lam1 - lam2) < 1e-12:
        raise DomainError("sym points must be distinct")
    r1, r2 = _sqrt_unimodular(lam1), _sqrt_unimodular(lam2)
    den = lam2 - lam1
    g1 = (r1 * lam2 * p11 - lam1 * r2 * p12) / den
    g2 = (r1 * lam2 * p21 - lam1 * r2 * p22) / den
    if abs(g1.real * g2.imag - g1.imag * g2.real) < 1e-12:
        raise DomainError("windings give collinear periods")
    return g1, g2


def clifford_family(t: float) -> tuple[float, float]:
    """The flat family through the Clifford torus: h = -tanh t, H = -sinh t."""
    return -math.tanh(t), -math.sinh(t)


def tau(s: tuple[int, int, int]) -> int:
    """tau(s) = (s0^2 - (s1-s2)^2)(s0^2 - (s1+s2)^2); negative on valid data."""
    s0, s1, s2 = s
    return (s0 * s0 - (s1 - s2) ** 2) * (s0 * s0 - (s1 + s2) ** 2)


def s_vector(sd: SpectralDataFlat, tol: float = 1e-9) -> tuple[int, int, int]:
    """Integer double-point vector s = i m x conj(m), m = square roots of sd.

    Returned with the normalization gcd(s0, s1+s2, s1-s2) = 2 (all three
    even).  Raises :class:`ClosingError` when the cross product has no
    rational ratios below the tolerance, i.e. the data does not belong to a
    closed torus.
    """
    m = [_sqrt_unimodular(lam) for lam in (sd.lam0, sd.lam1, sd.lam2)]
    conj = [v.conjugate() for v in m]
    raw = (
        (1j * (m[1] * conj[2] - m[2] * conj[1])).real,
        (1j * (m[2] * conj[0] - m[0] * conj[2])).real,
        (1j * (m[0] * conj[1] - m[1] * conj[0])).real,
    )
    scale = max(abs(v) for v in raw)
    if scale < 1e-12:
        raise ClosingError("degenerate spectral data: zero cross product")
    pivot = max(range(3), key=lambda i: abs(raw[i]))
    nums, dens = [0, 0, 0], [1, 1, 1]
    for i in range(3):
        nums[i], dens[i] = best_rational(raw[i] / raw[pivot], tol, max_den=10**6)
    lcm = math.lcm(*dens)
    ints = [nums[i] * (lcm // dens[i]) for i in range(3)]
    g = math.gcd(math.gcd(ints[0], ints[1]), ints[2])
    ints = [v // g for v in ints]
    s0, s1, s2 = ints
    g2 = math.gcd(math.gcd(abs(s0), abs(s1 + s2)), abs(s1 - s2))
    if g2 == 1:
        s0, s1, s2 = 2 * s0, 2 * s1, 2 * s2
    return s0, s1, s2


def triple_from_spectral(sd: SpectralDataFlat, tol: float = 1e-9) -> Triple:
    """The triple (|s0|, min|s1 +- s2|, max|s1 +- s2|) / 2 of flat data."""
    s = s_vector(sd, tol)
    if tau(s) >= 0:
        raise DomainError("data lies in the coincidence set (tau >= 0)")
    s0, s1, s2 = s
    lo, hi = sorted((abs(s1 + s2), abs(s1 - s2)))
    return Triple(abs(s0) // 2, lo // 2, hi // 2)


def spectral_from_triple(t: Triple) -> SpectralDataFlat:
    """Spectral data with lam0 = 1 realizing the triple.

    Uses s = (2 l0, l1 + l2, l1 - l2); the two sym-point roots are the
    conjugate pair making s . (roots) = 0, re-normalized to unit modulus.
    """
    s0, s1, s2 = 2 * t.l0, t.l1 + t.l2, t.l1 - t.l2
    disc = tau((s0, s1, s2))
    if disc >= 0:
        raise DomainError(f"triple {t} has tau >= 0")
    root = 1j * math.sqrt(float(-disc))
    m1 = (-s0 * s0 - s1 * s1 + s2 * s2 + root) / (2 * s0 * s1)
    m2 = (-s0 * s0 + s1 * s1 - s2 * s2 - root) / (2 * s0 * s2)
    m1 /= abs(m1)
    m2 /= abs(m2)
    residual = abs(s0 + s1 * m1 + s2 * m2)
    if residual > 1e-9:
        raise ClosingError(f"sym-point solve failed, residual {residual:.2e}")
    return SpectralDataFlat(1.0 + 0j, m1 * m1, m2 * m2)


def triple_sublattices(t: Triple):
    """Membership predicates on (n1, n2) for the four lattices of a triple.

    The plain lattice is {n1 l1 + n2 l2 = 0 mod l0}; the other three are its
    images under C'' (negate n2) and D'' (swap n1, n2).  Each has index l0
    in the coefficient lattice Z^2.
    """
    l0, l1, l2 = t.l0, t.l1, t.l2

    def plain(n1: int, n2: int) -> bool:
        return (n1 * l1 + n2 * l2) % l0 == 0

    def c_image(n1: int, n2: int) -> bool:
        return plain(n1, -n2)

    def d_image(n1: int, n2: int) -> bool:
        return plain(n2, n1)

    def dc_image(n1: int, n2: int) -> bool:
        return plain(n2, -n1)

    return plain, c_image, d_image, dc_image
