"""Explicit synthesis of equivariant tori: frames, meshes, profile curves.

The extended frame of a genus-one equivariant surface at spectral parameter
lam = exp(2 i theta) is, in unit-quaternion form (a + b j),

    F(x, y) = exp(i A) exp(j B) exp(i C),
    A = x nu + chi0(y)/2,  B = chi1(y)/2,  C = chi2(y)/2,

with v = dn(y; 1 - q^2) and

    X1 = lam v - q / v,             chi2 = arg X1 (continuous: Im X1 = v sin 2theta
    cos chi1 = -v' / (2 nu v),              never changes sign),
    chi0(y) = -4 nu q sin(2 theta) * int_0^y dt / |X1(t)|^2.

The immersion is f = F_{lam1} F_{lam2}^{-1}; writing F_k = a_k + b_k j,

    f1 = a1 conj(a2) + b1 conj(b2),  f2 = b1 a2 - a1 b2,

and (Re f1, Im f1, Re f2, Im f2) is the point of S^3 in R^4.  One dn-period
advances chi0 by chi0(2 K') = -2 pi omega(theta; q) in the orientation of
:mod:`cmctori.spectral`, so frame monodromy along gamma = x pi + 2 i p K' is
exp(pi (x nu - p omega) e0): the winding solve uses omega with that sign.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .elliptic import _sn_cn_dn, elliptic_KE_comp
from .errors import BranchError, ClosingError, DomainError, MeshError
from .flow import FlowState
from .genus0 import Triple, periods_from_windings
from .spectral import SymPoints, nu_circle, nu_omega, sym_to_coords


# ---------------------------------------------------------------------------
# frame data


def _v_parts(y, q: float):
    """(v, v') of the conformal-factor square root, vectorized."""
    y = np.asarray(y, dtype=float)
    m = 1.0 - q * q
    sn, cn, dn = _sn_cn_dn(y, m)
    return dn, -m * sn * cn


@dataclass(frozen=True)
class FrameSample:
    """Pointwise frame data at one sym point."""

    y: float
    v: float
    chi0: float
    chi1: float
    chi2: float
    x1c: complex
    x2c: complex
    j1: complex
    j2: complex


class FrameTable:
    """Precomputed frame quantities for one sym point of one surface.

    chi0 is accumulated by cumulative Simpson on a uniform grid over one
    period and evaluated by cubic Hermite interpolation with the exact
    integrand as slope; everything else is closed form.
    """

    def __init__(self, q: float, theta: float, nodes: int = 8192):
        if not 0.0 < q <= 1.0:
            raise DomainError(f"q must lie in (0, 1], got {q}")
        self.q = q
        self.theta = theta
        self.lam = complex(math.cos(2 * theta), math.sin(2 * theta))
        self.nu = nu_circle(theta, q)
        self.period = 2.0 * elliptic_KE_comp(q).kk
        s2t = math.sin(2 * theta)
        # a sym point on the cut (lam = 1) pinches the Euler-angle chart;
        # there the frame is exp(-x nu e2) exp(G(y) e1), G' = (v + q/v)/2,
        # and G advances by exactly pi per period
        self.at_cut = abs(s2t) < 1e-10 and math.cos(2 * theta) > 0.0 and q < 1.0
        if not self.at_cut and 0.0 < abs(s2t) < 0.01 and q < 1.0:
            nodes = min(max(nodes, int(64.0 / abs(s2t))), 1 << 18)
        ts = np.linspace(0.0, self.period, nodes + 1)
        if self.at_cut:
            v, _ = _v_parts(ts, q)
            w = 0.5 * (v + q / v)
        else:
            w = self._chi0_prime(ts)
        h = self.period / nodes
        self._nodes = ts
        self._slopes = w
        self._cum = _cumulative_simpson(w, h)
        self.chi0_period = float(self._cum[-1])
        if self.at_cut and abs(self.chi0_period - math.pi) > 1e-9:
            raise DomainError("cut-frame period integral is off pi")

    def _chi0_prime(self, y):
        v, _ = _v_parts(y, self.q)
        x1sq = v * v - 2.0 * self.q * math.cos(2 * self.theta) + (self.q / v) ** 2
        return -4.0 * self.nu * self.q * math.sin(2 * self.theta) / x1sq

    def chi0(self, y):
        y = np.asarray(y, dtype=float)
        wraps = np.floor(y / self.period)
        frac = y - wraps * self.period
        h = self._nodes[1] - self._nodes[0]
        idx = np.minimum((frac / h).astype(int), len(self._nodes) - 2)
        s = (frac - self._nodes[idx]) / h
        c0, c1 = self._cum[idx], self._cum[idx + 1]
        w0, w1 = self._slopes[idx], self._slopes[idx + 1]
        val = (
            (1 + 2 * s) * (1 - s) ** 2 * c0
            + s * (1 - s) ** 2 * h * w0
            + s * s * (3 - 2 * s) * c1
            + s * s * (s - 1) * h * w1
        )
        return val + wraps * self.chi0_period

    def angles(self, y):
        """(A-part chi0, chi1, chi2, v, v') at y (arrays ok).

        chi1 is taken in [-pi, 0] so that sin chi1 = -|X1|/(2 nu), matching
        the frame equations; chi2 = arg X1 is continuous because Im X1 =
        v sin(2 theta) never changes sign.  Undefined on the cut.
        """
        if self.at_cut:
            raise BranchError("Euler angles degenerate for a sym point on the cut")
        v, vp = _v_parts(y, self.q)
        x1 = self.lam * v - self.q / v
        chi2 = np.angle(x1)
        cos_chi1 = np.clip(-vp / (2.0 * self.nu * v), -1.0, 1.0)
        chi1 = -np.arccos(cos_chi1)
        return self.chi0(y), chi1, chi2, v, vp

    def frame(self, x, y):
        """Quaternion components (a, b) of the extended frame at (x, y)."""
        if self.at_cut:
            g = self.chi0(y)  # the cumulative table holds G in this chart
            p = -np.asarray(x, dtype=float) * self.nu
            return (
                np.cos(p) * np.cos(g) - 1j * np.sin(p) * np.sin(g),
                np.cos(p) * np.sin(g) + 1j * np.sin(p) * np.cos(g),
            )
        chi0, chi1, chi2, _, _ = self.angles(y)
        big_a = np.asarray(x, dtype=float) * self.nu + 0.5 * chi0
        b_half = 0.5 * chi1
        c_half = 0.5 * chi2
        return (
            np.cos(b_half) * np.exp(1j * (big_a + c_half)),
            np.sin(b_half) * np.exp(1j * (big_a - c_half)),
        )


def _cumulative_simpson(w: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of samples w on a uniform grid of spacing h."""
    n = len(w)
    out = np.zeros(n)
    # odd nodes by the 3-point Newton-Cotes, even nodes by Simpson pairs
    for k in range(1, n):
        if k % 2 == 0:
            out[k] = out[k - 2] + h / 3.0 * (w[k - 2] + 4.0 * w[k - 1] + w[k])
        else:
            out[k] = out[k - 1] + h / 12.0 * (
                5.0 * w[k - 1] + 8.0 * w[k] - w[min(k + 1, n - 1)]
            )
    return out


def frame_angles(y: float, theta: float, q: float) -> FrameSample:
    """Pointwise frame data at lam = exp(2 i theta); chi0 by quadrature.

    Raises :class:`BranchError` for a sym point on the cut, where the
    Euler-angle chart pinches and finer sampling cannot resolve it.
    """
    table = FrameTable(q, theta, nodes=2048)
    chi0, chi1, chi2, v, _ = (float(np.asarray(t)) for t in table.angles(y))
    lam = table.lam
    x1 = lam * v - q / v
    x2 = v / lam - q / v
    return FrameSample(
        y=y,
        v=v,
        chi0=chi0,
        chi1=chi1,
        chi2=chi2,
        x1c=x1,
        x2c=x2,
        j1=-q / (v * x1),
        j2=-q / (v * x2),
    )


# ---------------------------------------------------------------------------
# immersions and meshes


def _immersion_arrays(x, y, table1: FrameTable, table2: FrameTable):
    a1, b1 = table1.frame(x, y)
    a2, b2 = table2.frame(x, y)
    f1 = a1 * np.conj(a2) + b1 * np.conj(b2)
    f2 = b1 * a2 - a1 * b2
    return f1, f2


def _to_r4(f1, f2):
    return np.stack([f1.real, f1.imag, f2.real, f2.imag], axis=-1)


def immersion(x: float, y: float, q: float, sp: SymPoints) -> np.ndarray:
    """The unit point f(x + i y) in R^4 (quaternion coordinates 1, i, j, k)."""
    t1, t2 = FrameTable(q, sp.theta1), FrameTable(q, sp.theta2)
    f1, f2 = _immersion_arrays(x, y, t1, t2)
    return _to_r4(f1, f2).reshape(4)


def _integer_kernel(s: Sequence[int]):
    """Basis of the rank-2 lattice {p in Z^3 : s . p = 0}."""
    a, b, c = (int(v) for v in s)
    if (a, b, c) == (0, 0, 0):
        raise DomainError("s must be nonzero")
    g = math.gcd(b, c)
    if g == 0:
        return (0, 1, 0), (0, 0, 1)
    e1 = (0, c // g, -b // g)
    # extended gcd: u b + v c = g
    u, v = _ext_gcd(b, c)
    ga = math.gcd(a, g)
    p0 = g // ga
    t = -(a * p0) // g
    e2 = (p0, t * u, t * v)
    return e1, e2


def _winding_lattice(s: Sequence[int]):
    """Kernel basis restricted to matching monodromy signs, p1 = p2 mod 2.

    Both monodromies along a period must be the same sign of the identity,
    so only winding rows with even p1 + p2 close the surface.
    """
    e1, e2 = _integer_kernel(s)
    par1 = (e1[1] + e1[2]) % 2
    par2 = (e2[1] + e2[2]) % 2
    if par1 == 0 and par2 == 0:
        return e1, e2
    if par1 == 0:
        return e1, tuple(2 * v for v in e2)
    if par2 == 0:
        return tuple(2 * v for v in e1), e2
    return tuple(a + b for a, b in zip(e1, e2)), tuple(2 * v for v in e2)


def _ext_gcd(b: int, c: int) -> tuple[int, int]:
    old_r, r = b, c
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s = s, old_s - qt * s
        old_t, t = t, old_t - qt * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


def periods_for_mesh(
    q: float, sp: SymPoints, s: Sequence[int], tol: float = 1e-8
):
    """Periods and windings of the closed surface with closing vector s.

    Solves p_jk = x_j nu_k + p_j0 omega~_k over an integer basis of the
    kernel of s (omega~ = -omega is the frame-monodromy orientation), checks
    the solve against the second sym point, and returns
    (gamma1, gamma2, windings, (x1, x2)).
    """
    vals = nu_omega(q, sp)
    w1t, w2t = -vals.omega1, -vals.omega2
    # the kernel condition uses the monodromy orientation: flip s0
    e1, e2 = _winding_lattice((-s[0], s[1], s[2]))
    xs = []
    rows = []
    for p in (e1, e2):
        x = (p[1] - p[0] * w1t) / vals.nu1
        mismatch = abs(p[2] - (x * vals.nu2 + p[0] * w2t))
        if mismatch > tol:
            raise ClosingError(
                f"winding solve inconsistent at second sym point: {mismatch:.2e}"
            )
        xs.append(x)
        rows.append(p)
    kkc = elliptic_KE_comp(q).kk
    g1 = xs[0] * math.pi + 2j * rows[0][0] * kkc
    g2 = xs[1] * math.pi + 2j * rows[1][0] * kkc
    if abs(g1.real * g2.imag - g1.imag * g2.real) < 1e-12:
        raise ClosingError("periods are collinear")
    return g1, g2, (tuple(rows[0]), tuple(rows[1])), (xs[0], xs[1])


@dataclass
class SurfaceMesh:
    """Quad mesh of a torus in S^3 with periodic identification."""

    nx: int
    ny: int
    vertices4: np.ndarray  # (nx * ny, 4), unit vectors
    faces: np.ndarray  # (nx * ny, 4) quad indices
    projected: np.ndarray  # (nx * ny, 3) stereographic image
    meta: dict = field(default_factory=dict)
    closure_defect: float = 0.0

    def vertex_grid(self) -> np.ndarray:
        return self.vertices4.reshape(self.nx, self.ny, 4)


def _auto_pole(vertices4: np.ndarray, preferred=(-1.0, 0.0, 0.0, 0.0)):
    pole = np.asarray(preferred)
    d = np.min(np.linalg.norm(vertices4 - pole, axis=-1))
    if d > 1e-3:
        return pole
    best, best_d = pole, d
    rng = [-1.0, -0.5, 0.0, 0.5, 1.0]
    for w in rng:
        for x in rng:
            for y in rng:
                for z in rng:
                    cand = np.array([w, x, y, z])
                    n = np.linalg.norm(cand)
                    if n < 1e-9:
                        continue
                    cand /= n
                    dc = np.min(np.linalg.norm(vertices4 - cand, axis=-1))
                    if dc > best_d:
                        best, best_d = cand, dc
    return best


def stereographic(p: np.ndarray, pole: np.ndarray) -> np.ndarray:
    """Stereographic projection of unit vectors from the given unit pole.

    Works in any dimension; the image is expressed in a deterministic
    orthonormal basis of the pole's orthogonal complement.
    """
    p = np.asarray(p, dtype=float)
    pole = np.asarray(pole, dtype=float)
    dim = pole.shape[0]
    denom = 1.0 - p @ pole if p.ndim == 1 else 1.0 - p @ pole
    if np.any(np.abs(denom) < 1e-12):
        raise DomainError("stereographic projection undefined at the pole")
    basis = _pole_basis(pole)
    scaled = p / denom[..., None] if p.ndim > 1 else p / denom
    return scaled @ basis.T


def stereographic_inverse(u: np.ndarray, pole: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    pole = np.asarray(pole, dtype=float)
    basis = _pole_basis(pole)
    w = u @ basis
    n2 = np.sum(u * u, axis=-1)
    return ((n2 - 1.0)[..., None] * pole + 2.0 * w) / (n2 + 1.0)[..., None]


def _pole_basis(pole: np.ndarray) -> np.ndarray:
    dim = pole.shape[0]
    vecs = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        v = e - (e @ pole) * pole
        for u in vecs:
            v = v - (v @ u) * u
        n = np.linalg.norm(v)
        if n > 1e-6:
            vecs.append(v / n)
        if len(vecs) == dim - 1:
            break
    return np.array(vecs)


def build_mesh(
    state,
    resolution: tuple[int, int] = (256, 256),
    s: Optional[Sequence[int]] = None,
    triple: Optional[Triple] = None,
    closure_tol: float = 1e-6,
) -> SurfaceMesh:
    """Mesh of the closed torus at a flow state (genus one) or a flat datum.

    ``state`` is a :class:`~cmctori.flow.FlowState` together with the closing
    vector ``s`` of its family, a :class:`~cmctori.genus0.Triple` (meshed at
    its q = 1 start vertex), or a pair (lam1, lam2) of sym points with
    optional integer windings in ``s`` (defaults to the embedded
    (1, 1, 1, -1)) for a flat torus.  The fundamental domain spanned by the
    two periods is sampled on an (nx, ny) grid; meshes violating the closure
    check are rejected.
    """
    nx, ny = resolution
    if isinstance(state, Triple):
        from .flow import FlowState as _FS, _closing_vector, flat_endpoint
        from .spectral import ModuliPoint

        triple = state
        _, k, h, sp = flat_endpoint(state, "start")
        s = _closing_vector(state, sp.theta1, sp.theta2)
        state = _FS(0.0, ModuliPoint(1.0, k, h), sp, 0.0)
    if isinstance(state, FlowState):
        if s is None:
            raise DomainError("genus-one meshes need the closing vector s")
        q = state.point.q
        sp = state.sp
        g1, g2, windings, xs = periods_for_mesh(q, sp, s)
        t1, t2 = FrameTable(q, sp.theta1), FrameTable(q, sp.theta2)

        def sample(zs):
            return _immersion_arrays(zs.real, zs.imag, t1, t2)

        meta = {
            "q": q,
            "theta1": sp.theta1,
            "theta2": sp.theta2,
            "triple": str(triple) if triple else None,
            "windings": [list(w) for w in windings],
        }
    else:
        lam1, lam2 = state
        p = tuple(s) if s is not None else (1, 1, 1, -1)
        gf1, gf2 = periods_from_windings(lam1, lam2, *p)
        # map the flat-gauge periods into the vacuum-frame coordinates, where
        # the extended action is diagonal: the vacuum phase x sin t - y cos t
        # equals the flat 2 pi <z_f, e^(it)> exactly when z = -2 pi i z_f
        g1 = -2j * math.pi * gf1
        g2 = -2j * math.pi * gf2
        th1 = (np.angle(lam1) / 2) % math.pi
        th2 = (np.angle(lam2) / 2) % math.pi
        t1, t2 = FrameTable(1.0, th1), FrameTable(1.0, th2)
        meta = {
            "q": 1.0,
            "theta1": th1,
            "theta2": th2,
            "triple": str(triple) if triple else None,
            "windings": list(p),
        }

        def sample(zs):
            return _immersion_arrays(zs.real, zs.imag, t1, t2)

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    zs = (ii / nx) * g1 + (jj / ny) * g2
    f1, f2 = sample(zs)
    verts = _to_r4(f1, f2).reshape(-1, 4)
    norms = np.linalg.norm(verts, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-10:
        raise MeshError(f"vertices off S^3 by {np.max(np.abs(norms - 1.0)):.2e}")

    # closure check on boundary strips
    probes = np.linspace(0.0, 1.0, 33)
    defect = 0.0
    for gamma, along in ((g1, g2), (g2, g1)):
        base = probes * along
        a = _to_r4(*sample(base))
        b = _to_r4(*sample(base + gamma))
        defect = max(defect, float(np.max(np.linalg.norm(a - b, axis=-1))))
    if defect > closure_tol:
        raise MeshError(f"mesh closure defect {defect:.3e} exceeds {closure_tol:.1e}")

    idx = (ii * ny + jj).reshape(nx, ny)
    faces = np.stack(
        [
            idx,
            np.roll(idx, -1, axis=0),
            np.roll(np.roll(idx, -1, axis=0), -1, axis=1),
            np.roll(idx, -1, axis=1),
        ],
        axis=-1,
    ).reshape(-1, 4)
    pole = _auto_pole(verts)
    projected = stereographic(verts, pole)
    meta["pole"] = [float(v) for v in pole]
    return SurfaceMesh(
        nx=nx,
        ny=ny,
        vertices4=verts,
        faces=faces,
        projected=projected,
        meta=meta,
        closure_defect=defect,
    )


def _flat_frame(zs, lam: complex):
    """Quaternion components of the flat extended frame.

    The exponent is pi i [[0, u], [w, 0]] with u = z/lam + conj z and
    w = lam u = conj(u), so the eigen-exponent s = sqrt(u w) = |u| is real
    (s = |2 <z, lam^(1/2)>|) and only even functions of s appear:

        F = cos(pi s) + i sin(pi s)/s * u ... as a + b j with
        a = cos(pi s),  b = i sin(pi s)/s * u.
    """
    u = zs / lam + np.conj(zs)
    s = np.abs(u)
    a = np.cos(math.pi * s) + 0j
    sinc = np.where(s > 1e-14, np.sin(math.pi * s) / np.where(s > 0, s, 1.0), math.pi)
    b = 1j * sinc * u
    return a, b


def _flat_immersion(zs, lam1: complex, lam2: complex):
    a1, b1 = _flat_frame(zs, lam1)
    a2, b2 = _flat_frame(zs, lam2)
    f1 = a1 * np.conj(a2) + b1 * np.conj(b2)
    f2 = b1 * a2 - a1 * b2
    return f1, f2


# ---------------------------------------------------------------------------
# profile curves


@dataclass
class ProfileCurve:
    points: np.ndarray  # (n, 2) planar stereographic image
    closed: bool
    turning: int
    sphere_points: Optional[np.ndarray] = None  # (n, 3) on the geodesic 2-sphere


def turning_number(curve) -> int:
    """Unsigned degree of the tangent direction of a closed polyline."""
    pts = np.asarray(getattr(curve, "points", curve))
    tangents = np.diff(pts, axis=0)
    lengths = np.linalg.norm(tangents, axis=1)
    keep = lengths > 1e-12 * np.max(lengths)
    tangents = tangents[keep]
    if len(tangents) < 3:
        raise DomainError("polyline too degenerate for a turning number")
    ang = np.arctan2(tangents[:, 1], tangents[:, 0])
    turns = np.diff(np.concatenate([ang, ang[:1]]))
    turns = (turns + math.pi) % (2.0 * math.pi) - math.pi
    total = float(np.sum(turns) / (2.0 * math.pi))
    nearest = round(total)
    if abs(total - nearest) > 0.2:
        raise DomainError(f"tangent winding {total:.3f} is not near an integer")
    return abs(nearest)


def profile_rotational(y: float, q: float, theta1: float):
    """(point in R^4, psi', kappa) of the rotational profile curve at y.

    The curve is f0 = exp(i chi0)(g1 + i g2) + g0 k; psi' is the derivative
    of the angle of the orthographic plane projection, kappa its curvature
    (strictly positive for q in (0, 1]).
    """
    if not 0.0 < q <= 1.0:
        raise DomainError(f"q must lie in (0, 1], got {q}")
    table = FrameTable(q, theta1, nodes=2048)
    nu = table.nu
    chi0 = float(np.asarray(table.chi0(y)))
    v, vp = (float(np.asarray(t)) for t in _v_parts(y, q))
    s2t, c2t = math.sin(2 * theta1), math.cos(2 * theta1)
    csq = v * v - 2.0 * q * c2t + (q / v) ** 2
    if csq <= 0.0:
        raise DomainError("degenerate profile normalization")
    c = math.sqrt(csq)
    g0 = 0.5 * v * s2t / nu
    g1 = (v * c2t - q / v) / c
    # sign fixed against the frame product F1 F2^-1 at x = 0, whose complex
    # part is exp(i chi0)(cos chi2 + i cos chi1 sin chi2) = exp(i chi0)(g1 + i g2)
    g2 = -0.5 * vp * s2t / (nu * c)
    w = complex(g1, g2) * complex(math.cos(chi0), math.sin(chi0))
    point = np.array([w.real, w.imag, 0.0, g0])
    # closed form of chi0' + arg(g1 + i g2)', in this library's chi0
    # orientation (the opposite-sign convention also closes the identities)
    psi_prime = (
        -2.0 * nu * s2t * (v * v * c2t - q) / (v * v * s2t * s2t - 4.0 * nu * nu)
    )
    kappa = 8.0 * nu * nu * q / (c**3 * v)
    return point, psi_prime, kappa


def rotational_profile_curve(l0: int, l2: int, q: float, samples_per_lobe: int = 200):
    """Closed rotational profile polyline for the (l0, l2) family at modulus q.

    theta1 solves omega(theta1; q) = l0/l2 (the conserved closing value);
    the curve closes after l2 dn-periods.
    """
    from .spectral import omega_circle

    if not (1 <= l0 < l2 and math.gcd(l0, l2) == 1):
        raise DomainError(f"need coprime 1 <= l0 < l2, got ({l0}, {l2})")
    target = l0 / l2
    lo, hi = 1e-9, math.pi / 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if omega_circle(mid, q) > target:
            lo = mid
        else:
            hi = mid
    theta1 = 0.5 * (lo + hi)
    period = 2.0 * elliptic_KE_comp(q).kk
    ys = np.linspace(0.0, l2 * period, l2 * samples_per_lobe, endpoint=False)
    table = FrameTable(q, theta1)
    chi0 = table.chi0(ys)
    v, vp = _v_parts(ys, q)
    s2t, c2t = math.sin(2 * theta1), math.cos(2 * theta1)
    c = np.sqrt(v * v - 2.0 * q * c2t + (q / v) ** 2)
    g0 = 0.5 * v * s2t / table.nu
    g1 = (v * c2t - q / v) / c
    g2 = -0.5 * vp * s2t / (table.nu * c)
    w = (g1 + 1j * g2) * np.exp(1j * chi0)
    sphere = np.stack([w.real, w.imag, g0], axis=-1)
    # the curve stays in the hemisphere g0 > 0 bounded by the axis circle, so
    # its turning number is read in the conformal chart of that hemisphere:
    # stereographic projection from the antipodal axis point (0, 0, -1)
    plane = stereographic(sphere, np.array([0.0, 0.0, -1.0]))
    curve = ProfileCurve(points=plane, closed=True, turning=0)
    curve.sphere_points = sphere
    curve.turning = turning_number(curve)
    return curve, theta1


def _marching_squares_periodic(values: np.ndarray):
    """Zero contours of a doubly periodic scalar grid; returns index loops.

    Each loop is a list of fractional grid coordinates (si, tj) in units of
    one cell; loops are closed on the torus.
    """
    nx, ny = values.shape
    segs = {}

    def interp(va, vb):
        return va / (va - vb)

    # edge keys: ('H', i, j) = edge from (i, j) to (i+1, j)
    #            ('V', i, j) = edge from (i, j) to (i, j+1)
    def edge_point(kind, i, j, frac):
        return (i + frac, j) if kind == "H" else (i, j + frac)

    cell_edges = {}
    for i in range(nx):
        for j in range(ny):
            v00 = values[i, j]
            v10 = values[(i + 1) % nx, j]
            v01 = values[i, (j + 1) % ny]
            v11 = values[(i + 1) % nx, (j + 1) % ny]
            case = (v00 > 0) | ((v10 > 0) << 1) | ((v11 > 0) << 2) | ((v01 > 0) << 3)
            if case in (0, 15):
                continue
            pts = {}
            if (v00 > 0) != (v10 > 0):
                pts["b"] = ("H", i, j, interp(v00, v10))
            if (v10 > 0) != (v11 > 0):
                pts["r"] = ("V", (i + 1) % nx, j, interp(v10, v11))
            if (v01 > 0) != (v11 > 0):
                pts["t"] = ("H", i, (j + 1) % ny, interp(v01, v11))
            if (v00 > 0) != (v01 > 0):
                pts["l"] = ("V", i, j, interp(v00, v01))
            names = sorted(pts)
            if len(names) == 2:
                links = [tuple(names)]
            elif len(names) == 4:
                center = 0.25 * (v00 + v10 + v01 + v11)
                if (center > 0) == (v00 > 0):
                    links = [("b", "r"), ("l", "t")]
                else:
                    links = [("b", "l"), ("r", "t")]
            else:
                continue
            for a, b in links:
                ka = pts[a][:3]
                kb = pts[b][:3]
                cell_edges.setdefault(ka, []).append(kb)
                cell_edges.setdefault(kb, []).append(ka)
                segs[ka] = pts[a]
                segs[kb] = pts[b]

    loops = []
    visited = set()
    budget = len(cell_edges) + 4
    for start in list(cell_edges):
        if start in visited or len(cell_edges.get(start, [])) != 2:
            continue
        loop = [start]
        visited.add(start)
        prev, cur = None, start
        closed = False
        for _ in range(budget):
            nbrs = [e for e in cell_edges[cur] if e != prev]
            if not nbrs:
                break
            nxt = nbrs[0]
            if nxt == start:
                closed = True
                break
            if nxt in visited:
                break
            loop.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        if closed:
            loops.append(loop)
    points_of = {}
    for key, (kind, i, j, frac) in segs.items():
        points_of[key] = edge_point(kind, i, j, frac)
    return [[points_of[k] for k in loop] for loop in loops if len(loop) >= 8]


def extract_profiles(
    state: FlowState,
    s: Sequence[int],
    grid: tuple[int, int] = (256, 256),
) -> list[ProfileCurve]:
    """Profile curve sets of a twizzled surface by marching squares.

    The zero sets of Re f1 and Re f2 on the torus are extracted on the
    period grid, mapped to the geodesic 2-sphere coordinates, and
    stereographically projected; each closed component carries its turning
    number.  Curves from Re f1 = 0 come first.
    """
    q, sp = state.point.q, state.sp
    g1, g2, _, _ = periods_for_mesh(q, sp, s)
    t1, t2 = FrameTable(q, sp.theta1), FrameTable(q, sp.theta2)
    nx, ny = grid
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    zs = (ii / nx) * g1 + (jj / ny) * g2
    f1, f2 = _immersion_arrays(zs.real, zs.imag, t1, t2)

    curves = []
    for which, values in (("f1", f1.real), ("f2", f2.real)):
        loops = _marching_squares_periodic(values)
        if not loops:
            raise MeshError(f"no closed Re {which} contour at this resolution")
        for loop in loops:
            frac = np.array(loop)
            z_pts = (frac[:, 0] / nx) * g1 + (frac[:, 1] / ny) * g2
            p1, p2 = _immersion_arrays(z_pts.real, z_pts.imag, t1, t2)
            if which == "f1":
                sphere = np.stack([p1.imag, p2.real, p2.imag], axis=-1)
            else:
                sphere = np.stack([p2.imag, p1.real, p1.imag], axis=-1)
            norms = np.linalg.norm(sphere, axis=-1, keepdims=True)
            sphere = sphere / norms
            # the axis meets this 2-sphere at (+-1, 0, 0); each profile loop
            # stays in one of the two hemispheres it bounds, and the turning
            # number is read in that hemisphere's conformal chart
            side = 1.0 if float(np.mean(sphere[:, 0])) >= 0.0 else -1.0
            if float(np.min(side * sphere[:, 0])) < -1e-6:
                raise MeshError("profile loop crosses the axis sphere equator")
            pole = np.array([-side, 0.0, 0.0])
            plane = stereographic(sphere, pole)
            curve = ProfileCurve(points=plane, closed=True, turning=0)
            curve.sphere_points = sphere
            curve.turning = turning_number(curve)
            curves.append(curve)
    return curves


# ---------------------------------------------------------------------------
# residual diagnostics


@dataclass(frozen=True)
class FundamentalFormSample:
    """Closed-form invariants of the immersion at a point of the family."""

    conformal_factor: float
    hopf_Q: complex
    mean_H: float


def fundamental_forms(q: float, sp: SymPoints, y: float = 0.0) -> FundamentalFormSample:
    """Closed-form first/second form data: factor (1-h^2) v^2, Hopf
    coefficient (i/4) q (1/lam2 - 1/lam1), mean curvature h / sqrt(1-h^2)."""
    _, h, H = sym_to_coords(SymPoints(sp.theta1, sp.theta2))
    v = float(np.asarray(_v_parts(y, q)[0]))
    lam1 = complex(math.cos(2 * sp.theta1), math.sin(2 * sp.theta1))
    lam2 = complex(math.cos(2 * sp.theta2), math.sin(2 * sp.theta2))
    hopf = 0.25j * q * (1.0 / lam2 - 1.0 / lam1)
    return FundamentalFormSample(
        conformal_factor=(1.0 - h * h) * v * v,
        hopf_Q=hopf,
        mean_H=H,
    )


def _cross4(u, v, w):
    """Vector orthogonal to u, v, w in R^4, oriented by the determinant."""
    out = np.zeros(u.shape[:-1] + (4,))
    idx = [0, 1, 2, 3]
    for alpha in range(4):
        rest = [i for i in idx if i != alpha]
        m = np.stack(
            [u[..., rest], v[..., rest], w[..., rest]], axis=-2
        )
        out[..., alpha] = (-1) ** alpha * np.linalg.det(m)
    return out


def fundamental_form_residuals(
    state: FlowState,
    s: Sequence[int],
    probes: int = 7,
    step: float = 3e-3,
) -> dict:
    """Max residuals of the first/second fundamental forms on probe points.

    Finite differences of the immersion are compared to the closed forms:
    conformal factor (1 - h^2) v^2, mean curvature h / sqrt(1 - h^2), Hopf
    coefficient magnitude q sqrt(1 - h^2) / 2, and the frame equations and
    monodromy of the extended frame.
    """
    q, sp = state.point.q, state.sp
    k, h, H = sym_to_coords(SymPoints(sp.theta1, sp.theta2))
    g1, g2, windings, xs = periods_for_mesh(q, sp, s)
    t1, t2 = FrameTable(q, sp.theta1), FrameTable(q, sp.theta2)

    def f_at(zs):
        return _to_r4(*_immersion_arrays(np.real(zs), np.imag(zs), t1, t2))

    uu = np.linspace(0.13, 0.87, probes)
    base = uu[:, None] * g1 + uu[None, :] * g2
    zs = base.reshape(-1)
    d = step
    fx = (8 * (f_at(zs + d) - f_at(zs - d)) - (f_at(zs + 2 * d) - f_at(zs - 2 * d))) / (
        12 * d
    )
    fy = (
        8 * (f_at(zs + 1j * d) - f_at(zs - 1j * d))
        - (f_at(zs + 2j * d) - f_at(zs - 2j * d))
    ) / (12 * d)
    f0 = f_at(zs)
    fxx = (
        -(f_at(zs + 2 * d) + f_at(zs - 2 * d))
        + 16 * (f_at(zs + d) + f_at(zs - d))
        - 30 * f0
    ) / (12 * d * d)
    fyy = (
        -(f_at(zs + 2j * d) + f_at(zs - 2j * d))
        + 16 * (f_at(zs + 1j * d) + f_at(zs - 1j * d))
        - 30 * f0
    ) / (12 * d * d)
    fxy = (
        f_at(zs + d + 1j * d)
        - f_at(zs + d - 1j * d)
        - f_at(zs - d + 1j * d)
        + f_at(zs - d - 1j * d)
    ) / (4 * d * d)

    ee = np.sum(fx * fx, axis=-1)
    gg = np.sum(fy * fy, axis=-1)
    ff = np.sum(fx * fy, axis=-1)
    scale = float(np.max(ee))
    conf_resid = max(float(np.max(np.abs(ee - gg))), float(np.max(np.abs(ff))))

    v, _ = _v_parts(np.imag(zs), q)
    factor = (1.0 - h * h) * v * v
    factor_resid = float(np.max(np.abs(ee - factor)))

    # orientation of the 4d cross product fixed so that the finite-difference
    # mean curvature reproduces h / sqrt(1 - h^2) with its sign
    normal = -_cross4(f0, fx, fy)
    normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
    L = np.sum(fxx * normal, axis=-1)
    N = np.sum(fyy * normal, axis=-1)
    M = np.sum(fxy * normal, axis=-1)
    H_fd = (L + N) / (2.0 * ee)
    H_resid = float(np.max(np.abs(H_fd - H)))
    H_fd_signed = float(np.mean(H_fd))
    # Hopf coefficient <f_zz, N> = (L - N - 2iM)/4; its magnitude matches
    # |q (1/lam2 - 1/lam1)| / 4 = q sqrt(1 - h^2) / 2
    q_fd = 0.25 * (L - N - 2j * M)
    q_mag_expected = 0.5 * q * math.sqrt(1.0 - h * h)
    hopf_resid = float(np.max(np.abs(np.abs(q_fd) - q_mag_expected)))

    frame_resid = _frame_equation_residual(q, sp, t1)
    mono_resid = _monodromy_residual(q, sp, s, t1, t2, g1, g2, windings, xs)

    return {
        "scale": scale,
        "conformality": conf_resid,
        "conformal_factor": factor_resid,
        "mean_H": H_resid,
        "mean_H_signed_fd": H_fd_signed,
        "mean_H_expected": H,
        "hopf": hopf_resid,
        "frame": frame_resid,
        "monodromy": mono_resid,
    }


def _su2(a: complex, b: complex) -> np.ndarray:
    return np.array([[a, b], [-np.conj(b), np.conj(a)]])


def _frame_matrix(table: FrameTable, x: float, y: float) -> np.ndarray:
    a, b = table.frame(np.asarray(x), np.asarray(y))
    return _su2(complex(a), complex(b))


def _frame_equation_residual(q: float, sp: SymPoints, table: FrameTable) -> float:
    """Max |F^-1 dF - Omega| over sample points, both coordinate directions."""
    lam = table.lam
    nu = table.nu
    worst = 0.0
    d = 1e-5
    for y in np.linspace(0.05, 0.95, 5) * table.period:
        for x in (0.0, 0.3):
            fm = _frame_matrix(table, x, y)
            fx = (
                8 * (_frame_matrix(table, x + d, y) - _frame_matrix(table, x - d, y))
                - (_frame_matrix(table, x + 2 * d, y) - _frame_matrix(table, x - 2 * d, y))
            ) / (12 * d)
            fy = (
                8 * (_frame_matrix(table, x, y + d) - _frame_matrix(table, x, y - d))
                - (_frame_matrix(table, x, y + 2 * d) - _frame_matrix(table, x, y - 2 * d))
            ) / (12 * d)
            v, vp = (float(np.asarray(t)) for t in _v_parts(y, q))
            x1 = lam * v - q / v
            x2 = v / lam - q / v
            e0 = np.array([[1j, 0], [0, -1j]])
            eps1 = np.array([[0, 1], [0, 0]])
            eps2 = np.array([[0, 0], [-1, 0]])
            omega_x = (-1j * (vp / v) * e0 + x2 * eps1 - x1 * eps2) / 2j
            omega_y = ((v / lam + q / v) * eps1 + (lam * v + q / v) * eps2) / 2.0
            finv = np.linalg.inv(fm)
            worst = max(worst, float(np.max(np.abs(finv @ fx - omega_x))))
            worst = max(worst, float(np.max(np.abs(finv @ fy - omega_y))))
    return worst


def _monodromy_residual(q, sp, s, t1, t2, g1, g2, windings, xs) -> float:
    """Max |F(z + gamma) -+ M F(z)| with M = exp(pi(x nu - p omega) e0)."""
    vals = nu_omega(q, sp)
    worst = 0.0
    for (gamma, x, row) in ((g1, xs[0], windings[0]), (g2, xs[1], windings[1])):
        for table, nu_k, om_k in (
            (t1, vals.nu1, vals.omega1),
            (t2, vals.nu2, vals.omega2),
        ):
            phase = math.pi * (x * nu_k - row[0] * om_k)
            m = _su2(complex(math.cos(phase), math.sin(phase)), 0.0)
            for z in (0.1 + 0.2j, 0.25 + 0.05j):
                f_a = _frame_matrix(table, (z + gamma).real, (z + gamma).imag)
                f_b = _frame_matrix(table, z.real, z.imag)
                r = min(
                    float(np.max(np.abs(f_a - m @ f_b))),
                    float(np.max(np.abs(f_a + m @ f_b))),
                )
                worst = max(worst, r)
    return worst


# ---------------------------------------------------------------------------
# export


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def _json_text(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""

    def render(o) -> str:
        if isinstance(o, dict):
            items = ",".join(f"{json.dumps(k)}:{render(v)}" for k, v in o.items())
            return "{" + items + "}"
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(render(v) for v in o) + "]"
        if isinstance(o, (np.floating, float)):
            return _fmt(float(o))
        if isinstance(o, np.ndarray):
            return render(o.tolist())
        if isinstance(o, (np.integer,)):
            return str(int(o))
        return json.dumps(o)

    return render(obj)


def export(mesh: SurfaceMesh, fmt: str, path) -> None:
    """Write the mesh as OBJ (projected R^3 quads) or JSON (full R^4)."""
    if fmt == "obj":
        lines = [f"# cmctori mesh {mesh.nx}x{mesh.ny}"]
        for p in mesh.projected:
            lines.append(f"v {_fmt(float(p[0]))} {_fmt(float(p[1]))} {_fmt(float(p[2]))}")
        for f in mesh.faces:
            lines.append("f " + " ".join(str(int(i) + 1) for i in f))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        text = _json_text(
            {
                "meta": mesh.meta,
                "nx": mesh.nx,
                "ny": mesh.ny,
                "vertices4": mesh.vertices4,
                "faces": mesh.faces.astype(int),
            }
        ) + "\n"
    else:
        raise DomainError(f"unknown export format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)


def mesh_from_json(path) -> SurfaceMesh:
    with open(path) as fh:
        data = json.load(fh)
    verts = np.array(data["vertices4"], dtype=float)
    mesh = SurfaceMesh(
        nx=data["nx"],
        ny=data["ny"],
        vertices4=verts,
        faces=np.array(data["faces"], dtype=int),
        projected=stereographic(verts, _auto_pole(verts)),
        meta=data["meta"],
    )
    return mesh
