"""The moduli graph of equivariant tori: triple moves and connectivity.

Vertices are flat tori with a double point, labeled by triples
(l0, l1, l2); edges are flat families and genus-one families.  Three moves
act on triples:

    1: (l0, l1, l2) -> (l1 + l2 - l0, l1, l2)        genus-one edge
    2: (l0, l1, l2) -> (l0, l2 - l0, l0 + l1)        needs 0 < l1, l2 < 2 l0
    3: (l0, l1, l2) -> (2 l0, l1, 2 l2)              needs l1 odd

together with the lattice-preserving shift l2 -> l2 + k l0.  Reduction to the
rotational or product-lattice base strictly decreases l1 each round, and every
co-finite sublattice of the base lattice connects to it by index-decreasing
isogeny steps; `connectivity_check` certifies this at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError, MoveError
from .genus0 import Triple, triple_sublattices

MOVE_GENUS_ONE = "1"
MOVE_FLAT_EDGE = "2"
MOVE_DOUBLE = "3"
MOVE_SHIFT = "shift"


@dataclass(frozen=True)
class Move:
    kind: str
    before: Triple
    after: Triple
    arg: int = 0  # shift multiple, if any


@dataclass
class MoveSequence:
    """Ordered moves; composition maps the first triple to the last."""

    steps: list[Move] = field(default_factory=list)

    @property
    def start(self) -> Optional[Triple]:
        return self.steps[0].before if self.steps else None

    @property
    def end(self) -> Optional[Triple]:
        return self.steps[-1].after if self.steps else None

    def push(self, kind: str, before: Triple, after: Triple, arg: int = 0):
        if self.steps and self.steps[-1].after != before:
            raise DomainError("move sequence must be composable")
        self.steps.append(Move(kind, before, after, arg))

    def to_jsonable(self) -> list[dict]:
        return [
            {"move": m.kind, "before": str(m.before), "after": str(m.after)}
            for m in self.steps
        ]


def apply_move(t: Triple, which: str) -> Triple:
    """Apply move 1, 2 or 3; raises :class:`MoveError` off the precondition."""
    if which == MOVE_GENUS_ONE:
        return t.involute()
    if which == MOVE_FLAT_EDGE:
        if not (0 < t.l1 and t.l2 < 2 * t.l0):
            raise MoveError(f"move 2 needs 0 < l1 and l2 < 2 l0, got {t}")
        return Triple(t.l0, t.l2 - t.l0, t.l0 + t.l1)
    if which == MOVE_DOUBLE:
        if t.l1 % 2 == 0:
            raise MoveError(f"move 3 needs odd l1, got {t}")
        return Triple(2 * t.l0, t.l1, 2 * t.l2)
    raise DomainError(f"unknown move {which!r}")


def shift_l2(t: Triple, k: int) -> Triple:
    """l2 -> l2 + k l0; the four sublattices are unchanged."""
    new_l2 = t.l2 + k * t.l0
    if not new_l2 > t.l0:
        raise DomainError(f"shift by {k} leaves l2 = {new_l2} <= l0 = {t.l0}")
    return Triple(t.l0, t.l1, new_l2)


def reduce_to_base(t: Triple) -> MoveSequence:
    """Moves taking t to a base triple: l1 = 0 (rotational) or l2 = 2 l0.

    Follows the l1-reduction: shift l2 minimal, peel with move 1 when
    2 l0 > l1 + l2, then either the 2-1-2 sandwich (strict decrease of l1)
    or, when 2 l0 = l1 + l2, the parity branch through move 3 that lands
    directly on a product-lattice triple.
    """
    seq = MoveSequence()
    cur = t

    def do(kind, triple, arg=0):
        nxt = shift_l2(triple, arg) if kind == MOVE_SHIFT else apply_move(triple, kind)
        seq.push(kind, triple, nxt, arg)
        return nxt

    for _ in range(10 * (t.l1 + 2)):
        if cur.l1 == 0 or cur.l2 == 2 * cur.l0:
            return seq
        l1_before = cur.l1
        # minimal l2 in (l0, 2 l0]
        r = cur.l2 % cur.l0
        min_l2 = cur.l0 + r if r != 0 else 2 * cur.l0
        if min_l2 != cur.l2:
            cur = do(MOVE_SHIFT, cur, (min_l2 - cur.l2) // cur.l0)
        if cur.l2 == 2 * cur.l0:
            return seq
        if 2 * cur.l0 > cur.l1 + cur.l2:
            cur = do(MOVE_GENUS_ONE, cur)
            continue  # re-enter with the smaller first entry
        if 2 * cur.l0 < cur.l1 + cur.l2:
            cur = do(MOVE_FLAT_EDGE, cur)
            cur = do(MOVE_GENUS_ONE, cur)
            cur = do(MOVE_FLAT_EDGE, cur)
            if not cur.l1 < l1_before:
                raise DomainError(f"l1 failed to decrease at {cur}")
            continue
        # 2 l0 = l1 + l2: parity branches, both terminal
        if cur.l1 % 2 == 1:
            cur = do(MOVE_DOUBLE, cur)
            cur = do(MOVE_GENUS_ONE, cur)
        else:
            cur = do(MOVE_FLAT_EDGE, cur)
            cur = do(MOVE_DOUBLE, cur)
            cur = do(MOVE_GENUS_ONE, cur)
        if cur.l2 != 2 * cur.l0:
            raise DomainError(f"parity branch did not terminate at {cur}")
        return seq
    raise DomainError(f"reduction did not terminate for {t}")


@dataclass(frozen=True)
class SublatticeHNF:
    """Sublattice of Z^2 in Hermite normal form: rows (a, 0), (b, d), 0 <= b < a."""

    a: int
    b: int
    d: int

    def __post_init__(self):
        if self.a <= 0 or self.d <= 0 or not 0 <= self.b < max(self.a, 1):
            if not (self.a >= 1 and self.d >= 1 and 0 <= self.b < self.a):
                raise DomainError(f"not a Hermite normal form: {self}")

    @property
    def index(self) -> int:
        return self.a * self.d

    def generators(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return (self.a, 0), (self.b, self.d)

    def contains(self, n1: int, n2: int) -> bool:
        if n2 % self.d != 0:
            return False
        return (n1 - (n2 // self.d) * self.b) % self.a == 0


def hnf_from_generators(g1: tuple[int, int], g2: tuple[int, int]) -> SublatticeHNF:
    """Hermite normal form of the lattice spanned by integer vectors g1, g2."""
    rows = [list(g1), list(g2)]
    if rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0] == 0:
        raise DomainError("generators are collinear")
    # gcd steps on the second coordinates until one of them vanishes
    while rows[0][1] != 0 and rows[1][1] != 0:
        if abs(rows[0][1]) >= abs(rows[1][1]):
            f = rows[0][1] // rows[1][1]
            rows[0] = [rows[0][0] - f * rows[1][0], rows[0][1] - f * rows[1][1]]
        else:
            rows[0], rows[1] = rows[1], rows[0]
    if rows[0][1] != 0:
        rows[0], rows[1] = rows[1], rows[0]
    if rows[0][0] < 0:
        rows[0] = [-rows[0][0], 0]
    if rows[1][1] < 0:
        rows[1] = [-rows[1][0], -rows[1][1]]
    a_val = rows[0][0]
    d_val = rows[1][1]
    b_val = rows[1][0] % a_val
    return SublatticeHNF(a_val, b_val, d_val)


def enumerate_sublattices(max_index: int) -> list[SublatticeHNF]:
    """All sublattices of Z^2 with index <= max_index, each exactly once."""
    if max_index < 1:
        raise DomainError("max_index must be >= 1")
    out = []
    for a in range(1, max_index + 1):
        for d in range(1, max_index // a + 1):
            for b in range(a):
                out.append(SublatticeHNF(a, b, d))
    return out


def _triple_from_kernel_vector(p: int, c1: int, c2: int) -> Triple:
    """Normalized triple whose four lattices contain ker((n1,n2) -> c1 n1 + c2 n2 mod p).

    p is prime and (c1, c2) != (0, 0) mod p.  The C''/D'' freedom (negate or
    swap the coefficients) is used to put the smaller residue in the l1 slot.
    """
    u, v = c1 % p, c2 % p
    candidates = []
    for x, y in ((u, v), ((-u) % p, v), (v, u), ((-v) % p, u)):
        l1 = x
        l2 = y if y != 0 else p
        while l2 <= p:
            l2 += p
        if math.gcd(p, math.gcd(l1, l2)) == 1 and 0 <= l1 < p < l2:
            candidates.append(Triple(p, l1, l2))
    if not candidates:
        raise DomainError(f"no triple for p={p}, c=({c1},{c2})")
    return min(candidates, key=lambda t: (t.l1, t.l2))


def find_vertex_triple(sub: SublatticeHNF) -> tuple[Triple, int]:
    """A triple with l0 > 1 one of whose four lattices contains ``sub``.

    Returns (triple, which): ``which`` indexes the containing lattice among
    the four predicates of :func:`triple_sublattices`.  Input must be a
    proper sublattice (index >= 2).
    """
    if sub.index == 1:
        raise DomainError("the full lattice needs no vertex triple")
    # largest prime factor of the index gives the biggest index reduction
    n = sub.index
    p = 1
    m = n
    for f in range(2, m + 1):
        if f * f > m:
            break
        while m % f == 0:
            p = f
            m //= f
    if m > 1:
        p = m
    a, b, d = sub.a, sub.b, sub.d
    # (c1, c2) mod p annihilating both generators (a,0) and (b,d)
    if a % p == 0:
        if d % p != 0:
            c1, c2 = 1, (-b * pow(d, -1, p)) % p
        elif b % p == 0:
            c1, c2 = 1, 0
        else:
            c1, c2 = 0, 1
    else:
        c1, c2 = 0, 1  # then p | d
    triple = _triple_from_kernel_vector(p, c1, c2)
    preds = triple_sublattices(triple)
    for which, pred in enumerate(preds):
        if pred(*sub.generators()[0]) and pred(*sub.generators()[1]):
            return triple, which
    raise DomainError(f"containment certificate failed for {sub}")


def _lattice_basis_of_predicate(t: Triple, which: int) -> SublatticeHNF:
    """HNF basis of the which-th of the four lattices of a triple."""
    pred = triple_sublattices(t)[which]
    l0 = t.l0
    # kernel of a surjection Z^2 -> Z/l0: index l0; find two short generators
    gens = []
    for n1 in range(0, l0 + 1):
        for n2 in range(-l0, l0 + 1):
            if (n1, n2) == (0, 0) or not pred(n1, n2):
                continue
            gens.append((n1, n2))
    for g1 in gens:
        for g2 in gens:
            det = g1[0] * g2[1] - g1[1] * g2[0]
            if abs(det) == l0:
                return hnf_from_generators(g1, g2)
    raise DomainError(f"no basis found for lattice {which} of {t}")


def _quotient_hnf(sub: SublatticeHNF, by: SublatticeHNF) -> SublatticeHNF:
    """Coordinates of ``sub`` in the basis of ``by`` (requires containment)."""
    (a1, b1), (a2, b2) = sub.generators()
    (c1, d1), (c2, d2) = by.generators()
    det = c1 * d2 - d1 * c2
    rows = []
    for (x, y) in ((a1, b1), (a2, b2)):
        u = (x * d2 - y * c2) / det
        v = (y * c1 - x * d1) / det
        if abs(u - round(u)) > 1e-9 or abs(v - round(v)) > 1e-9:
            raise DomainError("sublattice is not contained in the target lattice")
        rows.append((round(u), round(v)))
    return hnf_from_generators(rows[0], rows[1])


@dataclass
class ReductionStep:
    lattice: SublatticeHNF
    triple: Triple
    which_lattice: int
    moves: MoveSequence
    next_lattice: SublatticeHNF


def connectivity_check(max_index: int) -> dict:
    """Certify that every sublattice of index <= max_index connects to Z^2.

    For each lattice, repeatedly find a vertex triple whose lattice contains
    it, reduce the triple to the base by moves, and pass to the isogenic
    image, whose index drops by the factor l0 > 1.  Returns a report with the
    replayable paths; raises if any step fails to reduce the index.
    """
    if max_index < 1:
        raise DomainError("max_index must be >= 1")
    report = {"maxIndex": max_index, "lattices": [], "maxPathLen": 0}
    for sub in enumerate_sublattices(max_index):
        path = []
        cur = sub
        while cur.index > 1:
            triple, which = find_vertex_triple(cur)
            moves = reduce_to_base(triple)
            containing = _lattice_basis_of_predicate(triple, which)
            nxt = _quotient_hnf(cur, containing)
            if not nxt.index < cur.index:
                raise DomainError(f"index failed to decrease at {cur}")
            path.append(
                ReductionStep(cur, triple, which, moves, nxt)
            )
            cur = nxt
        report["lattices"].append(
            {
                "hnf": [sub.a, sub.b, sub.d],
                "index": sub.index,
                "path": [
                    {
                        "triple": str(st.triple),
                        "lattice_variant": st.which_lattice,
                        "moves": st.moves.to_jsonable(),
                        "next_index": st.next_lattice.index,
                    }
                    for st in path
                ],
            }
        )
        report["maxPathLen"] = max(report["maxPathLen"], len(path))
    return report


@dataclass(frozen=True)
class ClassificationRecord:
    rotational: bool
    embedded: bool
    alexandrov: bool
    lobes: tuple[Optional[int], int]
    symmetry_cyclic_order: int
    minimal_in_family: bool
    H_range: tuple[float, float]

    def to_jsonable(self) -> dict:
        return {
            "rotational": self.rotational,
            "embedded": self.embedded,
            "alexandrov": self.alexandrov,
            "lobes": list(self.lobes),
            "symmetry_cyclic_order": self.symmetry_cyclic_order,
            "minimal_in_family": self.minimal_in_family,
            "H_range": list(self.H_range),
        }


def classify(
    t: Triple, rotational: Optional[bool] = None, singly_wrapped: Optional[bool] = None
) -> ClassificationRecord:
    """Geometric classification of the family labeled by t.

    rotational defaults to l1 == 0.  Embedded families are exactly the
    rotational ones with l0 = 1; twizzled tori are never embedded.  The
    Alexandrov predicate needs the wrapping with respect to the rotational
    period; by default the profile set on the rotation-axis side of a
    triple-labeled rotational family consists of singly wrapped circles
    (wrapping l0 / gcd(l0, l1) = 1), and callers analyzing covers may pass
    their own flag.
    """
    from .flow import bouquet_limit, endpoint_H  # local import avoids a cycle

    if rotational is None:
        rotational = t.rotational
    if rotational != t.rotational:
        raise DomainError(f"rotational flag contradicts triple {t}")
    embedded = rotational and t.l0 == 1
    if singly_wrapped is None:
        singly_wrapped = rotational  # l0 / gcd(l0, l1 = 0) = 1 wrap per circle
    alexandrov = rotational and singly_wrapped
    if rotational:
        lobes: tuple[Optional[int], int] = (None, t.l2)
        r = t.l0 / t.l2
        minimal = 0.5 < r <= 1.0 / math.sqrt(2.0)
        h_flat = endpoint_H(t)[0]
        h_bouquet = bouquet_limit(t.l0, t.l2)[1]
        h_range = (min(h_flat, h_bouquet), max(h_flat, h_bouquet))
    else:
        lobes = (t.l1, t.l2)
        minimal = math.hypot(t.l1, t.l2) >= math.sqrt(2.0) * max(
            t.l0, t.involute().l0
        )
        h0, h1 = endpoint_H(t)
        h_range = (min(h0, h1), max(h0, h1))
    return ClassificationRecord(
        rotational=rotational,
        embedded=embedded,
        alexandrov=alexandrov,
        lobes=lobes,
        symmetry_cyclic_order=math.gcd(t.l1, t.l2),
        minimal_in_family=minimal,
        H_range=h_range,
    )
