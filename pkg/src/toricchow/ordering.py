"""Admissible orderings of maximal cones.

An ordering on ``(P^1)^n`` is refined through every excluded barycentric
step of a construction (children inherit their parent's position, and
siblings are ordered by their permutations), then cones containing some
``e_i`` with ``i > r`` are moved to the front.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import HypothesisViolation, OrderingViolation
from .fan import Cone, Fan, cone_intersection, unit
from .subdivide import CarrierIndex, Construction, excluded_barycentric


@dataclass
class OrderedFan:
    fan: Fan
    order: list[Cone]  # least first
    r: int = 0

    def __post_init__(self):
        self.position = {c: k for k, c in enumerate(self.order)}
        if set(self.order) != set(self.fan.maximal_cones) or len(self.order) != len(self.fan.maximal_cones):
            raise OrderingViolation("order is not a permutation of the maximal cones")

    def less(self, a: Cone, b: Cone) -> bool:
        return self.position[a] < self.position[b]

    def neighbor(self, sigma: Cone, f) -> Cone:
        nb = self.fan.wall_neighbor(sigma, f)
        if nb is None:
            raise HypothesisViolation(f"{sigma} has no neighbour across the wall opposite {f}", sigma)
        return nb

    def ess(self, sigma: Cone) -> Cone:
        """Face of ``σ`` spanned by the rays whose wall neighbour comes earlier."""
        return sigma.face([f for f in sigma.rays if self.less(self.neighbor(sigma, f), sigma)])

    def ess_literal(self, sigma: Cone) -> Cone:
        """``σ`` intersected with every later cone sharing a wall with it."""
        out = sigma
        for f in sigma.rays:
            nb = self.neighbor(sigma, f)
            if self.less(sigma, nb):
                out = cone_intersection(out, nb)
        return out


def p1n_order(n: int, fan: Fan) -> list[Cone]:
    """Orthants sorted so that an earlier sign flip to ``-1`` makes a cone larger."""

    def signs(c):
        return tuple(sum(v[i] for v in c.rays) for i in range(n))

    return sorted(fan.maximal_cones, key=lambda c: tuple(-x for x in signs(c)))


def _sibling_key(alpha: Sequence[int]) -> tuple[int, ...]:
    return tuple(-a for a in reversed(alpha))


def refine(ordered: OrderedFan, step, carriers: CarrierIndex | None = None) -> OrderedFan:
    """Push an ordering through one excluded barycentric step."""
    fan = ordered.fan

    def labeler(sigma, a_sigma, eta):
        inner = [f for f in a_sigma.rays if f in eta.rayset]
        later = [f for f in a_sigma.rays if f not in eta.rayset and ordered.less(sigma, ordered.neighbor(sigma, f))]
        earlier = [f for f in a_sigma.rays if f not in eta.rayset and not ordered.less(sigma, ordered.neighbor(sigma, f))]
        rest = [f for f in sigma.rays if f not in a_sigma.rayset]
        return inner + later + earlier + rest, len(inner), a_sigma.dim

    result = excluded_barycentric(fan, step.eta, step.selection(fan, carriers), labeler)
    by_parent: dict[Cone, list] = {}
    for piece in result.pieces:
        by_parent.setdefault(piece.parent, []).append(piece)
    order = []
    for parent in ordered.order:
        kids = sorted(by_parent[parent], key=lambda p: _sibling_key(p.alpha))
        order.extend(p.cone for p in kids)
    return OrderedFan(result.fan, order, ordered.r)


def sigma_split(fan: Fan, r: int) -> tuple[set[Cone], set[Cone], list[Cone]]:
    """``(Σ°, Σ♭, Σ°_max)``: cones that extend by some ``e_i`` with ``i > r``, the rest,
    and the maximal cones among the former."""
    es = [unit(fan.n, i) for i in range(r + 1, fan.n + 1)]
    circ = {c for c in fan.cones() if any(fan.contains(c.with_rays(e)) for e in es)}
    flat = set(fan.cones()) - circ
    circ_max = [c for c in fan.maximal_cones if any(e in c.rayset for e in es)]
    return circ, flat, circ_max


def partition_first(ordered: OrderedFan, r: int) -> OrderedFan:
    """Stable partition putting maximal cones that contain some ``e_i`` (``i > r``) first."""
    es = {unit(ordered.fan.n, i) for i in range(r + 1, ordered.fan.n + 1)}
    front = [c for c in ordered.order if c.rayset & es]
    back = [c for c in ordered.order if not c.rayset & es]
    return OrderedFan(ordered.fan, front + back, r)


def build_admissible_ordering(construction: Construction, r: int | None = None) -> OrderedFan:
    """Replay a construction from ``(P^1)^n``, refining the ordering at each step."""
    start = construction.start
    if r is None:
        r = construction.recipe.get("r", 0)
    ordered = OrderedFan(start, p1n_order(start.n, start), r)
    carriers: dict[int, CarrierIndex] = {}
    for step in construction.steps:
        ci = None
        if step.u is not None:
            ci = carriers.setdefault(id(step.base), CarrierIndex(step.base))
        ordered = refine(ordered, step, ci)
    if ordered.fan != construction.fan:
        raise OrderingViolation("replayed construction does not reproduce the fan")
    return partition_first(ordered, r)


@dataclass
class OrderingReport:
    conditions: dict[str, bool]
    witnesses: dict[str, object] = field(default_factory=dict)

    @property
    def pre_admissible(self) -> bool:
        return all(self.conditions[k] for k in ("i", "ii", "iii", "iv", "v"))

    @property
    def admissible(self) -> bool:
        return self.pre_admissible and self.conditions["vi"]


def verify_ordering(ordered: OrderedFan, r: int | None = None, literal_ess: bool = True) -> OrderingReport:
    """Check the six ordering conditions; a witness is kept for each failure."""
    r = ordered.r if r is None else r
    fan = ordered.fan
    n = fan.n
    order = ordered.order
    ess = {s: ordered.ess(s) for s in order}
    conds: dict[str, bool] = {}
    wit: dict[str, object] = {}

    def fail(key, witness):
        if conds.get(key, True):
            conds[key] = False
            wit[key] = witness

    if literal_ess:
        for s in order:
            if ordered.ess_literal(s) != ess[s]:
                fail("ess", s)
    for key in ("i", "ii", "iii", "iv", "v", "vi"):
        conds[key] = True
    for s in order:
        for t in order:
            if s != t and ess[s].rayset <= t.rayset and not ordered.less(s, t):
                fail("i", (s, t))
    least = Cone([unit(n, i) for i in range(1, n + 1)], n, check=False)
    if order[0] != least:
        fail("ii", order[0])
    for s in order[1:]:
        if not any(ordered.less(ordered.neighbor(s, f), s) for f in s.rays):
            fail("iii", s)
    es = [unit(n, i) for i in range(r + 1, n + 1)]
    for s in order:
        for e in es:
            if e in s.rayset:
                if not ordered.less(s, ordered.neighbor(s, e)):
                    fail("iv", (s, e))
            elif fan.contains(ess[s].with_rays(e)):
                fail("v", (s, e))
    circ_max = {c for c in order if c.rayset & set(es)}
    seen_back = False
    for s in order:
        if s in circ_max and seen_back:
            fail("vi", s)
        seen_back = seen_back or s not in circ_max
    if literal_ess:
        conds.setdefault("ess", True)
    return OrderingReport(conds, wit)
