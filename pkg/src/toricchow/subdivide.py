"""Star subdivisions, excluded barycentric subdivisions and the fans built from them.

The production route for an excluded barycentric subdivision is the closed
form indexed by t-admissible permutations; :func:`star_sequence_subdivision`
performs the same subdivision one star at a time and is kept as a check.

>>> from toricchow.fan import affine_space
>>> [c.rays for c in star_subdivision(affine_space(2), Cone([(1, 0), (0, 1)]))[0].maximal_cones]
[((0, 1), (1, 1)), ((1, 0), (1, 1))]
>>> t_admissible_permutations(2, 3)
[(1, 2, 3), (1, 3, 2), (2, 3, 1), (3, 1, 2), (3, 2, 1)]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import comb, factorial
from typing import Callable, Sequence

from .errors import InvalidSelection, NotAFace, PreconditionFailed, ToricError
from .fan import (
    Cone,
    Fan,
    Ray,
    _span_data,
    extend_from_region,
    in_negative_region,
    product_with_P1,
    projective_line_power,
    quotient_fan,
    restrict_to_region,
    unit,
)


def _vsum(vectors: Sequence[Ray], n: int) -> Ray:
    return tuple(sum(v[k] for v in vectors) for k in range(n))


def star_subdivision(fan: Fan, sigma: Cone) -> tuple[Fan, dict[Cone, list[Cone]]]:
    """Star subdivision at ``sigma`` plus the map old maximal cone -> new ones."""
    if not fan.contains(sigma):
        raise NotAFace(f"{sigma} is not a cone of the fan", sigma)
    if sigma.dim < 2:
        raise PreconditionFailed("star subdivision needs a cone of dimension at least 2", sigma)
    center = _vsum(sigma.rays, fan.n)
    out = []
    mapping = {}
    for tau in fan.maximal_cones:
        if sigma.rayset <= tau.rayset:
            pieces = [tau.without(f).with_rays(center) for f in sigma.rays]
        else:
            pieces = [tau]
        mapping[tau] = pieces
        out.extend(pieces)
    return Fan(out, fan.n, fan.axes), mapping


def is_t_admissible(alpha: Sequence[int], t: int) -> bool:
    m = len(alpha)
    if t == m:
        return tuple(alpha) == tuple(range(1, m + 1))
    c = next(i for i, a in enumerate(alpha) if a > t)
    return all(alpha[i] < alpha[i + 1] for i in range(c - 1))


def t_admissible_permutations(t: int, m: int) -> list[tuple[int, ...]]:
    """t-admissible permutations of ``{1..m}`` in lexicographic order."""
    if not 0 <= t <= m:
        raise ValueError("need 0 <= t <= m")
    return [a for a in permutations(range(1, m + 1)) if is_t_admissible(a, t)]


def count_t_admissible(t: int, m: int) -> int:
    """Closed count: choose the increasing prefix, then the first large value, then the rest."""
    if t == m:
        return 1
    return sum(comb(t, c) * (m - t) * factorial(m - c - 1) for c in range(t + 1))


def closed_form_pieces(labels: Sequence[Ray], t: int, m: int) -> list[tuple[tuple[int, ...], Cone]]:
    """Maximal cones of the excluded barycentric subdivision of ``Cone(labels)``.

    ``labels`` lists ``f_1..f_n`` where ``f_1..f_t`` span the excluded face and
    ``f_1..f_m`` span the face being subdivided.  Returns ``(α, σ_α)`` pairs.
    """
    n_amb = len(labels[0]) if labels else 0
    f = list(labels)
    out = []
    for alpha in t_admissible_permutations(t, m):
        if t == m:
            c = m
        else:
            c = next(i for i, a in enumerate(alpha) if a > t)
        rays = [f[alpha[i] - 1] for i in range(c)]
        partial = [0] * n_amb
        for i in range(m):
            v = f[alpha[i] - 1]
            partial = [a + b for a, b in zip(partial, v)]
            if i >= c:
                rays.append(tuple(partial))
        rays += f[m:]
        out.append((alpha, Cone(rays, n_amb, check=False)))
    return out


class SubfanSelection:
    """A subfan ``A`` of ``fan`` given by a membership test closed under faces.

    ``a(σ)`` is the largest cone of ``A`` inside ``σ``; for simplicial cones
    it is spanned by the rays of ``σ`` that belong to ``A``.
    """

    def __init__(self, fan: Fan, member: Callable[[Cone], bool] | None = None, maximal: Sequence[Cone] | None = None):
        self.fan = fan
        if maximal is not None:
            sets = [c.rayset for c in maximal]
            self.member = lambda c: any(c.rayset <= s for s in sets)
        elif member is not None:
            self.member = member
        else:
            self.member = lambda c: True

    @classmethod
    def whole(cls, fan: Fan) -> "SubfanSelection":
        return cls(fan)

    def a(self, sigma: Cone, eta: Cone | None = None) -> Cone:
        rays = [r for r in sigma.rays if self.member(Cone((r,), sigma.n, check=False))]
        face = Cone(rays, sigma.n, check=False)
        # a face inside the excluded cone is never subdivided, so it may stand in for a(σ)
        if not self.member(face) and not (eta is not None and face.rayset <= eta.rayset):
            raise InvalidSelection(f"no largest selected cone inside {sigma}", sigma)
        return face


@dataclass
class Piece:
    parent: Cone
    alpha: tuple[int, ...]
    labels: tuple[Ray, ...]
    t: int
    m: int
    cone: Cone


@dataclass
class BarycentricResult:
    fan: Fan
    pieces: list[Piece]

    def children(self, parent: Cone) -> list[Piece]:
        return [p for p in self.pieces if p.parent == parent]


def canonical_labels(sigma: Cone, a_sigma: Cone, eta: Cone) -> tuple[list[Ray], int, int]:
    inner = [r for r in a_sigma.rays if r in eta.rayset]
    outer = [r for r in a_sigma.rays if r not in eta.rayset]
    rest = [r for r in sigma.rays if r not in a_sigma.rayset]
    return inner + outer + rest, len(inner), a_sigma.dim


def excluded_barycentric(
    fan: Fan,
    eta: Cone,
    selection: SubfanSelection | None = None,
    labeler: Callable[[Cone, Cone, Cone], tuple[list[Ray], int, int]] | None = None,
) -> BarycentricResult:
    """Replace each maximal cone by its excluded barycentric subdivision
    relative to the largest selected face, using the closed form."""
    if selection is None:
        selection = SubfanSelection.whole(fan)
    labeler = labeler or canonical_labels
    pieces = []
    for sigma in fan.maximal_cones:
        a_sigma = selection.a(sigma, eta)
        labels, t, m = labeler(sigma, a_sigma, eta)
        for alpha, cone in closed_form_pieces(labels, t, m):
            pieces.append(Piece(sigma, alpha, tuple(labels), t, m, cone))
    return BarycentricResult(Fan([p.cone for p in pieces], fan.n, fan.axes), pieces)


def star_sequence_subdivision(fan: Fan, eta: Cone, selection: SubfanSelection | None = None) -> Fan:
    """The same subdivision as :func:`excluded_barycentric`, one star at a time,
    highest-dimensional faces first and lexicographic within a dimension."""
    if selection is None:
        selection = SubfanSelection.whole(fan)
    faces = [c for c in fan.cones() if c.dim >= 2 and selection.member(c) and not c.rayset <= eta.rayset]
    faces.sort(key=lambda c: (-c.dim, c.rays))
    for face in faces:
        fan = star_subdivision(fan, face)[0]
    return fan


class CarrierIndex:
    """Locates rays of a subdivision inside the cones of a coarser fan."""

    def __init__(self, base: Fan):
        self.base = base
        self._cache: dict[Ray, frozenset] = {}

    def support(self, v: Ray) -> frozenset:
        hit = self._cache.get(v)
        if hit is not None:
            return hit
        for c in self.base.maximal_cones:
            E, L, _ = _span_data(c.rays, c.n)
            if any(sum(a * b for a, b in zip(e, v)) for e in E):
                continue
            lam = [sum(a * b for a, b in zip(row, v)) for row in L]
            if all(x >= 0 for x in lam):
                hit = frozenset(r for r, x in zip(c.rays, lam) if x > 0)
                break
        else:
            raise ToricError(f"{v} is not in the support of the base fan", v)
        self._cache[v] = hit
        return hit

    def carrier_dim(self, cone: Cone) -> int:
        s = frozenset()
        for r in cone.rays:
            s |= self.support(r)
        return len(s)


@dataclass(frozen=True)
class Step:
    """One excluded barycentric step: the excluded cone and how ``A`` is chosen.

    ``A`` is the cones inside ``x_1..x_r <= 0`` (``region``) whose carrier in
    ``base`` has dimension at most ``u``; ``u = None`` drops the carrier test.
    """

    eta: Cone
    region: int = 0
    u: int | None = None
    base: Fan | None = None

    def selection(self, fan: Fan, carriers: CarrierIndex | None = None) -> SubfanSelection:
        r, u = self.region, self.u
        if u is None:
            return SubfanSelection(fan, lambda c: in_negative_region(c, r))
        carriers = carriers or CarrierIndex(self.base)
        return SubfanSelection(fan, lambda c: in_negative_region(c, r) and carriers.carrier_dim(c) <= u)


@dataclass
class Construction:
    """A fan together with the steps that produced it from ``start``."""

    fan: Fan
    start: Fan
    steps: list[Step] = field(default_factory=list)
    recipe: dict = field(default_factory=dict)


def run_steps(start: Fan, steps: Sequence[Step]) -> Fan:
    fan = start
    carriers: dict[int, CarrierIndex] = {}
    for step in steps:
        ci = None
        if step.u is not None:
            ci = carriers.setdefault(id(step.base), CarrierIndex(step.base))
        fan = excluded_barycentric(fan, step.eta, step.selection(fan, ci)).fan
    return fan


def sd_steps(fan: Fan, eta: Cone, u: int, d: int, s: int = 1, region: int = 0) -> tuple[Fan, list[Step]]:
    """Steps of the ``s``-th iterate of the relative barycentric operator ``sd_{η,u,d}``.

    Each iterate starts with the subdivision relative to the whole (region of
    the) fan, then ``d - 1`` subdivisions relative to the cones lying in some
    ``u``-dimensional cone of that iterate's input.
    """
    steps = []
    for _ in range(s):
        base = fan
        local = [Step(eta, region)] + [Step(eta, region, u, base) for _ in range(d - 1)]
        fan = run_steps(fan, local)
        steps += local
    return fan, steps


def sd_operator(fan: Fan, eta: Cone, u: int, d: int, s: int = 1, region: int = 0) -> Fan:
    if d < 1:
        raise ValueError("d must be at least 1")
    return sd_steps(fan, eta, u, d, s, region)[0]


def eta_cone(n: int, r: int) -> Cone:
    return Cone([unit(n, i) for i in range(r + 1, n + 1)], n, check=False)


def build_gamma(n: int, r: int) -> Construction:
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    start = projective_line_power(n)
    steps = [Step(eta_cone(n, r), r)]
    return Construction(run_steps(start, steps), start, steps, {"op": "gamma", "n": n, "r": r})


def theta_schedule(n: int, r: int, d: Sequence[int]) -> list[tuple[int, int, int]]:
    """``(u, d_k, iterations)`` in order of application (innermost operator first)."""
    s = len(d) + 1
    out = []
    for k in range(s, 1, -1):
        out.append((min(k, n - r + 1), d[k - 2], r + s + 1 - k))
    return out


def build_theta(n: int, r: int, d: Sequence[int] = ()) -> Construction:
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    d = tuple(int(x) for x in d)
    if any(x < 1 for x in d):
        raise ValueError("entries of d must be positive")
    start = projective_line_power(n)
    fan, steps = start, []
    eta = eta_cone(n, r)
    for u, dk, iterations in theta_schedule(n, r, d):
        fan, more = sd_steps(fan, eta, u, dk, iterations, region=r)
        steps += more
    return Construction(fan, start, steps, {"op": "theta", "n": n, "r": r, "d": list(d)})


def theta_by_restriction(n: int, r: int, d: Sequence[int] = ()) -> Fan:
    """Θ built on the region ``x_1..x_r <= 0`` alone, then extended back."""
    fan = restrict_to_region(projective_line_power(n), r)
    eta = eta_cone(n, r)
    for u, dk, iterations in theta_schedule(n, r, tuple(d)):
        fan = sd_operator(fan, eta, u, dk, iterations)
    return extend_from_region(fan, r)


@dataclass
class RigidityReport:
    is_rigid: bool
    in_halfspace: bool | None


def is_I_rigid(cone: Cone, I: Sequence[int]) -> bool:
    """``cone = Cone(e_i (i in I), f's)`` with each ``f`` having equal coordinates on ``I``."""
    I = list(I)
    units = {unit(cone.n, i) for i in I}
    if not units <= cone.rayset:
        return False
    return all(len({f[i - 1] for i in I}) <= 1 for f in cone.rays if f not in units)


@dataclass(frozen=True)
class HalfspaceSpec:
    """``ε (a_i : i in first) ≥ (a_j : j in second)``, or ``≤`` / ``=`` by ``side``."""

    first: tuple[int, ...]
    second: tuple[int, ...]
    eps: Fraction
    side: str = "+"

    @classmethod
    def standard(cls, t: int, n: int, eps, side: str = "+") -> "HalfspaceSpec":
        return cls(tuple(range(1, t + 1)), tuple(range(t + 1, n + 1)), Fraction(eps), side)

    def holds(self, v: Sequence[int]) -> bool:
        lhs = Fraction(self.eps) * sum(v[i - 1] for i in self.first)
        rhs = sum(v[j - 1] for j in self.second)
        return {"+": lhs >= rhs, "-": lhs <= rhs, "0": lhs == rhs}[self.side]


def rigidity_halfspace_check(cone: Cone, I: Sequence[int], halfspace: HalfspaceSpec | None = None) -> RigidityReport:
    inside = None
    if halfspace is not None:
        if any(x < 0 for v in cone.rays for x in v):
            raise PreconditionFailed("half-space tests are for cones in the nonnegative orthant", cone)
        inside = all(halfspace.holds(v) for v in cone.rays)
    return RigidityReport(is_I_rigid(cone, I), inside)


def lift_subdivision_along_ray(fan: Fan, alpha: Ray, plan: Sequence[Cone]) -> Fan:
    """Star-subdivide upstairs so that ``V(α)`` follows the planned star subdivisions."""
    a = Cone((alpha,), fan.n, check=False)
    for tau_bar in plan:
        quotient, mapping = quotient_fan(fan, a)
        if tau_bar.dim != 2 or not quotient.contains(tau_bar):
            raise PreconditionFailed(f"{tau_bar} is not a 2-cone of V(alpha)", tau_bar)
        hits = [c.without(alpha) for c, img in mapping.items() if c.dim == 3 and img == tau_bar]
        if len(hits) != 1:
            raise PreconditionFailed(f"no unique 2-cone upstairs over {tau_bar}", tau_bar)
        expected = star_subdivision(quotient, tau_bar)[0]
        fan = star_subdivision(fan, hits[0])[0]
        if quotient_fan(fan, a)[0] != expected:
            raise ToricError("quotient does not follow the star subdivision", tau_bar)
    return fan


def cylinder_rays(fan: Fan, I0: Sequence, I2: Sequence) -> list[Ray]:
    excluded = {fan.axis_ray(i) for i in set(I0) | set(I2)}
    return [f for f in fan.rays if f not in excluded]


def cylinder_subdivision(fan: Fan, I0: Sequence = (), I2: Sequence = (), label=None) -> Fan:
    """Star-subdivide ``Σ × P^1`` at ``Cone(f_i, e_t)`` for ``i = m, ..., 1``.

    ``f_1..f_m`` are the rays of ``Σ`` other than ``e_i`` for ``i`` in
    ``I0 ∪ I2``, in lexicographic order; ``e_t`` is the new last axis.
    """
    prod = product_with_P1(fan, label)
    n = prod.n
    et = unit(n, n)
    fs = [tuple(f) + (0,) for f in cylinder_rays(fan, I0, I2)]
    out = prod
    for f in reversed(fs):
        out = star_subdivision(out, Cone([f, et], n, check=False))[0]
    # the slice t = 0 is untouched
    bottom = Fan([c for c in out.cones() if all(v[-1] == 0 for v in c.rays)], n)
    if bottom != Fan([Cone([tuple(v) + (0,) for v in c.rays], n, check=False) for c in fan.maximal_cones], n):
        raise ToricError("slice t = 0 changed", bottom)
    excluded = {prod.axis_ray(i) for i in set(I0) | set(I2)}
    for c in fan.cones():
        lifted = [tuple(v) + (0,) for v in c.rays]
        if not lifted or set(lifted) & excluded:
            continue
        if out.contains(lifted + [et]):
            raise ToricError(f"Cone({c}, e_t) survived the subdivision", c)
    return out


def demo_dist14(m_max: int) -> list[tuple[tuple[int, int, int], tuple[int, int, int]]]:
    """Iterates ``((x, y, z), (x', y', z'))`` for ``m = 1..m_max``.

    ``(x, x') = (M^{m-1} + ... + M^0)(2, 3)``, ``(y, y') = M^m (1, 0)`` and
    ``(z, z') = M^m (0, 1)`` with ``M = [[1, 1], [2, 1]]``.
    """

    def mul(v):
        return (v[0] + v[1], 2 * v[0] + v[1])

    out = []
    x = (0, 0)
    power = (2, 3)  # M^k (2, 3)
    y, z = (1, 0), (0, 1)
    for _ in range(m_max):
        x = (x[0] + power[0], x[1] + power[1])
        power = mul(power)
        y, z = mul(y), mul(z)
        out.append(((x[0], y[0], z[0]), (x[1], y[1], z[1])))
    return out
