"""Chow groups of smooth toric varieties and the divisor calculus on them.

Three descriptions of the same groups are kept side by side so that each
can check the others:

* the cycle presentation: generators ``[V(τ)]`` for ``τ`` of codimension
  ``p`` and one relation per pair ``(σ, m)`` with ``σ`` one dimension
  smaller and ``m`` in a basis of ``M(σ)``;
* the ``ess`` basis attached to an ordering of the maximal cones;
* the Stanley-Reisner ring, graded piece by graded piece.

Chow groups are indexed by dimension: ``chow_presentation(fan, p)`` is
``CH_p``, generated by cones of dimension ``n - p``.

>>> from toricchow.fan import projective_line_power
>>> chow_presentation(projective_line_power(2), 1).rank
2
>>> sr_graded_piece(projective_line_power(2), 1).rank
2
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Mapping, Sequence

from .errors import (
    ConclusionFailed,
    MethodDisagreement,
    NotABasis,
    PreconditionFailed,
    RouteMismatch,
    UnsupportedRay,
)
from .exactlin import (
    Cokernel,
    IntMatrix,
    hermite_normal_form,
    saturated_kernel_basis,
    smith_normal_form,
    solve_integer,
)
from .fan import (
    Cone,
    Fan,
    Ray,
    coordinates_in,
    delete_coordinate,
    divisor_fan,
    product_with_P1,
    quotient_fan,
    unit,
)
from .ordering import OrderedFan
from .subdivide import cylinder_subdivision, star_subdivision


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _add(acc: dict, key, value: int) -> None:
    v = acc.get(key, 0) + value
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


# ---------------------------------------------------------------------------
# presentations and maps


@dataclass
class FreeAbelianPresentation:
    """``Z^generators`` modulo the span of ``relations`` (sparse columns)."""

    generators: list
    relations: list[dict[int, int]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {g: k for k, g in enumerate(self.generators)}

    @cached_property
    def cokernel(self) -> Cokernel:
        return Cokernel(len(self.generators), self.relations)

    @property
    def rank(self) -> int:
        return self.cokernel.rank

    @property
    def torsion(self) -> tuple[int, ...]:
        return self.cokernel.torsion

    @cached_property
    def relation_matrix(self) -> IntMatrix:
        rows = [[0] * len(self.relations) for _ in self.generators]
        for j, rel in enumerate(self.relations):
            for i, v in rel.items():
                rows[i][j] = v
        return IntMatrix(rows, len(self.relations))

    def vector(self, cycle: Mapping) -> dict[int, int]:
        """Sparse vector of a cycle given as ``{generator: coefficient}``."""
        out: dict[int, int] = {}
        for g, c in cycle.items():
            if c:
                _add(out, self.index[g], c)
        return out

    def coordinates(self, cycle: Mapping) -> tuple[int, ...]:
        return self.cokernel.coordinates(self.vector(cycle))

    def is_zero(self, cycle: Mapping) -> bool:
        return self.cokernel.is_zero(self.vector(cycle))

    def lift(self, b: int) -> dict:
        """A cycle whose class is the ``b``-th free basis vector."""
        return {self.generators[i]: c for i, c in self.cokernel.lift(b).items()}

    def to_json(self) -> dict:
        def label(g):
            if isinstance(g, Cone):
                return [list(r) for r in g.rays]
            if isinstance(g, tuple):
                return [list(r) if isinstance(r, tuple) else r for r in g]
            return g

        return {"generators": [label(g) for g in self.generators], "rank": self.rank, "torsion": list(self.torsion)}


@dataclass
class AbelianMap:
    """A homomorphism given on generators; ``images[k]`` is a sparse target vector."""

    source: FreeAbelianPresentation
    target: FreeAbelianPresentation
    images: list[dict[int, int]]

    def __post_init__(self):
        for rel in self.source.relations:
            if not self.target.cokernel.is_zero(self.apply_vector(rel)):
                raise RouteMismatch("a relation is not sent to zero", rel)

    def apply_vector(self, vec: Mapping[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for k, c in vec.items():
            for t, v in self.images[k].items():
                _add(out, t, c * v)
        return out

    def apply(self, cycle: Mapping) -> dict:
        vec = self.apply_vector(self.source.vector(cycle))
        return {self.target.generators[t]: v for t, v in vec.items()}

    @cached_property
    def matrix(self) -> IntMatrix:
        """Matrix on free coordinates: column ``b`` is the image of the ``b``-th basis class."""
        cols = []
        for b in range(self.source.rank):
            img = self.apply_vector(self.source.cokernel.lift(b))
            cols.append(self.target.cokernel.coordinates(img))
        return IntMatrix([list(r) for r in zip(*cols)], len(cols)) if cols else IntMatrix.zeros(self.target.rank, 0)

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist()}


# ---------------------------------------------------------------------------
# the cycle presentation


def _cover_relations(fan: Fan, dim: int) -> dict[Cone, list[tuple[Cone, Ray]]]:
    """For each cone of dimension ``dim - 1``: the cones of dimension ``dim`` over it and their extra ray."""
    up: dict[Cone, list[tuple[Cone, Ray]]] = defaultdict(list)
    for tau in fan.cones(dim):
        for u in tau.rays:
            up[tau.without(u)].append((tau, u))
    return up


@lru_cache(maxsize=512)
def chow_presentation(fan: Fan, p: int) -> FreeAbelianPresentation:
    """``CH_p``: generators ``Σ(n-p)``; relations ``Σ_τ <u_τσ, m> [V(τ)]`` over ``σ`` in ``Σ(n-p-1)``."""
    n = fan.n
    gens = fan.cones(n - p) if 0 <= p <= n else []
    pres = FreeAbelianPresentation(list(gens))
    if not gens or n - p - 1 < 0:
        return pres
    up = _cover_relations(fan, n - p)
    rels = []
    for sigma in fan.cones(n - p - 1):
        for m in sigma.dual_lattice_basis:
            rel: dict[int, int] = {}
            for tau, u in up.get(sigma, []):
                _add(rel, pres.index[tau], _dot(u, m))
            rels.append(rel)
    return FreeAbelianPresentation(list(gens), rels)


def class_of(fan: Fan, cone: Cone) -> tuple[int, ...]:
    """Free coordinates of ``[V(cone)]``."""
    return chow_presentation(fan, fan.n - cone.dim).coordinates({cone: 1})


# ---------------------------------------------------------------------------
# the ess basis


@dataclass
class FultonBasis:
    """Per degree ``k``: the maximal cones whose ``ess`` has dimension ``n-k``."""

    ordered: OrderedFan
    members: dict[int, list[Cone]]
    certificate: dict[int, tuple[int, ...]]

    def ess(self, sigma: Cone) -> Cone:
        return self.ordered.ess(sigma)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(self.members.get(k, [])) for k in range(self.ordered.fan.n + 1))


def ess_census(ordered: OrderedFan) -> dict[int, list[Cone]]:
    n = ordered.fan.n
    out: dict[int, list[Cone]] = {k: [] for k in range(n + 1)}
    for s in ordered.order:
        out[n - ordered.ess(s).dim].append(s)
    return out


def fulton_basis(ordered: OrderedFan) -> FultonBasis:
    """Certify that the classes ``[V(ess σ)]`` form a basis of every ``CH_k``."""
    fan = ordered.fan
    members = ess_census(ordered)
    cert = {}
    for k, sigmas in members.items():
        pres = chow_presentation(fan, k)
        if pres.torsion:
            raise NotABasis(f"CH_{k} has torsion {pres.torsion}", pres.torsion)
        if len(sigmas) != pres.rank:
            raise NotABasis(f"degree {k}: {len(sigmas)} candidates for rank {pres.rank}", sigmas)
        if not sigmas:
            cert[k] = ()
            continue
        rows = [pres.coordinates({ordered.ess(s): 1}) for s in sigmas]
        diag = smith_normal_form(IntMatrix(rows, pres.rank)).diagonal
        if any(d != 1 for d in diag):
            raise NotABasis(f"degree {k}: change of basis has invariants {diag}", diag)
        cert[k] = diag
    return FultonBasis(ordered, members, cert)


# ---------------------------------------------------------------------------
# Stanley-Reisner ring


@lru_cache(maxsize=4096)
def _unit_dual(rays: tuple[Ray, ...], f: Ray, n: int) -> Ray:
    """An integer ``m`` with ``<f, m> = 1`` and ``<g, m> = 0`` for the other rays ``g``."""
    target = tuple(int(g == f) for g in rays)
    m = solve_integer([tuple(r[j] for r in rays) for j in range(n)], target)
    if m is None:
        raise PreconditionFailed("cone is not smooth", rays)
    return tuple(m)


Monomial = tuple[Ray, ...]  # sorted, with repetition


class GradedRingPresentation:
    """``Z[x_f : f ray] / (I + J)`` for a smooth fan."""

    def __init__(self, fan: Fan):
        self.fan = fan
        self.variables = fan.rays
        self._cache: dict[Monomial, dict[Cone, int]] = {}

    @cached_property
    def linear_forms(self) -> list[dict[Ray, int]]:
        """``Σ_f <f, e_i> x_f`` for every coordinate ``i``."""
        return [{f: f[i] for f in self.variables if f[i]} for i in range(self.fan.n)]

    @cached_property
    def minimal_nonfaces(self) -> list[tuple[Ray, ...]]:
        fan = self.fan
        out = []
        faces = {c.rays for c in fan.cones()}
        for k in range(2, fan.n + 2):
            for c in fan.cones(k - 1):
                for f in self.variables:
                    if f > c.rays[-1]:
                        cand = c.rays + (f,)
                        if cand not in faces and all(cand[:j] + cand[j + 1 :] in faces for j in range(k)):
                            out.append(cand)
        return out

    def monomial_class(self, mono: Iterable[Ray]) -> dict[Cone, int]:
        """The class of ``Π x_f`` as a cycle on cones of dimension ``deg``."""
        mono = tuple(sorted(tuple(f) for f in mono))
        if mono in self._cache:
            return self._cache[mono]
        support = tuple(sorted(set(mono)))
        fan = self.fan
        if not fan.contains(support):
            out: dict[Cone, int] = {}
        elif len(support) == len(mono):
            out = {Cone(support, fan.n, check=False): 1}
        else:
            f = next(x for x, y in zip(mono, mono[1:]) if x == y)
            m = _unit_dual(support, f, fan.n)
            rest = list(mono)
            rest.remove(f)
            out = {}
            tau = Cone(support, fan.n, check=False)
            for g in self.variables:
                if g in tau.rayset:
                    continue
                c = _dot(g, m)
                if c and fan.contains(tau.with_rays(g)):
                    for cone, v in self.monomial_class(rest + [g]).items():
                        _add(out, cone, -c * v)
        self._cache[mono] = out
        return out

    def cone_monomials(self, p: int) -> list[Monomial]:
        """Degree-``p`` monomials whose support is a cone."""
        out = []
        for c in self.fan.cones():
            if 0 < c.dim <= p or (p == 0 and c.dim == 0):
                for extra in combinations_with_replacement(c.rays, p - c.dim):
                    out.append(tuple(sorted(c.rays + extra)))
        return sorted(set(out))

    def graded_piece(self, p: int) -> FreeAbelianPresentation:
        """Degree ``p`` of the ring by linear algebra on monomials (no reduction rules)."""
        gens = self.cone_monomials(p)
        pres = FreeAbelianPresentation(gens)
        if p == 0:
            return pres
        rels = []
        for beta in self.cone_monomials(p - 1):
            for form in self.linear_forms:
                rel: dict[int, int] = {}
                for f, c in form.items():
                    prod = tuple(sorted(beta + (f,)))
                    if prod in pres.index:
                        _add(rel, pres.index[prod], c)
                rels.append(rel)
        return FreeAbelianPresentation(gens, rels)


@lru_cache(maxsize=64)
def ring_of(fan: Fan) -> GradedRingPresentation:
    return GradedRingPresentation(fan)


def monomial_class(fan: Fan, mono: Iterable[Ray]) -> dict[Cone, int]:
    return ring_of(fan).monomial_class(mono)


def sr_graded_piece(fan: Fan, p: int) -> FreeAbelianPresentation:
    """``CH^p`` as the degree-``p`` piece of the Stanley-Reisner presentation."""
    return ring_of(fan).graded_piece(p)


# ---------------------------------------------------------------------------
# the face maps on Chow groups


def _axis_index(fan: Fan, i) -> int:
    return fan.axis_position(i)


def delta0_cycle_map(fan: Fan, i, p: int) -> AbelianMap:
    """Gysin pullback ``CH_p(Σ) -> CH_{p-1}(V(e_i))`` on the generators ``[V(τ)]``."""
    ei = fan.axis_ray(i)
    e_cone = fan.cone([ei])
    D, image = quotient_fan(fan, e_cone)
    src = chow_presentation(fan, p)
    tgt = chow_presentation(D, p - 1)
    images = []
    for tau in src.generators:
        img: dict[int, int] = {}
        if ei in tau.rayset:
            m = _unit_dual(tau.rays, ei, fan.n)
            for f in fan.rays:
                if f not in tau.rayset and fan.contains(tau.with_rays(f)):
                    c = _dot(f, m)
                    if c:
                        _add(img, tgt.index[image[tau.with_rays(f)]], -c)
        elif fan.contains(tau.with_rays(ei)):
            _add(img, tgt.index[image[tau.with_rays(ei)]], 1)
        images.append(img)
    return AbelianMap(src, tgt, images)


def delta1_cycle_map(fan: Fan, i, p: int) -> AbelianMap:
    """Pullback to the cones inside ``x_i = 0``: ``[V(τ)] ↦ [V(τ)]`` or ``0``."""
    pos = _axis_index(fan, i)
    D = divisor_fan(fan, i, 1)
    src = chow_presentation(fan, p)
    tgt = chow_presentation(D, p - 1)
    images = []
    for tau in src.generators:
        if all(r[pos - 1] == 0 for r in tau.rays):
            t = Cone([delete_coordinate(r, pos) for r in tau.rays], D.n, check=False)
            images.append({tgt.index[t]: 1})
        else:
            images.append({})
    return AbelianMap(src, tgt, images)


def induced_ordering(ordered: OrderedFan, i) -> OrderedFan:
    """Ordering of ``V(e_i)`` inherited from the maximal cones through ``e_i``."""
    fan = ordered.fan
    ei = fan.axis_ray(i)
    D, image = quotient_fan(fan, fan.cone([ei]))
    order = [image[s] for s in ordered.order if ei in s.rayset]
    return OrderedFan(D, order, ordered.r)


def delta_on_chow(ordered: OrderedFan, i, eps: int, p: int) -> AbelianMap:
    """``δ_{i,eps}^*`` on ``CH_p``, cross-checked against a second route.

    ``eps = 0``: the ess-basis classes must go to ``0`` or to the ess class of
    the induced ordering.  ``eps = 1``: on every cone-supported monomial the
    cycle map must agree with the ring map ``x_f ↦ x_f`` or ``0``.
    """
    fan = ordered.fan
    n = fan.n
    if eps == 0:
        phi = delta0_cycle_map(fan, i, p)
        ei = fan.axis_ray(i)
        low = induced_ordering(ordered, i)
        for s in ordered.order:
            e = ordered.ess(s)
            if n - e.dim != p:
                continue
            got = phi.apply({e: 1})
            if ei in s.rayset:
                want = {low.ess(low.order[[c for c in ordered.order if ei in c.rayset].index(s)]): 1}
            else:
                want = {}
            diff = dict(got)
            for k, v in want.items():
                _add(diff, k, -v)
            if not phi.target.is_zero(diff):
                raise RouteMismatch(f"ess class of {s} does not follow the projection rule", s)
        return phi
    if eps != 1:
        raise ValueError("eps must be 0 or 1")
    phi = delta1_cycle_map(fan, i, p)
    D = phi.target
    pos = _axis_index(fan, i)
    ring = ring_of(fan)
    Dfan = divisor_fan(fan, i, 1)
    dring = ring_of(Dfan)
    for mono in ring.cone_monomials(n - p):
        left = phi.apply(ring.monomial_class(mono))
        if all(f[pos - 1] == 0 for f in mono):
            right = dring.monomial_class([delete_coordinate(f, pos) for f in mono])
        else:
            right = {}
        diff = dict(left)
        for k, v in right.items():
            _add(diff, k, -v)
        if not D.is_zero(diff):
            raise RouteMismatch(f"ring and cycle routes differ on {mono}", mono)
    return phi


# ---------------------------------------------------------------------------
# the flat part


def _span_hnf(vectors: Sequence[Sequence[int]], ncols: int) -> IntMatrix:
    return hermite_normal_form([list(v) for v in vectors], ncols)


def chow_flat(ordered: OrderedFan, r: int, p: int) -> FreeAbelianPresentation:
    """``CH_p^♭`` computed three ways; all three sublattices of ``CH_p`` must coincide.

    (a) the common kernel of ``δ_{i,0}^*`` for ``i > r``; (b) the ess classes of
    maximal cones avoiding every ``e_i`` with ``i > r``; (c) ``H_0`` of the flat
    complex mapped into ``CH_p`` by inclusion of cycles.
    """
    from .complexes import build_z_slice

    fan = ordered.fan
    n = fan.n
    full = chow_presentation(fan, p)
    if full.torsion:
        raise MethodDisagreement(f"CH_{p} has torsion", full.torsion)
    R = full.rank
    # (a)
    stack: list[list[int]] = []
    for i in range(r + 1, n + 1):
        if p == 0:
            break
        stack.extend(list(row) for row in delta0_cycle_map(fan, fan.axes[i - 1], p).matrix.rows)
    if stack:
        kernel = saturated_kernel_basis(IntMatrix(stack, R), R).rows
    else:
        kernel = tuple(tuple(int(a == b) for b in range(R)) for a in range(R))
    # (b)
    es = {unit(n, i) for i in range(r + 1, n + 1)}
    subs = [s for s in ordered.order if not s.rayset & es and n - ordered.ess(s).dim == p]
    fulton = [full.coordinates({ordered.ess(s): 1}) for s in subs]
    # (c)
    zslice = build_z_slice(fan, p, flat=True, r=r)
    h0 = zslice.h0()
    flat_vectors = []
    for b in range(h0.rank):
        cyc = {zslice.basis(0)[k][0]: c for k, c in h0.lift(b).items()}
        flat_vectors.append(full.coordinates(cyc))
    lattices = {
        "kernel": _span_hnf(kernel, R),
        "ess": _span_hnf(fulton, R),
        "flat_complex": _span_hnf(flat_vectors, R),
    }
    ranks = {"kernel": len(kernel), "ess": len(fulton), "flat_complex": h0.rank}
    torsion = {"kernel": (), "ess": (), "flat_complex": h0.torsion}
    if len(set(lattices.values())) != 1 or len(set(ranks.values())) != 1 or h0.torsion:
        raise MethodDisagreement(f"CH♭_{p}: ranks {ranks}, torsion {torsion}", (ranks, torsion))
    return FreeAbelianPresentation(
        [ordered.ess(s) for s in subs], [], {"ranks": ranks, "torsion": torsion, "maximal_cones": subs}
    )


# ---------------------------------------------------------------------------
# blow-up ranks


@dataclass
class BlowupReport:
    center: Cone
    rows: list[dict]

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.rows)


def blowup_rank_check(fan: Fan, sigma: Cone) -> BlowupReport:
    """``rank CH_d(Σ*(σ)) = rank CH_d(Σ) + rank CH_{d-1}(V(σ))`` for every ``d``."""
    if sigma.dim != 2:
        raise PreconditionFailed("the center must be a 2-dimensional cone", sigma)
    blown, _ = star_subdivision(fan, sigma)
    V, _ = quotient_fan(fan, sigma)
    rows = []
    for d in range(fan.n + 1):
        a = chow_presentation(blown, d)
        b = chow_presentation(fan, d)
        c = chow_presentation(V, d - 1) if 1 <= d <= V.n + 1 else None
        c_rank = c.rank if c is not None else 0
        torsion_free = not a.torsion and not b.torsion and (c is None or not c.torsion)
        rows.append(
            {
                "d": d,
                "blown_up": a.rank,
                "base": b.rank,
                "center": c_rank,
                "ok": a.rank == b.rank + c_rank and torsion_free,
            }
        )
    return BlowupReport(sigma, rows)


def sample_two_cones(fan: Fan, count: int, seed: int = 0) -> list[Cone]:
    cones = fan.cones(2)
    rng = random.Random(seed)
    return rng.sample(cones, min(count, len(cones)))


# ---------------------------------------------------------------------------
# divisor cycles


class DivisorCycle:
    """An element of ``Sym^p Z^1_{I0}``: monomials in ray divisors with integer coefficients."""

    def __init__(self, fan: Fan, terms: Mapping[Iterable[Ray], int] | None = None, I0: Iterable = (), p: int = 1):
        self.fan = fan
        self.I0 = frozenset(I0)
        self.p = p
        excluded = {fan.axis_ray(i) for i in self.I0}
        rays = set(fan.rays)
        self.terms: dict[Monomial, int] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(sorted(tuple(f) for f in mono))
            if len(mono) != p:
                raise ValueError(f"monomial {mono} is not of degree {p}")
            for f in mono:
                if f in excluded:
                    raise UnsupportedRay(f"{f} is an excluded axis ray", f)
                if f not in rays:
                    raise UnsupportedRay(f"{f} is not a ray of the fan", f)
            if c:
                _add(self.terms, mono, c)

    @classmethod
    def of_rays(cls, fan: Fan, coeffs: Mapping[Ray, int], I0: Iterable = ()) -> "DivisorCycle":
        return cls(fan, {(tuple(f),): c for f, c in coeffs.items()}, I0, 1)

    @classmethod
    def one(cls, fan: Fan, I0: Iterable = ()) -> "DivisorCycle":
        return cls(fan, {(): 1}, I0, 0)

    def _like(self, terms) -> "DivisorCycle":
        return DivisorCycle(self.fan, terms, self.I0, self.p)

    def __add__(self, other: "DivisorCycle") -> "DivisorCycle":
        terms = dict(self.terms)
        for k, v in other.terms.items():
            _add(terms, k, v)
        return self._like(terms)

    def __neg__(self) -> "DivisorCycle":
        return self._like({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "DivisorCycle") -> "DivisorCycle":
        return self + (-other)

    def __mul__(self, other: "DivisorCycle") -> "DivisorCycle":
        terms: dict[Monomial, int] = {}
        for a, x in self.terms.items():
            for b, y in other.terms.items():
                _add(terms, tuple(sorted(a + b)), x * y)
        return DivisorCycle(self.fan, terms, self.I0 | other.I0, self.p + other.p)

    def power(self, k: int) -> "DivisorCycle":
        out = DivisorCycle.one(self.fan, self.I0)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, DivisorCycle) and self.fan == other.fan and self.p == other.p and self.terms == other.terms

    def __hash__(self):
        return hash((self.p, tuple(sorted(self.terms.items()))))

    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> set[Ray]:
        return {f for mono in self.terms for f in mono}

    def chow_class(self) -> dict[Cone, int]:
        """The image in ``CH^p``, as a cycle on cones of dimension ``p``."""
        ring = ring_of(self.fan)
        out: dict[Cone, int] = {}
        for mono, c in self.terms.items():
            for cone, v in ring.monomial_class(mono).items():
                _add(out, cone, c * v)
        return out

    def __repr__(self) -> str:
        return f"DivisorCycle(p={self.p}, terms={self.terms})"


def normalize_axis_ray(fan: Fan, i) -> dict[Ray, int]:
    """``[V(e_i)] = -Σ_{f ≠ e_i} <f, e_i> [V(f)]`` from the linear relation of ``e_i^*``."""
    pos = fan.axis_position(i)
    ei = unit(fan.n, pos)
    return {f: -f[pos - 1] for f in fan.rays if f != ei and f[pos - 1]}


class Pullback:
    """A ray-by-ray map ``Z^1(source) -> Z^1(target)`` extended multiplicatively."""

    def __init__(self, source: Fan, target: Fan, on_ray: Mapping[Ray, Mapping[Ray, int]], I0_out: Iterable = ()):
        self.source = source
        self.target = target
        self.on_ray = {f: dict(v) for f, v in on_ray.items()}
        self.I0_out = frozenset(I0_out)

    def __call__(self, cycle: DivisorCycle) -> DivisorCycle:
        terms: dict[Monomial, int] = {}
        for mono, c in cycle.terms.items():
            partial: dict[Monomial, int] = {(): c}
            for f in mono:
                if f not in self.on_ray:
                    raise UnsupportedRay(f"{f} is outside the domain of the pullback", f)
                nxt: dict[Monomial, int] = {}
                for m0, a in partial.items():
                    for g, b in self.on_ray[f].items():
                        _add(nxt, tuple(sorted(m0 + (g,))), a * b)
                partial = nxt
            for m0, a in partial.items():
                _add(terms, m0, a)
        return DivisorCycle(self.target, terms, self.I0_out, cycle.p)

    def then(self, other: "Pullback") -> "Pullback":
        """``other ∘ self`` (apply ``self`` first)."""
        on = {}
        for f, img in self.on_ray.items():
            acc: dict[Ray, int] = {}
            for g, a in img.items():
                for h, b in other.on_ray[g].items():
                    _add(acc, h, a * b)
            on[f] = acc
        return Pullback(self.source, other.target, on, other.I0_out)


def subdivision_pullback(coarse: Fan, fine: Fan, I0: Iterable = ()) -> Pullback:
    """Pullback of Cartier divisors along a subdivision, through support functions.

    A fine ray ``v`` lying in the coarse cone ``Cone(g_1..g_k)`` with
    ``v = Σ λ_j g_j`` picks up ``λ_j`` times the coefficient of ``[V(g_j)]``.
    """
    on: dict[Ray, dict[Ray, int]] = {g: {} for g in coarse.rays}
    for v in fine.rays:
        host = coarse.containing_maximal(v)
        if host is None:
            raise PreconditionFailed(f"{v} is outside the coarse support", v)
        lam = coordinates_in(host, v)
        for g, x in zip(host.rays, lam):
            if x:
                if x.denominator != 1:
                    raise PreconditionFailed("coarse fan is not smooth", host)
                _add(on[g], v, int(x))
    excluded = {coarse.axis_ray(i) for i in I0}
    return Pullback(coarse, fine, {g: img for g, img in on.items() if g not in excluded}, I0)


def star_pullback(fan: Fan, sigma: Cone, I0: Iterable = ()) -> Pullback:
    """``[V(g)] ↦ [V(g)] + [V(f)]`` for ``g`` in ``σ``, ``f`` the new ray; identity otherwise."""
    fine, _ = star_subdivision(fan, sigma)
    f = tuple(sum(c) for c in zip(*sigma.rays))
    excluded = {fan.axis_ray(i) for i in I0}
    on = {}
    for g in fan.rays:
        if g in excluded:
            continue
        on[g] = {g: 1, f: 1} if g in sigma.rayset else {g: 1}
    return Pullback(fan, fine, on, I0)


def delta_pullback(fan: Fan, i, eps: int, I0: Iterable = ()) -> Pullback:
    """``δ_{i,0}^*[V(f)] = [V(f̄)]`` if ``Cone(f, e_i)`` is a cone, else ``0``;
    ``δ_{i,1}^*[V(f)] = [V(f)]`` if ``f`` lies in ``x_i = 0``, else ``0``."""
    I0 = frozenset(I0)
    excluded = {fan.axis_ray(j) for j in I0}
    pos = fan.axis_position(i)
    ei = unit(fan.n, pos)
    D = divisor_fan(fan, i, eps)
    on = {}
    for f in fan.rays:
        if f in excluded:
            continue
        if eps == 0:
            if f == ei:
                raise UnsupportedRay("δ_{i,0} needs e_i excluded from the cycle group", f)
            on[f] = {delete_coordinate(f, pos): 1} if fan.contains([f, ei]) else {}
        else:
            on[f] = {delete_coordinate(f, pos): 1} if f[pos - 1] == 0 else {}
    return Pullback(fan, D, on, I0 - {i})


def pi_pullback(fan: Fan, t=None, I0: Iterable = ()) -> Pullback:
    """``π_t^*[V(f)] = [V(f, 0)]`` on ``Σ × P^1`` with the new axis last."""
    P = product_with_P1(fan, t)
    excluded = {fan.axis_ray(j) for j in I0}
    on = {f: {tuple(f) + (0,): 1} for f in fan.rays if f not in excluded}
    return Pullback(fan, P, on, frozenset(I0) | {P.axes[-1]})


def divisor_pullback(kind: str, *args, **kwargs) -> Pullback:
    """Dispatch on ``kind`` in ``star``, ``subdivision``, ``delta``, ``pi``."""
    table = {
        "star": star_pullback,
        "subdivision": subdivision_pullback,
        "delta": delta_pullback,
        "pi": pi_pullback,
    }
    if kind not in table:
        raise ValueError(f"unknown pullback kind {kind!r}")
    return table[kind](*args, **kwargs)


# ---------------------------------------------------------------------------
# compatibility identities


@dataclass
class IdentityReport:
    checks: dict[str, int] = field(default_factory=dict)
    failures: list[tuple[str, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, name: str, good: bool, witness=None) -> None:
        self.checks[name] = self.checks.get(name, 0) + 1
        if not good:
            self.failures.append((name, witness))


def admissible_two_cones(fan: Fan, I0, I2) -> list[Cone]:
    """2-cones avoiding ``e_i`` for ``i ∈ I2`` and not inside ``Cone(e_i : i ∈ I0)``."""
    e2 = {fan.axis_ray(i) for i in I2}
    e0 = {fan.axis_ray(i) for i in I0}
    return [c for c in fan.cones(2) if not c.rayset & e2 and not c.rayset <= e0]


def _same_on_rays(p1: Pullback, p2: Pullback, rays) -> Ray | None:
    for f in rays:
        a = DivisorCycle(p1.source, {(f,): 1})
        if p1(a).terms != p2(a).terms:
            return f
    return None


def _compose(first: Pullback, second: Pullback) -> Pullback:
    return first.then(second)


def verify_pullback_identities(fan: Fan, I0=(), I1=(), I2=(), subdivisions: int | None = None) -> IdentityReport:
    """The five compatibilities of the divisor pullbacks, on every allowed ray."""
    rep = IdentityReport()
    I0, I1, I2 = tuple(I0), tuple(I1), tuple(I2)
    excluded = {fan.axis_ray(i) for i in I0}
    rays = [f for f in fan.rays if f not in excluded]
    faces = [(i, 0) for i in I0] + [(i, 1) for i in I1]

    def ex(F: Fan, I) -> list[Ray]:
        ex_rays = {F.axis_ray(j) for j in I}
        return [f for f in F.rays if f not in ex_rays]

    # (1) face maps commute with subdivisions
    for sigma in admissible_two_cones(fan, I0, I2)[:subdivisions]:  # all of them by default
        fine, _ = star_subdivision(fan, sigma)
        g = subdivision_pullback(fan, fine, I0)
        for i, eps in faces:
            left = _compose(g, delta_pullback(fine, i, eps, I0))
            Dc, Df = divisor_fan(fan, i, eps), divisor_fan(fine, i, eps)
            right = _compose(delta_pullback(fan, i, eps, I0), subdivision_pullback(Dc, Df, set(I0) - {i}))
            bad = _same_on_rays(left, right, rays)
            rep.record("1", bad is None, (sigma, i, eps, bad))
        star = star_pullback(fan, sigma, I0)
        bad = _same_on_rays(star, g, rays)
        rep.record("1-star", bad is None, (sigma, bad))
    # (2) same-kind face maps commute; (3) mixed kinds commute
    for (i, e), (j, f) in combinations(faces, 2):
        if i == j:
            continue
        if e == f:
            name = "2"
        else:
            name = "3"
        a = _compose(delta_pullback(fan, i, e, I0), delta_pullback(divisor_fan(fan, i, e), j, f, set(I0) - {i}))
        b = _compose(delta_pullback(fan, j, f, I0), delta_pullback(divisor_fan(fan, j, f), i, e, set(I0) - {j}))
        bad = _same_on_rays(a, b, rays)
        rep.record(name, bad is None, (i, e, j, f, bad))
    # (4) and (5) with a new axis
    pi = pi_pullback(fan, None, I0)
    t = pi.target.axes[-1]
    for eps in (0, 1):
        back = _compose(pi, delta_pullback(pi.target, t, eps, set(I0) | {t}))
        bad = next((f for f in rays if back(DivisorCycle(fan, {(f,): 1})).terms != {(f,): 1}), None)
        rep.record("4", bad is None, (eps, bad))
    for i, eps in faces:
        left = _compose(pi, delta_pullback(pi.target, i, eps, set(I0) | {t}))
        D = divisor_fan(fan, i, eps)
        right = _compose(delta_pullback(fan, i, eps, I0), pi_pullback(D, t, set(I0) - {i}))
        bad = _same_on_rays(left, right, rays)
        rep.record("5", bad is None, (i, eps, bad))
    return rep


def surjectivity_check(fan: Fan, I0, p: int) -> bool:
    """Whether monomials in the allowed rays span ``CH^p`` (exact lattice check)."""
    excluded = {fan.axis_ray(i) for i in I0}
    ring = ring_of(fan)
    pres = chow_presentation(fan, fan.n - p)
    vecs = []
    for mono in ring.cone_monomials(p):
        if set(mono) & excluded:
            continue
        vecs.append(pres.coordinates(ring.monomial_class(mono)))
    if pres.rank == 0:
        return True
    if not vecs:
        return False
    diag = smith_normal_form(IntMatrix(vecs, pres.rank)).diagonal
    return len([d for d in diag if d]) == pres.rank and all(d in (0, 1) for d in diag)


# ---------------------------------------------------------------------------
# lifting along a new P^1 factor


@dataclass
class CylinderLift:
    fan: Fan
    cycle: DivisorCycle
    checks: dict[str, bool]


def cylinder_lift(fan: Fan, x: DivisorCycle, I0=(), I1=(), I2=(), t=None) -> CylinderLift:
    """Subdivide ``Σ × P^1`` so that the ray-wise copy of ``x`` dies on every face but ``x_t = 0``."""
    I0, I1, I2 = frozenset(I0), frozenset(I1), frozenset(I2)
    for i in I0:
        if not delta_pullback(fan, i, 0, I0)(x).is_zero():
            raise PreconditionFailed(f"δ_{{{i},0}}^* x is not zero", i)
    for i in I1:
        if not delta_pullback(fan, i, 1, I0)(x).is_zero():
            raise PreconditionFailed(f"δ_{{{i},1}}^* x is not zero", i)
    sub = cylinder_subdivision(fan, sorted(I0), sorted(I2), t)
    t = sub.axes[-1]
    terms = {tuple(tuple(f) + (0,) for f in mono): c for mono, c in x.terms.items()}
    y = DivisorCycle(sub, terms, I0 | {t}, x.p)
    checks = {}
    for i in sorted(I0 | {t}, key=str):
        checks[f"delta({i},0)"] = delta_pullback(sub, i, 0, I0 | {t})(y).is_zero()
    for i in sorted(I1, key=str):
        checks[f"delta({i},1)"] = delta_pullback(sub, i, 1, I0 | {t})(y).is_zero()
    back = delta_pullback(sub, t, 1, I0 | {t})(y)
    checks[f"delta({t},1) = x"] = back.terms == x.terms and back.fan == fan
    if not all(checks.values()):
        raise ConclusionFailed(f"lift fails {[k for k, v in checks.items() if not v]}", checks)
    return CylinderLift(sub, y, checks)
