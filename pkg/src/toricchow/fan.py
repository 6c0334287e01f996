"""Smooth simplicial fans stored by their maximal cones.

Rays are primitive integer tuples and a cone is the sorted tuple of its
rays, so two cones are equal exactly when they have the same rays.  Every
face of a simplicial cone is spanned by a subset of its rays, which is what
makes most of the combinatorics here cheap.

Coordinate axes carry labels (``Fan.axes``, by default ``1..n``).  Functions
that talk about "the axis ``i``" take a label, so removing an axis does not
renumber the others.

>>> P = projective_line_power(2)
>>> len(P.maximal_cones), is_complete(P)
(4, True)
>>> quotient_fan(P, Cone([(1, 0)]))[0].rays
((-1,), (1,))
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import Iterable, Sequence

from .errors import InvalidCone, InvalidFan, NotAFace, NotPure
from .exactlin import det, is_saturated, primitive, rational_kernel, saturated_kernel_basis

Ray = tuple[int, ...]


def unit(n: int, pos: int, sign: int = 1) -> Ray:
    """``sign * e_pos`` in ``Z^n`` (``pos`` counts from 1)."""
    return tuple(sign if k == pos - 1 else 0 for k in range(n))


def insert_coordinate(v: Sequence[int], pos: int, value: int = 0) -> Ray:
    return tuple(v[: pos - 1]) + (value,) + tuple(v[pos - 1 :])


def delete_coordinate(v: Sequence[int], pos: int) -> Ray:
    return tuple(v[: pos - 1]) + tuple(v[pos:])


class Cone:
    """Cone spanned by linearly independent primitive rays."""

    __slots__ = ("rays", "n", "__dict__")

    def __init__(self, rays: Iterable[Sequence[int]], n: int | None = None, check: bool = True):
        rs = tuple(sorted({tuple(int(x) for x in r) for r in rays}))
        if n is None:
            if not rs:
                raise InvalidCone("ambient rank needed for the zero cone")
            n = len(rs[0])
        self.rays = rs
        self.n = n
        if check:
            for r in rs:
                if len(r) != n:
                    raise InvalidCone(f"ray {r} is not in Z^{n}", r)
                if not any(r) or primitive(r) != r:
                    raise InvalidCone(f"ray {r} is not primitive", r)
            if rs and len(rational_kernel(list(zip(*rs)), len(rs))) != 0:
                raise InvalidCone("rays are linearly dependent", rs)

    @classmethod
    def zero(cls, n: int) -> "Cone":
        return cls((), n, check=False)

    @property
    def dim(self) -> int:
        return len(self.rays)

    @cached_property
    def rayset(self) -> frozenset:
        return frozenset(self.rays)

    @cached_property
    def is_smooth(self) -> bool:
        return is_saturated(self.rays, self.n)

    def face(self, rays: Iterable[Ray]) -> "Cone":
        rays = list(rays)
        if not set(rays) <= self.rayset:
            raise NotAFace(f"{rays} are not rays of {self}", rays)
        return Cone(rays, self.n, check=False)

    def faces(self, dim: int | None = None) -> list["Cone"]:
        dims = range(self.dim + 1) if dim is None else [dim]
        return [Cone(c, self.n, check=False) for k in dims for c in combinations(self.rays, k)]

    def without(self, ray: Ray) -> "Cone":
        return Cone([r for r in self.rays if r != ray], self.n, check=False)

    def with_rays(self, *rays: Ray) -> "Cone":
        return Cone(self.rays + tuple(rays), self.n, check=False)

    def is_face_of(self, other: "Cone") -> bool:
        return self.rayset <= other.rayset

    @cached_property
    def dual_lattice_basis(self) -> tuple[Ray, ...]:
        """Hermite basis of ``M(σ)``: integer functionals vanishing on the cone."""
        if not self.rays:
            return tuple(unit(self.n, i) for i in range(1, self.n + 1))
        return saturated_kernel_basis(self.rays, self.n).rows

    def contains(self, v: Sequence[int]) -> bool:
        lam = coordinates_in(self, v)
        return lam is not None and all(x >= 0 for x in lam)

    def __eq__(self, other) -> bool:
        return isinstance(other, Cone) and self.rays == other.rays and self.n == other.n

    def __hash__(self) -> int:
        return hash((self.rays, self.n))

    def __lt__(self, other: "Cone") -> bool:
        return (self.dim, self.rays) < (other.dim, other.rays)

    def __repr__(self) -> str:
        if not self.rays:
            return f"Cone(0 in Z^{self.n})"
        return "Cone(" + ", ".join(str(list(r)) for r in self.rays) + ")"


@lru_cache(maxsize=None)
def _span_data(rays: tuple[Ray, ...], n: int):
    """``(E, L, D)`` with ``x`` in span iff ``E x = 0``, then coordinates ``L x / D``."""
    k = len(rays)
    E = [row for row in (saturated_kernel_basis(rays, n).rows if k else [])]
    if k == 0:
        return tuple(tuple(unit(n, i)) for i in range(1, n + 1)), (), 1
    for cols in combinations(range(n), k):
        Q = [[rays[i][c] for c in cols] for i in range(k)]
        d = det(Q)
        if d:
            break
    # (Q^T)^{-1} = adj(Q^T) / det; adj(Q^T)[i][j] = cofactor of Q^T at (j, i) = cofactor of Q at (i, j)
    adj = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            minor = [row[:j] + row[j + 1 :] for a, row in enumerate(Q) if a != i]
            adj[i][j] = (-1) ** (i + j) * det(minor) if k > 1 else 1
    sign = 1 if d > 0 else -1
    L = []
    for i in range(k):
        row = [0] * n
        for j, c in enumerate(cols):
            row[c] = sign * adj[i][j]
        L.append(tuple(row))
    return tuple(tuple(r) for r in E), tuple(L), abs(d)


def coordinates_in(cone: Cone, v: Sequence[int]) -> tuple[Fraction, ...] | None:
    """Coefficients of ``v`` in the rays of ``cone``, or None off its span."""
    E, L, D = _span_data(cone.rays, cone.n)
    if cone.dim == 0:
        return () if not any(v) else None
    if any(sum(a * b for a, b in zip(e, v)) for e in E):
        return None
    return tuple(Fraction(sum(a * b for a, b in zip(row, v)), D) for row in L)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def extreme_rays(G: Sequence[Sequence[int]], H: Sequence[Sequence[int]], s: int) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone ``{x in R^s : G x >= 0, H x = 0}``."""
    H = [h for h in H if any(h)]
    K = rational_kernel(H, s) if H else [unit(s, i) for i in range(1, s + 1)]
    t = len(K)
    if t == 0:
        return []
    Gp = [tuple(_dot(g, k) for k in K) for g in G]

    def feasible(w):
        return all(_dot(g, w) >= 0 for g in Gp)

    found = set()
    if t == 1:
        candidates = [(1,), (-1,)]
    else:
        candidates = []
        for rows in combinations([g for g in Gp if any(g)], t - 1):
            ker = rational_kernel(rows, t)
            if len(ker) == 1:
                candidates += [ker[0], tuple(-x for x in ker[0])]
    for w in candidates:
        if feasible(w):
            x = primitive([sum(w[i] * K[i][j] for i in range(t)) for j in range(s)])
            if any(x):
                found.add(x)
    return sorted(found)


def intersection_rays(a: Cone, b: Cone) -> tuple[Ray, ...]:
    """Extreme rays of ``a ∩ b`` (which need not be simplicial in general)."""
    E, L, D = _span_data(a.rays, a.n)
    B = b.rays
    l = len(B)
    G = [unit(l, j) for j in range(1, l + 1)]
    if a.dim:
        G += [tuple(_dot(row, bj) for bj in B) for row in L]
        H = [tuple(_dot(e, bj) for bj in B) for e in E]
    else:
        H = [tuple(bj[c] for bj in B) for c in range(a.n)]
    out = set()
    for mu in extreme_rays(G, H, l):
        x = primitive([sum(mu[j] * B[j][c] for j in range(l)) for c in range(a.n)])
        out.add(x)
    return tuple(sorted(out))


def cone_intersection(a: Cone, b: Cone) -> Cone:
    """Exact intersection of two cones, as a cone.

    Raises ``InvalidCone`` if the intersection is not simplicial, which never
    happens for two cones of a fan.
    """
    if a.n != b.n:
        raise InvalidCone("cones live in different lattices")
    return Cone(intersection_rays(a, b), a.n)


def _meet_is_common_face(a: Cone, b: Cone) -> bool:
    common = a.rayset & b.rayset
    if common == a.rayset or common == b.rayset:
        return True
    n = a.n
    if a.dim == n and b.dim == n:
        _, L, _ = _span_data(a.rays, n)
        K = [i for i, r in enumerate(a.rays) if r not in common]
        J = [r for r in b.rays if r not in common]
        W = [[_dot(L[k], r) for r in J] for k in K]
        if any(all(x < 0 for x in row) for row in W):
            return True
        G = [unit(len(J), j) for j in range(1, len(J) + 1)] + W
        return not extreme_rays(G, [], len(J))
    return set(intersection_rays(a, b)) == common


class Fan:
    """A fan given by its maximal cones.  Construction does not validate;
    use :func:`make_fan` or :func:`validate_fan` for that."""

    def __init__(self, cones: Iterable[Cone | Iterable[Sequence[int]]], n: int, axes: Sequence | None = None):
        cs = set()
        for c in cones:
            cs.add(c if isinstance(c, Cone) else Cone(c, n))
        if not cs:
            cs = {Cone.zero(n)}
        # keep only maximal ones
        by_size = sorted(cs, key=lambda c: -c.dim)
        maximal: list[Cone] = []
        for c in by_size:
            if not any(c.rayset < m.rayset for m in maximal):
                maximal.append(c)
        self.n = n
        self.maximal_cones: tuple[Cone, ...] = tuple(sorted(maximal, key=lambda c: c.rays))
        self.axes = tuple(axes) if axes is not None else tuple(range(1, n + 1))
        if len(self.axes) != n:
            raise InvalidFan("axis labels do not match the rank")

    def __eq__(self, other) -> bool:
        return isinstance(other, Fan) and self.n == other.n and self.maximal_cones == other.maximal_cones

    def __hash__(self) -> int:
        return hash((self.n, self.maximal_cones))

    def __repr__(self) -> str:
        return f"Fan(rank={self.n}, maximal_cones={len(self.maximal_cones)})"

    @cached_property
    def rays(self) -> tuple[Ray, ...]:
        return tuple(sorted({r for c in self.maximal_cones for r in c.rays}))

    @cached_property
    def _all(self) -> dict[int, list[Cone]]:
        seen = set()
        for c in self.maximal_cones:
            for k in range(c.dim + 1):
                seen.update(combinations(c.rays, k))
        out: dict[int, list[Cone]] = defaultdict(list)
        for rs in sorted(seen):
            out[len(rs)].append(Cone(rs, self.n, check=False))
        return out

    @cached_property
    def _members(self) -> frozenset:
        return frozenset(c.rays for cs in self._all.values() for c in cs)

    def cones(self, dim: int | None = None) -> list[Cone]:
        if dim is None:
            return [c for k in sorted(self._all) for c in self._all[k]]
        return list(self._all.get(dim, []))

    def contains(self, cone: Cone | Iterable[Ray]) -> bool:
        rays = cone.rays if isinstance(cone, Cone) else tuple(sorted(tuple(r) for r in cone))
        return rays in self._members

    def cone(self, rays: Iterable[Sequence[int]]) -> Cone:
        c = Cone(rays, self.n, check=False)
        if not self.contains(c):
            raise NotAFace(f"{c} is not a cone of the fan", c)
        return c

    @cached_property
    def is_pure(self) -> bool:
        return all(c.dim == self.n for c in self.maximal_cones)

    @cached_property
    def is_smooth(self) -> bool:
        return all(c.is_smooth for c in self.maximal_cones)

    @cached_property
    def _walls(self) -> dict[tuple, list[Cone]]:
        walls = defaultdict(list)
        for c in self.maximal_cones:
            for r in c.rays:
                walls[c.without(r).rays].append(c)
        return walls

    def wall_neighbor(self, sigma: Cone, ray: Ray) -> Cone | None:
        """The other maximal cone through the facet of ``sigma`` opposite ``ray``."""
        others = [c for c in self._walls[sigma.without(ray).rays] if c != sigma]
        return others[0] if others else None

    def star(self, sigma: Cone) -> list[Cone]:
        """Maximal cones having ``sigma`` as a face."""
        return [c for c in self.maximal_cones if sigma.rayset <= c.rayset]

    def containing_maximal(self, v: Sequence[int]) -> Cone | None:
        for c in self.maximal_cones:
            if c.contains(v):
                return c
        return None

    def axis_position(self, label) -> int:
        try:
            return self.axes.index(label) + 1
        except ValueError:
            raise NotAFace(f"no axis labelled {label!r}", label) from None

    def axis_ray(self, label, sign: int = 1) -> Ray:
        return unit(self.n, self.axis_position(label), sign)

    def relabeled(self, axes: Sequence | None = None) -> "Fan":
        return Fan(self.maximal_cones, self.n, axes)


def validate_fan(fan: Fan) -> None:
    """Raise ``InvalidFan`` unless every two maximal cones meet in a common face."""
    for c in fan.maximal_cones:
        Cone(c.rays, fan.n)  # rays primitive and independent
    cones = fan.maximal_cones
    for a, b in combinations(cones, 2):
        if not _meet_is_common_face(a, b):
            raise InvalidFan(f"{a} and {b} do not meet in a common face", (a, b))


def make_fan(cones: Iterable, n: int, axes: Sequence | None = None) -> Fan:
    fan = Fan(cones, n, axes)
    validate_fan(fan)
    return fan


def is_complete(fan: Fan) -> bool:
    """Pure fan whose walls each lie in exactly two maximal cones, connected."""
    if not fan.is_pure:
        raise NotPure("fan has maximal cones of different dimensions", fan.maximal_cones)
    if fan.n == 0:
        return True
    if any(len(v) != 2 for v in fan._walls.values()):
        return False
    adj = defaultdict(list)
    for a, b in fan._walls.values():
        adj[a].append(b)
        adj[b].append(a)
    start = fan.maximal_cones[0]
    seen = {start}
    todo = deque([start])
    while todo:
        for nb in adj[todo.popleft()]:
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return len(seen) == len(fan.maximal_cones)


def _simplex_share(coarse: Cone, fine: Cone) -> Fraction:
    """Share of ``coarse`` taken by ``fine`` on the slice where ray coordinates sum to 1."""
    _, L, D = _span_data(coarse.rays, coarse.n)
    lam = [[_dot(row, r) for row in L] for r in fine.rays]
    sums = [sum(l) for l in lam]
    if any(s <= 0 for s in sums):
        return Fraction(0)
    out = Fraction(abs(det(lam)))
    for s in sums:
        out /= s
    return out


def is_subdivision(fine: Fan, coarse: Fan) -> bool:
    """Every cone of ``fine`` lies in one of ``coarse`` and the supports agree."""
    if fine.n != coarse.n:
        return False
    for c in fine.maximal_cones:
        if not any(all(m.contains(r) for r in c.rays) for m in coarse.maximal_cones if m.dim >= c.dim):
            return False
    for m in coarse.maximal_cones:
        if m.dim == 0:
            continue
        inside = [c for c in fine.cones(m.dim) if all(m.contains(r) for r in c.rays)]
        if sum((_simplex_share(m, c) for c in inside), Fraction(0)) != 1:
            return False
    return True


def quotient_fan(fan: Fan, sigma: Cone) -> tuple[Fan, dict[Cone, Cone]]:
    """The fan ``V(σ)`` in ``N / N_σ`` and the map sending each cone over ``σ`` to its image."""
    if not fan.contains(sigma):
        raise NotAFace(f"{sigma} is not a cone of the fan", sigma)
    P = sigma.dual_lattice_basis
    k = fan.n - sigma.dim

    def image(v):
        return primitive([_dot(m, v) for m in P])

    mapping = {}
    for c in fan.cones():
        if sigma.rayset <= c.rayset:
            mapping[c] = Cone([image(r) for r in c.rays if r not in sigma.rayset], k, check=False)
    axes = None
    if sigma.dim == 1:
        (r,) = sigma.rays
        nz = [i for i, x in enumerate(r) if x]
        if len(nz) == 1 and r[nz[0]] == 1:
            axes = fan.axes[: nz[0]] + fan.axes[nz[0] + 1 :]
    top = [mapping[c] for c in fan.star(sigma)]
    return Fan(top, k, axes), mapping


def divisor_fan(fan: Fan, label, eps: int) -> Fan:
    """``eps = 0``: the star ``V(e_i)``; ``eps = 1``: the cones inside ``x_i = 0``."""
    pos = fan.axis_position(label)
    if eps == 0:
        return quotient_fan(fan, fan.cone([unit(fan.n, pos)]))[0]
    if eps != 1:
        raise ValueError("eps must be 0 or 1")
    inside = [c for c in fan.cones() if all(r[pos - 1] == 0 for r in c.rays)]
    axes = fan.axes[: pos - 1] + fan.axes[pos:]
    return Fan([Cone([delete_coordinate(r, pos) for r in c.rays], fan.n - 1, check=False) for c in inside], fan.n - 1, axes)


def product_with_P1(fan: Fan, label=None) -> Fan:
    """``Σ × P^1`` with the new axis appended last."""
    if label is None:
        label = max(fan.axes, default=0) + 1
    n = fan.n + 1
    cones = []
    for c in fan.maximal_cones:
        base = [tuple(r) + (0,) for r in c.rays]
        for s in (1, -1):
            cones.append(Cone(base + [unit(n, n, s)], n, check=False))
    return Fan(cones, n, fan.axes + (label,))


def projective_line_power(n: int) -> Fan:
    """The fan of ``(P^1)^n``: one orthant per sign vector."""
    cones = [Cone([unit(n, i + 1, s) for i, s in enumerate(signs)], n, check=False) for signs in product((1, -1), repeat=n)]
    return Fan(cones, n)


def affine_space(n: int) -> Fan:
    return Fan([Cone([unit(n, i) for i in range(1, n + 1)], n, check=False)], n)


def in_negative_region(cone: Cone, r: int) -> bool:
    """Whether the cone sits in ``x_1, ..., x_r <= 0``."""
    return all(v[i] <= 0 for v in cone.rays for i in range(r))


def restrict_to_region(fan: Fan, r: int) -> Fan:
    """Cones of ``fan`` inside ``x_1, ..., x_r <= 0``."""
    return Fan([c for c in fan.cones() if in_negative_region(c, r)], fan.n, fan.axes)


def extend_from_region(fan: Fan, r: int) -> Fan:
    """Add ``Cone(δ, e_I)`` for every ``δ`` and every ``I ⊆ {1..r}`` with ``δ`` in ``x_I = 0``."""
    cones = []
    for d in fan.cones():
        I = [i for i in range(1, r + 1) if all(v[i - 1] == 0 for v in d.rays)]
        cones.append(d.with_rays(*[unit(fan.n, i) for i in I]))
    return Fan(cones, fan.n, fan.axes)


@dataclass
class StandardnessReport:
    subdivision_of_p1n: bool
    smooth: bool
    r_standard: bool
    very_r_standard: bool
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.subdivision_of_p1n and self.smooth and self.r_standard and self.very_r_standard


def _in_orthant(cone: Cone) -> bool:
    return all(len({(v[i] > 0) - (v[i] < 0) for v in cone.rays} - {0}) <= 1 for i in range(cone.n))


def is_p1n_subdivision(fan: Fan) -> bool:
    return fan.is_pure and all(_in_orthant(c) for c in fan.maximal_cones) and is_complete(fan)


def standardness_report(fan: Fan, r: int) -> StandardnessReport:
    n = fan.n
    failures = []
    sub = is_p1n_subdivision(fan)
    if not sub:
        failures.append("not a subdivision of (P^1)^n")
    smooth = fan.is_smooth
    if not smooth:
        failures.append("not smooth")
    std = True
    for i in range(1, r + 1):
        e = unit(n, i)
        positive = [v for v in fan.rays if v[i - 1] > 0]
        if positive != [e]:
            std = False
            failures.append(f"e_{i} is not the only ray with positive coordinate {i}")
    eta = Cone([unit(n, i) for i in range(r + 1, n + 1)], n, check=False)
    if not fan.contains(eta):
        std = False
        failures.append("Cone(e_{r+1}, ..., e_n) is missing")
    very = std
    if std:
        es = {unit(n, i): i for i in range(1, n + 1)}
        for c in fan.cones():
            if c.rayset & es.keys():
                continue
            J = [unit(n, i) for i in range(r + 1, n + 1) if fan.contains(c.with_rays(unit(n, i)))]
            if not fan.contains(c.with_rays(*J)):
                very = False
                failures.append(f"{c} with e_I for I={[es[e] for e in J]} is missing")
                break
    return StandardnessReport(sub, smooth, std, very, failures)


def admissibility_failures(fan: Fan, I0=(), I1=(), I2=()) -> list[str]:
    """Reasons ``fan`` fails to be ``(I0, I1, I2)``-admissible (empty list when it is)."""
    out = []
    if not (fan.is_pure and fan.is_smooth and is_complete(fan)):
        out.append("not complete and smooth")
        return out
    if not fan.contains([fan.axis_ray(i) for i in I0]):
        out.append(f"Cone(e_i : i in {sorted(I0)}) is missing")
    for i in I1:
        D = divisor_fan(fan, i, 1)
        if not (D.is_pure and is_complete(D)):
            out.append(f"restriction to x_{i} = 0 is not complete")
    for i in I2:
        pos = fan.axis_position(i)
        if [v for v in fan.rays if v[pos - 1] > 0] != [fan.axis_ray(i)]:
            out.append(f"e_{i} is not the only ray with positive coordinate {i}")
    return out


def is_admissible(fan: Fan, I0=(), I1=(), I2=()) -> bool:
    return not admissibility_failures(fan, I0, I1, I2)


def fan_to_json(fan: Fan) -> dict:
    index = {r: k for k, r in enumerate(fan.rays)}
    return {
        "rank": fan.n,
        "rays": [list(r) for r in fan.rays],
        "max_cones": sorted([sorted(index[r] for r in c.rays) for c in fan.maximal_cones]),
    }


def fan_from_json(data: dict | str, validate: bool = True) -> Fan:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["rank"])
    rays = [tuple(int(x) for x in r) for r in data["rays"]]
    try:
        cones = [Cone([rays[k] for k in idx], n) for idx in data["max_cones"]]
    except IndexError as exc:
        raise InvalidFan("ray index out of range") from exc
    return make_fan(cones, n) if validate else Fan(cones, n)


def maximal_cone_order(fan: Fan) -> list[Cone]:
    """Maximal cones in the order used by the JSON format."""
    index = {r: k for k, r in enumerate(fan.rays)}
    return sorted(fan.maximal_cones, key=lambda c: sorted(index[r] for r in c.rays))
