"""The complexes ``Z_{p,q}`` with terms ``⊕_{σ ∈ Σ(n-p-q)} ∧^q M(σ)``.

A basis element of ``Z_{p,q}`` is a pair ``(σ, T)`` where ``T`` is a
``q``-subset (in lexicographic order) of the Hermite basis of ``M(σ)``.  The
differential contracts with the ray ``u`` that ``τ`` adds to ``σ``:

    d(α[V(σ)]) = Σ_{σ ≺ τ} (u ⌟ α)[V(τ)].

Two independent routes compute ``u ⌟ α``: an adapted splitting
``M(σ) = Z m_0 ⊕ M(τ)`` and a direct contraction in ambient Plücker
coordinates.  Slices over the flat cones (those not in ``Σ°``) form a
subcomplex since the flat set is closed under passing to larger cones.

>>> from toricchow.fan import projective_line_power
>>> z = build_z_slice(projective_line_power(1), 0)
>>> z.d(1)
[{0: -1, 1: 1}]
>>> [h[0] for h in homology(z)]
[1, 0]
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

from .chow import FreeAbelianPresentation, chow_presentation
from .errors import AdaptedBasisFailure, MembershipViolation, NotAChainMap, PreconditionFailed
from .exactlin import (
    Cokernel,
    IntMatrix,
    hermite_normal_form,
    saturated_kernel_basis,
    solve_integer,
    sparse_rank,
    wedge_coordinates,
)
from .fan import Cone, Fan, Ray, delete_coordinate, insert_coordinate
from .ordering import sigma_split

SparseMatrix = list[dict[int, int]]  # one sparse column per source basis element


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _add(acc: dict, key, value: int) -> None:
    v = acc.get(key, 0) + value
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def _sub(v, w, c=1):
    return tuple(a - c * b for a, b in zip(v, w))


def compose(second: SparseMatrix, first: SparseMatrix) -> SparseMatrix:
    """Column-sparse product ``second ∘ first``."""
    out = []
    for col in first:
        acc: dict[int, int] = {}
        for k, c in col.items():
            for t, v in second[k].items():
                _add(acc, t, c * v)
        out.append(acc)
    return out


def _coords(basis: Sequence[Ray], v: Sequence[int]) -> tuple[int, ...]:
    c = solve_integer(basis, v)
    if c is None:
        raise AdaptedBasisFailure(f"{v} is not in the span of {basis}", v)
    return c


def _wedge_in(basis: Sequence[Ray], vectors: Sequence[Sequence[int]]) -> dict[tuple[int, ...], int]:
    """Coefficients of ``v_1 ∧ ... ∧ v_q`` on the wedge basis of ``basis``."""
    coords = [_coords(basis, v) for v in vectors]
    return wedge_coordinates(coords, len(basis)) if vectors else {(): 1}


class ZComplexSlice:
    """``Z_{p,•}(Σ)`` (or its flat part) with all differentials."""

    def __init__(self, fan: Fan, p: int, flat: bool = False, r: int | None = None, route: str = "adapted"):
        if flat and r is None:
            raise PreconditionFailed("a flat slice needs r")
        self.fan = fan
        self.p = p
        self.flat = flat
        self.r = r
        self.route = route
        self.n = fan.n
        self.flat_cones = sigma_split(fan, r)[1] if flat else None
        self.top = self.n - p  # largest q with a nonzero term

    def cones(self, q: int) -> list[Cone]:
        dim = self.n - self.p - q
        if dim < 0 or q < 0:
            return []
        cs = self.fan.cones(dim)
        if self.flat:
            cs = [c for c in cs if c in self.flat_cones]
        return cs

    def basis(self, q: int) -> list[tuple[Cone, tuple[int, ...]]]:
        return self._basis(q)[0]

    def index(self, q: int) -> dict[tuple[Cone, tuple[int, ...]], int]:
        return self._basis(q)[1]

    def _basis(self, q: int):
        cache = self.__dict__.setdefault("_basis_cache", {})
        if q not in cache:
            out = []
            for c in self.cones(q):
                k = self.n - c.dim
                for T in combinations(range(k), q):
                    out.append((c, T))
            cache[q] = (out, {b: j for j, b in enumerate(out)})
        return cache[q]

    def rank(self, q: int) -> int:
        return len(self.basis(q))

    # -- contraction routes -------------------------------------------------

    def _contract_adapted(self, sigma: Cone, tau: Cone, u: Ray, T, shift: int) -> dict[tuple[int, ...], int]:
        Ms = sigma.dual_lattice_basis
        Mt = tau.dual_lattice_basis
        m0 = next((m for m in Ms if _dot(u, m) in (1, -1)), None)
        if m0 is None:
            c = solve_integer([[_dot(u, m)] for m in Ms], [1])
            if c is None:
                raise AdaptedBasisFailure("no m0 with <u, m0> = 1", (sigma, tau))
            m0 = tuple(sum(ci * m[j] for ci, m in zip(c, Ms)) for j in range(self.n))
        elif _dot(u, m0) == -1:
            m0 = tuple(-x for x in m0)
        if _dot(u, m0) != 1:
            raise AdaptedBasisFailure("no m0 with <u, m0> = 1", (sigma, tau))
        if shift and Mt:
            m0 = tuple(a + shift * b for a, b in zip(m0, Mt[0]))
        vs = [Ms[t] for t in T]
        cs = [_dot(u, v) for v in vs]
        ws = [_sub(v, m0, c) for v, c in zip(vs, cs)]
        out: dict[tuple[int, ...], int] = {}
        for j, c in enumerate(cs):
            if not c:
                continue
            sign = -1 if j % 2 else 1
            rest = ws[:j] + ws[j + 1 :]
            for S, v in _wedge_in(Mt, rest).items():
                _add(out, S, sign * c * v)
        return out

    def _contract_ambient(self, sigma: Cone, tau: Cone, u: Ray, T) -> dict[tuple[int, ...], int]:
        Ms = sigma.dual_lattice_basis
        Mt = tau.dual_lattice_basis
        n = self.n
        vs = [Ms[t] for t in T]
        q = len(vs)
        # Plücker coordinates of u ⌟ α in ∧^{q-1} Z^n
        amb: dict[tuple[int, ...], int] = {}
        for j, v in enumerate(vs):
            c = _dot(u, v)
            if c:
                sign = -1 if j % 2 else 1
                rest = vs[:j] + vs[j + 1 :]
                for S, x in wedge_coordinates(rest, n).items() if rest else {(): 1}.items():
                    _add(amb, S, sign * c * x)
        if not amb:
            return {}
        # express in the wedge basis of M(τ) by matching Plücker coordinates
        keys = list(combinations(range(n), q - 1))
        Ts = list(combinations(range(len(Mt)), q - 1))
        basis_vecs = []
        for S in Ts:
            pl = wedge_coordinates([Mt[s] for s in S], n) if S else {(): 1}
            basis_vecs.append([pl.get(k, 0) for k in keys])
        target = [amb.get(k, 0) for k in keys]
        sol = solve_integer(basis_vecs, target)
        if sol is None:
            raise AdaptedBasisFailure("contraction does not lie in the wedge of M(τ)", (sigma, tau))
        return {S: c for S, c in zip(Ts, sol) if c}

    # -- differentials -------------------------------------------------------

    def _d(self, q: int, route: str, shift: int = 0) -> SparseMatrix:
        src = self.basis(q)
        if q <= 0:
            return [{} for _ in src]
        tgt_index = self.index(q - 1)
        up: dict[Cone, list[tuple[Cone, Ray]]] = defaultdict(list)
        for tau in self.cones(q - 1):
            for u in tau.rays:
                up[tau.without(u)].append((tau, u))
        cols = []
        for sigma, T in src:
            col: dict[int, int] = {}
            for tau, u in up.get(sigma, []):
                if route == "adapted":
                    img = self._contract_adapted(sigma, tau, u, T, shift)
                else:
                    img = self._contract_ambient(sigma, tau, u, T)
                for S, c in img.items():
                    _add(col, tgt_index[(tau, S)], c)
            cols.append(col)
        return cols

    def d(self, q: int) -> SparseMatrix:
        cache = self.__dict__.setdefault("_d_cache", {})
        if q not in cache:
            cache[q] = self._d(q, self.route)
        return cache[q]

    def check_square_zero(self) -> bool:
        return all(all(not c for c in compose(self.d(q - 1), self.d(q))) for q in range(2, self.top + 1))

    def check_route_independence(self) -> bool:
        """The differential does not depend on ``m_0`` nor on the contraction route."""
        for q in range(1, self.top + 1):
            base = self.d(q)
            if self._d(q, "adapted", shift=1) != base or self._d(q, "ambient") != base:
                return False
        return True

    # -- homology -----------------------------------------------------------

    def h0(self) -> Cokernel:
        return Cokernel(self.rank(0), self.d(1))

    def homology(self, q: int) -> tuple[int, tuple[int, ...]]:
        dim = self.rank(q)
        r_out = sparse_rank(self.rank(q - 1), self.d(q)) if q > 0 else 0
        r_in = sparse_rank(dim, self.d(q + 1))
        torsion = Cokernel(dim, self.d(q + 1)).torsion
        return dim - r_out - r_in, torsion

    def h0_presentation(self) -> FreeAbelianPresentation:
        return FreeAbelianPresentation([c for c, _ in self.basis(0)], self.d(1))


def build_z_slice(fan: Fan, p: int, flat: bool = False, r: int | None = None) -> ZComplexSlice:
    z = ZComplexSlice(fan, p, flat, r)
    if not z.check_square_zero():
        raise NotAChainMap("d ∘ d is not zero")
    return z


def homology(z: ZComplexSlice) -> list[tuple[int, tuple[int, ...]]]:
    return [z.homology(q) for q in range(z.top + 1)]


def h0_matches_chow(z: ZComplexSlice) -> bool:
    """For a full slice: the relations of ``H_0`` and of ``CH_p`` span the same lattice."""
    pres = chow_presentation(z.fan, z.p)
    if [c for c, _ in z.basis(0)] != pres.generators:
        return False
    n = len(pres.generators)

    def hnf(cols):
        return hermite_normal_form([[c.get(i, 0) for i in range(n)] for c in cols if c], n)

    return hnf(z.d(1)) == hnf(pres.relations)


# ---------------------------------------------------------------------------
# chain maps


@dataclass
class ChainMap:
    source: ZComplexSlice
    target: ZComplexSlice
    matrices: dict[int, SparseMatrix]
    name: str = ""

    def commutes(self) -> int | None:
        """First degree where ``d F != F d``, or None."""
        for q, F in self.matrices.items():
            if q == 0:
                continue
            left = compose(self.target.d(q), F)
            right = compose(self.matrices.get(q - 1, [{} for _ in self.source.basis(q - 1)]), self.source.d(q))
            if left != right:
                return q
        return None

    def verify(self) -> None:
        q = self.commutes()
        if q is not None:
            raise NotAChainMap(f"{self.name} does not commute with d in degree {q}")

    def then(self, other: "ChainMap") -> "ChainMap":
        return ChainMap(
            self.source,
            other.target,
            {q: compose(other.matrices[q], F) for q, F in self.matrices.items()},
            f"{other.name}∘{self.name}",
        )

    def __add__(self, other: "ChainMap") -> "ChainMap":
        out = {}
        for q, F in self.matrices.items():
            G = other.matrices[q]
            cols = []
            for a, b in zip(F, G):
                acc = dict(a)
                for k, v in b.items():
                    _add(acc, k, v)
                cols.append(acc)
            out[q] = cols
        return ChainMap(self.source, self.target, out, f"{self.name}+{other.name}")

    def scaled(self, c: int) -> "ChainMap":
        return ChainMap(
            self.source, self.target, {q: [{k: c * v for k, v in col.items()} for col in F] for q, F in self.matrices.items()}, self.name
        )

    def is_zero(self) -> bool:
        return all(not c for F in self.matrices.values() for c in F)


def _lattice_map(
    source: ZComplexSlice,
    target: ZComplexSlice,
    cone_map: Callable[[Cone], Cone | None],
    functional_map: Callable[[Ray], Ray],
    name: str,
) -> ChainMap:
    """``α[V(σ)] ↦ f^*α [V(g(σ))]`` degree by degree; ``g(σ) = None`` means ``0``."""
    mats = {}
    for q in range(source.top + 1):
        tindex = target.index(q)
        present = set(target.cones(q))
        cols = []
        for sigma, T in source.basis(q):
            tau = cone_map(sigma)
            if tau is None:
                cols.append({})
                continue
            if tau not in present:
                raise MembershipViolation(f"{name}: image of {sigma} is {tau}, which is not a basis cone", (sigma, tau))
            Ms = sigma.dual_lattice_basis
            images = [functional_map(Ms[t]) for t in T]
            col = {}
            for S, c in _wedge_in(tau.dual_lattice_basis, images).items():
                _add(col, tindex[(tau, S)], c)
            cols.append(col)
        mats[q] = cols
    return ChainMap(source, target, mats, name)


def _cone(rays, n) -> Cone:
    return Cone(rays, n, check=False)


def delta1_map(source: ZComplexSlice, i: int, target: ZComplexSlice) -> ChainMap:
    """``δ_{i,1}^*``: keep cones inside ``x_i = 0`` and restrict functionals."""
    n = source.n

    def cone_map(s):
        if all(v[i - 1] == 0 for v in s.rays):
            return _cone([delete_coordinate(v, i) for v in s.rays], n - 1)
        return None

    F = _lattice_map(source, target, cone_map, lambda m: delete_coordinate(m, i), f"δ_{i},1")
    F.verify()
    return F


def rho_map(source: ZComplexSlice, i: int, target: ZComplexSlice) -> ChainMap:
    """``ρ_i^*``: insert a zero ``i``-th coordinate into rays and functionals."""
    n = target.n
    F = _lattice_map(
        source, target, lambda s: _cone([insert_coordinate(v, i) for v in s.rays], n), lambda m: insert_coordinate(m, i), f"ρ_{i}"
    )
    return F


def nu_map(source: ZComplexSlice, i: int, target: ZComplexSlice) -> ChainMap:
    """``ν_i^*``: for cones inside ``x_i = 0`` duplicate the ``i``-th entry of functionals;
    otherwise ``ρ_i^* + ρ_{i+1}^*``."""
    n = target.n

    def inside(s):
        return all(v[i - 1] == 0 for v in s.rays)

    dup = _lattice_map(
        source,
        target,
        lambda s: _cone([insert_coordinate(v, i) for v in s.rays], n) if inside(s) else None,
        lambda m: insert_coordinate(m, i + 1, m[i - 1]),
        f"ν_{i}",
    )
    outside = [
        _lattice_map(
            source,
            target,
            lambda s, k=k: None if inside(s) else _cone([insert_coordinate(v, k) for v in s.rays], n),
            lambda m, k=k: insert_coordinate(m, k),
            f"ρ_{k}",
        )
        for k in (i, i + 1)
    ]
    F = dup + outside[0] + outside[1]
    F.name = f"ν_{i}"
    return F


def structure_map(kind: str, i: int, source: ZComplexSlice, target: ZComplexSlice) -> ChainMap:
    if kind == "delta":
        return delta1_map(source, i, target)
    if kind == "rho":
        return rho_map(source, i, target)
    if kind == "nu":
        return nu_map(source, i, target)
    raise ValueError(f"unknown structure map {kind!r}")


def membership_failures(source: ZComplexSlice, i: int, target_fan: Fan, r: int, kind: str = "rho") -> list[tuple[Cone, Cone]]:
    """Basis cones whose image under ``ρ_i`` (or ``ν_i``) is not flat in the target."""
    flat = sigma_split(target_fan, r)[1]
    n = target_fan.n
    out = []
    for sigma in {s for q in range(source.top + 1) for s, _ in source.basis(q)}:
        ks = [i] if kind == "rho" or all(v[i - 1] == 0 for v in sigma.rays) else [i, i + 1]
        for k in ks:
            tau = _cone([insert_coordinate(v, k) for v in sigma.rays], n)
            if tau not in flat:
                out.append((sigma, tau))
    return sorted(out, key=lambda st: (st[0].dim, st[0].rays))


# ---------------------------------------------------------------------------
# the Θ tower: simplicial identities and acyclicity


class ThetaTower:
    """``Θ_{k,r,d}`` for ``k = r, r+1, ...`` with cached slices."""

    def __init__(self, r: int, d: Sequence[int]):
        from .subdivide import build_theta

        self._build = build_theta
        self.r = r
        self.d = tuple(d)
        self._fans: dict[int, Fan] = {}
        self._slices: dict[tuple[int, int, bool], ZComplexSlice] = {}

    def fan(self, k: int) -> Fan:
        if k not in self._fans:
            self._fans[k] = self._build(k, self.r, self.d).fan
        return self._fans[k]

    def slice(self, k: int, p: int, flat: bool = True) -> ZComplexSlice:
        key = (k, p, flat)
        if key not in self._slices:
            self._slices[key] = build_z_slice(self.fan(k), p, flat=flat, r=self.r)
        return self._slices[key]

    def faces_match(self, k: int) -> list[int]:
        """Axes ``i > r`` for which the cones of ``Θ_k`` inside ``x_i = 0`` are not ``Θ_{k-1}``."""
        from .fan import divisor_fan

        return [i for i in range(self.r + 1, k + 1) if divisor_fan(self.fan(k), i, 1) != self.fan(k - 1)]


def _inclusion(source: ZComplexSlice, target: ZComplexSlice) -> dict[int, SparseMatrix]:
    return {q: [{target.index(q)[b]: 1} for b in source.basis(q)] for q in range(source.top + 1)}


@dataclass
class IdentityInstance:
    lemma: str
    N: int
    i: int
    j: int
    p: int
    ok: bool
    witness: object = None


@dataclass
class SimplicialReport:
    r: int
    d: tuple[int, ...]
    n_max: int
    instances: list[IdentityInstance] = field(default_factory=list)
    face_mismatches: dict[int, list[int]] = field(default_factory=dict)
    membership: list[dict] = field(default_factory=list)

    @property
    def identities_hold(self) -> bool:
        return all(x.ok for x in self.instances) and not any(self.face_mismatches.values())

    @property
    def flat_valued(self) -> bool:
        return not any(m["failures"] for m in self.membership)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "d": list(self.d),
            "n_max": self.n_max,
            "identities_hold": self.identities_hold,
            "instances": [
                {"lemma": x.lemma, "N": x.N, "i": x.i, "j": x.j, "p": x.p, "ok": x.ok} for x in self.instances
            ],
            "membership": [
                {k: (v if k != "failures" else [[list(map(list, s.rays)), list(map(list, t.rays))] for s, t in v]) for k, v in m.items()}
                for m in self.membership
            ],
        }


def _matrices_equal(a: dict[int, SparseMatrix], b: dict[int, SparseMatrix]) -> int | None:
    for q in a:
        if a[q] != b.get(q, [{} for _ in a[q]]):
            return q
    return None


def verify_simplicial_identities(r: int, d: Sequence[int], n_max: int, tower: ThetaTower | None = None) -> SimplicialReport:
    """Check ``δ_{i,1}^*ρ_j^*`` and ``δ_{i,1}^*ν_j^*`` against their closed forms.

    Sources are flat slices of ``Θ_{N-1}``; all maps land in full slices so
    that the identities are compared even where ``ρ`` leaves the flat part.
    Whether ``ρ_j`` and ``ν_j`` stay flat is recorded separately.
    """
    T = tower or ThetaTower(r, d)
    rep = SimplicialReport(r, tuple(d), n_max)
    for N in range(r + 1, n_max + 1):
        rep.face_mismatches[N] = T.faces_match(N)
        for p in range(0, N):
            src = T.slice(N - 1, p, True)
            ident = ChainMap(src, T.slice(N - 1, p, False), _inclusion(src, T.slice(N - 1, p, False)), "id")

            def delta(k, pp, i, flat_src):
                return delta1_map(T.slice(k, pp, flat_src), i, T.slice(k - 1, pp - 1, flat_src))

            for j in range(r + 1, N + 1):
                rho = rho_map(src, j, T.slice(N, p + 1, False))
                fails = membership_failures(src, j, T.fan(N), r, "rho")
                rep.membership.append({"map": "rho", "j": j, "from": N - 1, "p": p, "failures": fails})
                for i in range(r + 1, N + 1):
                    left = rho.then(delta(N, p + 1, i, False))
                    if j == i:
                        right = ident
                    else:
                        k = i - 1 if j < i else i
                        jj = j if j < i else j - 1
                        if N - 2 < r:
                            continue
                        dd = delta1_map(src, k, T.slice(N - 2, p - 1, True))
                        right = dd.then(rho_map(T.slice(N - 2, p - 1, True), jj, T.slice(N - 1, p, False)))
                    q = _matrices_equal(left.matrices, right.matrices)
                    rep.instances.append(IdentityInstance("rho", N, i, j, p, q is None, q))
            for j in range(r + 1, N):
                nu = nu_map(src, j, T.slice(N, p + 1, False))
                fails = membership_failures(src, j, T.fan(N), r, "nu")
                rep.membership.append({"map": "nu", "j": j, "from": N - 1, "p": p, "failures": fails})
                for i in range(r + 1, N + 1):
                    left = nu.then(delta(N, p + 1, i, False))
                    if j in (i - 1, i):
                        right = ident
                    else:
                        if N - 2 < r:
                            continue
                        k, jj = (i - 1, j) if j < i - 1 else (i, j - 1)
                        dd = delta1_map(src, k, T.slice(N - 2, p - 1, True))
                        right = dd.then(nu_map(T.slice(N - 2, p - 1, True), jj, T.slice(N - 1, p, False)))
                    q = _matrices_equal(left.matrices, right.matrices)
                    rep.instances.append(IdentityInstance("nu", N, i, j, p, q is None, q))
    return rep


def _dense(cols: SparseMatrix, nrows: int) -> list[list[int]]:
    return [[c.get(i, 0) for c in cols] for i in range(nrows)]


def _complex_homology(dims: list[int], maps: dict[int, list[list[int]]], degrees) -> dict[int, dict]:
    """Homology of ``C_m`` with ``maps[m]: C_m -> C_{m-1}`` (dense, rows = target)."""
    from .exactlin import rank as mat_rank

    out = {}
    for m in degrees:
        out_map = maps.get(m)
        in_map = maps.get(m + 1)
        r_out = mat_rank(out_map) if out_map and dims[m - 1] and dims[m] else 0
        r_in = mat_rank(in_map) if in_map and dims[m] and dims[m + 1] else 0
        cols = [dict((i, row[j]) for i, row in enumerate(in_map) if row[j]) for j in range(dims[m + 1])] if in_map and dims[m] else []
        torsion = Cokernel(dims[m], cols).torsion
        rk = dims[m] - r_out - r_in
        witness = None
        if rk or torsion:
            witness = _non_boundary(dims, out_map, cols, m)
        out[m] = {"rank": rk, "torsion": list(torsion), "witness": witness}
    return out


def _non_boundary(dims, out_map, in_cols, m) -> list[int] | None:
    """A cycle in degree ``m`` that is not a boundary."""
    n = dims[m]
    if out_map and dims[m - 1]:
        kernel = saturated_kernel_basis(IntMatrix(out_map, n), n).rows
    else:
        kernel = tuple(tuple(int(a == b) for b in range(n)) for a in range(n))
    image = Cokernel(n, in_cols)
    for v in kernel:
        if not image.is_zero(list(v)):
            return list(v)
    return None


@dataclass
class AcyclicityReport:
    r: int
    d: tuple[int, ...]
    p: int
    m_max: int
    hypothesis_met: bool
    square_zero: bool
    z_level: dict[int, dict[int, dict]]
    ch_level: dict[int, dict]
    ch_groups: list[tuple[int, tuple[int, ...]]]

    @staticmethod
    def _exact(h: dict[int, dict]) -> bool:
        return all(v["rank"] == 0 and not v["torsion"] for v in h.values())

    @property
    def z_exact(self) -> bool:
        return all(self._exact(h) for h in self.z_level.values())

    @property
    def ch_exact(self) -> bool:
        return self._exact(self.ch_level)

    @property
    def routes_agree(self) -> bool:
        return self.z_exact == self.ch_exact

    @property
    def ok(self) -> bool:
        return self.hypothesis_met and self.square_zero and self.z_exact and self.ch_exact

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "d": list(self.d),
            "p": self.p,
            "m_max": self.m_max,
            "hypothesis_met": self.hypothesis_met,
            "square_zero": self.square_zero,
            "z_exact": self.z_exact,
            "ch_exact": self.ch_exact,
            "routes_agree": self.routes_agree,
            "z_level": {str(q): {str(m): v for m, v in h.items()} for q, h in self.z_level.items()},
            "ch_level": {str(m): v for m, v in self.ch_level.items()},
            "ch_groups": [[rk, list(t)] for rk, t in self.ch_groups],
            "note": "top truncation degree excluded from the exactness claim",
        }


def delta_star(T: ThetaTower, m: int, p: int, flat: bool = True) -> ChainMap | None:
    """``δ* = Σ_{i=r+1}^{r+m} (-1)^{i-r} δ_{i,1}^*`` from degree ``m`` to ``m-1``."""
    r = T.r
    if m == 0:
        return None
    src = T.slice(r + m, p + m, flat)
    tgt = T.slice(r + m - 1, p + m - 1, flat)
    total = None
    for i in range(r + 1, r + m + 1):
        term = delta1_map(src, i, tgt).scaled((-1) ** (i - r))
        total = term if total is None else total + term
    total.name = "δ*"
    return total


def verify_acyclicity(r: int, d: Sequence[int], p: int, m_max: int, tower: ThetaTower | None = None) -> AcyclicityReport:
    """Exactness of the ``δ*`` complexes built from ``Θ_{r+m,r,d}``, ``m = 0..m_max``.

    Inner degrees ``0..m_max-1`` are checked; ``m_max`` is where the
    truncation cuts the complex off.  The flat complexes are checked for
    each ``q`` and the induced complex of ``CH♭`` groups separately.
    """
    T = tower or ThetaTower(r, d)
    hyp = 0 <= p <= r - 1 and len(T.d) > 0
    maps = {m: delta_star(T, m, p) for m in range(1, m_max + 1)}
    square_zero = all(
        all(not c for c in compose(maps[m - 1].matrices[q], maps[m].matrices[q]))
        for m in range(2, m_max + 1)
        for q in maps[m].matrices
    )
    degrees = range(0, m_max)
    qmax = max(T.slice(r + m, p + m).top for m in range(m_max + 1))
    z_level = {}
    for q in range(qmax + 1):
        dims = [T.slice(r + m, p + m).rank(q) for m in range(m_max + 1)] + [0]
        dense = {m: _dense(maps[m].matrices.get(q, []), dims[m - 1]) for m in range(1, m_max + 1)}
        z_level[q] = _complex_homology(dims, dense, degrees)
    # the induced complex on H_0 = CH♭
    cks = [T.slice(r + m, p + m).h0() for m in range(m_max + 1)]
    ch_dims = [ck.rank for ck in cks] + [0]
    ch_maps = {}
    for m in range(1, m_max + 1):
        F0 = maps[m].matrices[0]
        cols = []
        for b in range(cks[m].rank):
            img: dict[int, int] = {}
            for k, c in cks[m].lift(b).items():
                for t, v in F0[k].items():
                    _add(img, t, c * v)
            cols.append(cks[m - 1].coordinates(img))
        ch_maps[m] = [[col[i] for col in cols] for i in range(ch_dims[m - 1])]
    ch_level = _complex_homology(ch_dims, ch_maps, degrees)
    groups = [(ck.rank, ck.torsion) for ck in cks]
    for m, (_, tors) in enumerate(groups):
        if tors:
            ch_level.setdefault(m, {"rank": 0, "torsion": [], "witness": None})["torsion"] = list(tors)
    return AcyclicityReport(r, T.d, p, m_max, hyp, square_zero, z_level, ch_level, groups)
