"""Exact integer linear algebra on Python integers.

Everything here works over ``int`` only, so results never depend on
floating point rounding.  Matrices are stored as tuples of rows.

Examples
========

>>> from toricchow.exactlin import IntMatrix, smith_normal_form
>>> dec = smith_normal_form(IntMatrix([[2, 4], [6, 8]]))
>>> dec.S.rows
((2, 0), (0, 4))
>>> dec.U @ dec.source @ dec.V == dec.S
True
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Mapping, Sequence


class IntMatrix:
    """Immutable integer matrix with value equality."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable[int]], ncols: int | None = None):
        data = tuple(tuple(int(x) for x in row) for row in rows)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        if any(len(row) != ncols for row in data):
            raise ValueError("ragged matrix")
        self.rows = data
        self.nrows = len(data)
        self.ncols = ncols

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(([int(i == j) for j in range(n)] for i in range(n)), n)

    @classmethod
    def zeros(cls, m: int, n: int) -> "IntMatrix":
        return cls(([0] * n for _ in range(m)), n)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(zip(*self.rows), self.nrows) if self.nrows else IntMatrix([], 0)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.rows)

    def tolist(self) -> list[list[int]]:
        return [list(row) for row in self.rows]

    def __getitem__(self, index):
        i, j = index
        return self.rows[i][j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.T.rows
        return IntMatrix(
            ([sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.rows),
            other.ncols,
        )

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, vector)) for row in self.rows)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntMatrix) and self.shape == other.shape and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.shape, self.rows))

    def __repr__(self) -> str:
        return f"IntMatrix({self.tolist()!r})"


@dataclass(frozen=True)
class SmithDecomposition:
    """``U @ source @ V == S`` with ``S`` diagonal and each entry dividing the next."""

    source: IntMatrix
    S: IntMatrix
    U: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.S[i, i] for i in range(min(self.S.shape)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)


def _as_rows(A) -> list[list[int]]:
    if isinstance(A, IntMatrix):
        return [list(r) for r in A.rows]
    return [[int(x) for x in r] for r in A]


def smith_normal_form(A: IntMatrix | Sequence[Sequence[int]]) -> SmithDecomposition:
    """Smith normal form with unimodular transforms.

    The pivot is always a nonzero entry of least absolute value in the
    active block, ties broken by (row, column) position, so the transforms
    are a deterministic function of the input.
    """
    source = A if isinstance(A, IntMatrix) else IntMatrix(A)
    m, n = source.shape
    S = _as_rows(source)
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    Uinv = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_add(dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        S[dst] = [a + q * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]
        for row in Uinv:
            row[src] -= q * row[dst]

    def col_add(dst, src, q):
        if q == 0:
            return
        for row in S:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    def row_swap(a, b):
        if a != b:
            S[a], S[b] = S[b], S[a]
            U[a], U[b] = U[b], U[a]
            for row in Uinv:
                row[a], row[b] = row[b], row[a]

    def col_swap(a, b):
        if a != b:
            for row in S:
                row[a], row[b] = row[b], row[a]
            for row in V:
                row[a], row[b] = row[b], row[a]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = S[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        row_swap(t, best[1])
        col_swap(t, best[2])
        while True:
            p = S[t][t]
            for i in range(t + 1, m):
                if S[i][t]:
                    row_add(i, t, -(S[i][t] // p))
            for j in range(t + 1, n):
                if S[t][j]:
                    col_add(j, t, -(S[t][j] // p))
            rest = [(abs(S[i][t]), i, t) for i in range(t + 1, m) if S[i][t]]
            rest += [(abs(S[t][j]), t, j) for j in range(t + 1, n) if S[t][j]]
            if rest:
                _, i, j = min(rest)
                row_swap(t, i)
                col_swap(t, j)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if S[i][j] % p),
                None,
            )
            if bad is None:
                break
            row_add(t, bad, 1)
        if S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            U[t] = [-x for x in U[t]]
            for row in Uinv:
                row[t] = -row[t]
        t += 1
    return SmithDecomposition(
        source, IntMatrix(S, n), IntMatrix(U, m), IntMatrix(V, n), IntMatrix(Uinv, m)
    )


def _normalize_chain(values: Iterable[int]) -> tuple[int, ...]:
    """Turn the diagonal of a diagonal matrix into its invariant factors."""
    ds = sorted(abs(v) for v in values if v)
    changed = True
    while changed:
        changed = False
        for a in range(len(ds)):
            for b in range(a + 1, len(ds)):
                if ds[b] % ds[a]:
                    g = gcd(ds[a], ds[b])
                    ds[a], ds[b] = g, ds[a] * ds[b] // g
                    changed = True
        ds.sort()
    return tuple(ds)


class Cokernel:
    """The abelian group ``Z^nrows / (column span of the relations)``.

    Relations are given as sparse columns ``{row: value}``.  Unit pivots are
    eliminated sparsely; whatever is left goes through the dense Smith form.
    The object then converts integer vectors to coordinates in
    ``Z^rank + torsion`` and lifts free basis vectors back.
    """

    def __init__(self, nrows: int, relations: Iterable[Mapping[int, int]]):
        self.nrows = nrows
        cols: dict[int, dict[int, int]] = {}
        rows_of: dict[int, set[int]] = {i: set() for i in range(nrows)}
        for j, rel in enumerate(relations):
            col = {int(i): int(v) for i, v in rel.items() if v}
            if col:
                cols[j] = col
                for i in col:
                    rows_of[i].add(j)
        self._subst: list[tuple[int, dict[int, int]]] = []
        self._eliminate_units(cols, rows_of)

        self.remaining_rows = sorted(rows_of)
        pos = {r: k for k, r in enumerate(self.remaining_rows)}
        dense = [[0] * len(cols) for _ in self.remaining_rows]
        for c, j in enumerate(sorted(cols)):
            for i, v in cols[j].items():
                dense[pos[i]][c] = v
        self._pos = pos
        self._smith = smith_normal_form(IntMatrix(dense, len(cols)))
        diag = self._smith.diagonal
        k = self._smith.rank
        self.relation_rank = len(self._subst) + k
        self.rank = len(self.remaining_rows) - k
        self._k = k
        self._diag = diag[:k]
        self.torsion = tuple(d for d in self._diag if d > 1)
        self._torsion_slots = [t for t, d in enumerate(self._diag) if d > 1]

    def _eliminate_units(self, cols, rows_of):
        while True:
            pivot = None
            for j in sorted(cols, key=lambda j: (len(cols[j]), j)):
                units = [i for i, v in cols[j].items() if v in (1, -1)]
                if units:
                    i = min(units, key=lambda i: (len(rows_of[i]), i))
                    pivot = (i, j)
                    break
            if pivot is None:
                return
            i, j = pivot
            col = cols.pop(j)
            a = col[i]
            for r in col:
                rows_of[r].discard(j)
            for j2 in sorted(rows_of[i]):
                other = cols[j2]
                f = other[i] * a
                for r, v in col.items():
                    nv = other.get(r, 0) - f * v
                    if nv:
                        if r not in other:
                            rows_of[r].add(j2)
                        other[r] = nv
                    elif r in other:
                        del other[r]
                        rows_of[r].discard(j2)
                if not other:
                    del cols[j2]
            del rows_of[i]
            self._subst.append((i, {r: -a * v for r, v in col.items() if r != i}))

    def _reduce(self, vector: Mapping[int, int] | Sequence[int]) -> list[int]:
        if isinstance(vector, Mapping):
            v = {int(i): int(x) for i, x in vector.items() if x}
        else:
            v = {i: int(x) for i, x in enumerate(vector) if x}
        for i, expr in self._subst:
            c = v.pop(i, 0)
            if c:
                for r, x in expr.items():
                    v[r] = v.get(r, 0) + c * x
        dense = [0] * len(self.remaining_rows)
        for r, x in v.items():
            dense[self._pos[r]] += x
        return list(self._smith.U.apply(dense))

    def coordinates(self, vector) -> tuple[int, ...]:
        """Free coordinates of the class of ``vector``."""
        return tuple(self._reduce(vector)[self._k:])

    def torsion_coordinates(self, vector) -> tuple[int, ...]:
        w = self._reduce(vector)
        return tuple(w[t] % self._diag[t] for t in self._torsion_slots)

    def is_zero(self, vector) -> bool:
        w = self._reduce(vector)
        if any(w[self._k:]):
            return False
        return all(w[t] % d == 0 for t, d in enumerate(self._diag))

    def lift(self, b: int) -> dict[int, int]:
        """A vector whose class is the ``b``-th free basis vector."""
        col = self._smith.U_inv.column(self._k + b)
        return {r: x for r, x in zip(self.remaining_rows, col) if x}

    def invariants(self) -> tuple[int, tuple[int, ...]]:
        return self.rank, self.torsion


def _sparse_columns(A: IntMatrix) -> list[dict[int, int]]:
    return [{i: x for i, x in enumerate(col) if x} for col in A.T.rows] if A.ncols else []


def cokernel_invariants(A: IntMatrix | Sequence[Sequence[int]]) -> tuple[int, tuple[int, ...]]:
    """Free rank and torsion of ``Z^m / A Z^n`` for an ``m x n`` matrix."""
    A = A if isinstance(A, IntMatrix) else IntMatrix(A)
    return Cokernel(A.nrows, _sparse_columns(A)).invariants()


def invariant_factors(A: IntMatrix | Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Nonzero invariant factors, smallest first."""
    A = A if isinstance(A, IntMatrix) else IntMatrix(A)
    ck = Cokernel(A.nrows, _sparse_columns(A))
    return (1,) * (ck.relation_rank - len(ck.torsion)) + ck.torsion


def rank(A: IntMatrix | Sequence[Sequence[int]]) -> int:
    A = A if isinstance(A, IntMatrix) else IntMatrix(A)
    return Cokernel(A.nrows, _sparse_columns(A)).relation_rank


def sparse_rank(nrows: int, columns: Iterable[Mapping[int, int]]) -> int:
    return Cokernel(nrows, columns).relation_rank


def det(A: IntMatrix | Sequence[Sequence[int]]) -> int:
    """Determinant by fraction-free (Bareiss) elimination."""
    M = _as_rows(A)
    n = len(M)
    if any(len(r) != n for r in M):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, x)
    return tuple(v) if g in (0, 1) else tuple(x // g for x in v)


def hermite_normal_form(rows: Iterable[Sequence[int]], ncols: int | None = None) -> IntMatrix:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Zero rows are dropped, pivots are positive and entries above a pivot
    lie in ``[0, pivot)``.  Two generating sets span the same lattice iff
    their Hermite forms agree.
    """
    H = [list(r) for r in rows]
    if ncols is None:
        ncols = len(H[0]) if H else 0
    top = 0
    for c in range(ncols):
        while True:
            nz = [i for i in range(top, len(H)) if H[i][c]]
            if not nz:
                break
            i = min(nz, key=lambda i: (abs(H[i][c]), i))
            H[top], H[i] = H[i], H[top]
            done = True
            for i in range(top + 1, len(H)):
                if H[i][c]:
                    q = H[i][c] // H[top][c]
                    H[i] = [a - q * b for a, b in zip(H[i], H[top])]
                    if H[i][c]:
                        done = False
            if done:
                break
        if top < len(H) and H[top][c]:
            if H[top][c] < 0:
                H[top] = [-x for x in H[top]]
            p = H[top][c]
            for i in range(top):
                q = H[i][c] // p
                if q:
                    H[i] = [a - q * b for a, b in zip(H[i], H[top])]
            top += 1
    return IntMatrix(H[:top], ncols)


def saturated_kernel_basis(A: IntMatrix | Sequence[Sequence[int]], ncols: int | None = None) -> IntMatrix:
    """Basis (as rows) of ``{x in Z^n : A x = 0}``, in Hermite normal form.

    The integer kernel is automatically saturated: if ``k x`` lies in it then
    so does ``x``.
    """
    A = A if isinstance(A, IntMatrix) else IntMatrix(A, ncols)
    n = A.ncols if ncols is None else ncols
    if A.nrows == 0:
        return IntMatrix.identity(n)
    dec = smith_normal_form(A)
    r = dec.rank
    kernel = [dec.V.column(j) for j in range(r, n)]
    return hermite_normal_form(kernel, n)


def saturate(rows: Iterable[Sequence[int]], ncols: int) -> IntMatrix:
    """Basis of ``(span_Q rows) ∩ Z^n``."""
    rows = [list(r) for r in rows]
    if not rows:
        return IntMatrix([], ncols)
    return saturated_kernel_basis(saturated_kernel_basis(rows, ncols), ncols)


def is_saturated(rows: Sequence[Sequence[int]], ncols: int) -> bool:
    """True iff the rows are independent and span a saturated sublattice."""
    if not rows:
        return True
    dec = smith_normal_form(IntMatrix(rows, ncols))
    return dec.rank == len(rows) and all(d == 1 for d in dec.diagonal[: dec.rank])


def solve_integer(basis: Sequence[Sequence[int]], v: Sequence[int]) -> tuple[int, ...] | None:
    """Integer ``c`` with ``sum c_i basis_i == v``, or None if none exists."""
    k = len(basis)
    n = len(v)
    if k == 0:
        return () if not any(v) else None
    dec = smith_normal_form(IntMatrix(basis, n).T)  # n x k
    w = dec.U.apply(v)
    y = [0] * k
    for i, x in enumerate(w):
        d = dec.S[i, i] if i < k else 0
        if d == 0:
            if x:
                return None
        elif x % d:
            return None
        else:
            y[i] = x // d
    return dec.V.apply(y)


def rational_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Primitive integer vectors spanning the kernel over Q (reduced echelon route)."""
    M = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    top = 0
    for c in range(ncols):
        i = next((i for i in range(top, len(M)) if M[i][c]), None)
        if i is None:
            continue
        M[top], M[i] = M[i], M[top]
        p = M[top][c]
        M[top] = [x / p for x in M[top]]
        for i in range(len(M)):
            if i != top and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[top])]
        pivots.append(c)
        top += 1
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for k, c in enumerate(pivots):
            vec[c] = -M[k][f]
        den = 1
        for x in vec:
            den = den * x.denominator // gcd(den, x.denominator)
        out.append(primitive([int(x * den) for x in vec]))
    return out


def wedge_coordinates(coords: Sequence[Sequence[int]], k: int) -> dict[tuple[int, ...], int]:
    """Expand ``v_1 ∧ ... ∧ v_q`` in the basis ``b_T`` of ``∧^q`` of a rank-``k`` lattice.

    ``coords[j]`` are the coordinates of ``v_j`` in the basis ``b_1..b_k``;
    the coefficient on ``b_T`` is the minor on rows ``T``.
    """
    q = len(coords)
    out = {}
    for T in combinations(range(k), q):
        d = det([[coords[j][t] for j in range(q)] for t in T])
        if d:
            out[T] = d
    return out
