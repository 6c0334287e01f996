"""Exact integer linear algebra, checked against sympy and by round trips."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors as sympy_invariants

from toricchow.exactlin import (
    Cokernel,
    IntMatrix,
    cokernel_invariants,
    det,
    hermite_normal_form,
    invariant_factors,
    is_saturated,
    primitive,
    rank,
    rational_kernel,
    saturate,
    saturated_kernel_basis,
    smith_normal_form,
    solve_integer,
    wedge_coordinates,
)


def matrices(max_rows=5, max_cols=5, bound=6):
    return st.integers(1, max_rows).flatmap(
        lambda m: st.integers(1, max_cols).flatmap(
            lambda n: st.lists(st.lists(st.integers(-bound, bound), min_size=n, max_size=n), min_size=m, max_size=m)
        )
    )


def test_smith_form_small_example():
    dec = smith_normal_form([[2, 4], [6, 8]])
    assert dec.diagonal == (2, 4)
    assert dec.U @ dec.source @ dec.V == dec.S


def test_smith_form_of_zero_and_empty_matrices():
    assert smith_normal_form([[0, 0], [0, 0]]).rank == 0
    assert smith_normal_form(IntMatrix.zeros(3, 0)).diagonal == ()


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_smith_form_is_a_unimodular_diagonalization(rows):
    dec = smith_normal_form(rows)
    m, n = dec.source.shape
    assert dec.U @ dec.source @ dec.V == dec.S
    assert abs(det(dec.U.rows)) == 1 and abs(det(dec.V.rows)) == 1
    assert dec.U @ dec.U_inv == IntMatrix.identity(m)
    assert all(dec.S[i, j] == 0 for i in range(m) for j in range(n) if i != j)
    diag = [d for d in dec.diagonal if d]
    assert all(d > 0 for d in diag)
    assert all(b % a == 0 for a, b in zip(diag, diag[1:]))


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_invariant_factors_match_sympy(rows):
    expected = [abs(int(x)) for x in sympy_invariants(Matrix(rows), domain=ZZ) if x]
    assert list(invariant_factors(rows)) == sorted(expected)
    assert [d for d in smith_normal_form(rows).diagonal if d] == sorted(expected)
    assert rank(rows) == Matrix(rows).rank()


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_det_matches_sympy(rows):
    assert det(rows) == Matrix(rows).det()


def test_det_rejects_non_square():
    with pytest.raises(ValueError):
        det([[1, 2, 3], [4, 5, 6]])


def test_cokernel_of_known_presentations():
    # Z^2 / <(2, 0), (0, 3)> = Z/6 after normalization
    assert cokernel_invariants([[2, 0], [0, 3]]) == (0, (6,))
    assert cokernel_invariants([[1, 1]]) == (0, ())
    assert cokernel_invariants([[2], [0]]) == (1, (2,))


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_cokernel_coordinates_vanish_on_relations_and_invert_lifts(rows):
    A = IntMatrix(rows)
    cols = [{i: x for i, x in enumerate(col) if x} for col in A.T.rows]
    ck = Cokernel(A.nrows, cols)
    sympy_free = A.nrows - Matrix(rows).rank()
    assert ck.rank == sympy_free
    for col in cols:
        assert ck.is_zero(col)
    for b in range(ck.rank):
        coords = ck.coordinates(ck.lift(b))
        assert coords == tuple(int(k == b) for k in range(ck.rank))


def test_hermite_form_is_canonical_for_a_lattice():
    a = hermite_normal_form([[2, 4, 0], [0, 2, 2]])
    b = hermite_normal_form([[2, 6, 2], [2, 4, 0], [4, 10, 2]])
    assert a == b


@settings(max_examples=100, deadline=None)
@given(matrices(4, 4))
def test_hermite_form_spans_the_same_lattice(rows):
    n = len(rows[0])
    H = hermite_normal_form(rows, n)
    for r in rows:
        assert solve_integer(H.rows, r) is not None
    for h in H.rows:
        assert solve_integer(rows, h) is not None


@settings(max_examples=100, deadline=None)
@given(matrices(3, 5))
def test_saturated_kernel(rows):
    n = len(rows[0])
    K = saturated_kernel_basis(rows, n)
    A = IntMatrix(rows, n)
    assert K.nrows == n - Matrix(rows).rank()
    for k in K.rows:
        assert all(v == 0 for v in A.apply(k))
    assert is_saturated(K.rows, n)
    assert saturate(rational_kernel(rows, n), n) == K


def test_saturate_removes_index():
    assert saturate([[2, 0]], 2).rows == ((1, 0),)
    assert not is_saturated([[2, 0]], 2)


def test_solve_integer():
    assert solve_integer([[2, 0], [0, 3]], [4, 9]) == (2, 3)
    assert solve_integer([[2, 0], [0, 3]], [1, 0]) is None
    assert solve_integer([], [0, 0]) == ()


def test_primitive():
    assert primitive([4, -6, 2]) == (2, -3, 1)
    assert primitive([0, 0]) == (0, 0)


def test_wedge_coordinates_are_minors():
    # e1 ^ (e1 + 2 e2) = 2 e1 ^ e2
    assert wedge_coordinates([[1, 0], [1, 2]], 2) == {(0, 1): 2}
    assert wedge_coordinates([], 3) == {(): 1}
