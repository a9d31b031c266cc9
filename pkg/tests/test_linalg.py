from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from crn_certify import linalg

small_int = st.integers(min_value=-4, max_value=4)


@st.composite
def int_matrices(draw, max_rows=5, max_cols=5):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return [[draw(small_int) for _ in range(c)] for _ in range(r)]


@settings(max_examples=200, deadline=None)
@given(int_matrices())
def test_rank_matches_sympy(M):
    assert linalg.rank(M) == sympy.Matrix(M).rank()


@settings(max_examples=200, deadline=None)
@given(int_matrices())
def test_nullspace_is_kernel_with_right_dimension(M):
    basis = linalg.nullspace(M)
    n = len(M[0])
    assert len(basis) == n - sympy.Matrix(M).rank()
    for x in basis:
        assert all(sum(Fraction(a) * b for a, b in zip(row, x)) == 0 for row in M)


def test_solve_exact():
    assert linalg.solve([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]


def test_minors_against_sympy():
    M = [[0, 1, 2], [3, 0, 1], [1, 1, 1]]
    expect = [sympy.Matrix(M)[:k, :k].det() for k in range(1, 4)]
    assert linalg.leading_principal_minors(M) == expect


def test_feasible_point_detects_infeasible():
    assert linalg.feasible_point([[1, 1]], [-1]) is None
    x = linalg.feasible_point([[1, 1], [1, -1]], [4, 2])
    assert x == [3, 1]


def test_positive_kernel_vector():
    assert linalg.strictly_positive_kernel_vector([[-1, 1]], 2) == [1, 1]
    assert linalg.strictly_positive_kernel_vector([[1, 0]], 2) is None
    assert linalg.strictly_positive_kernel_vector([], 3) == [1, 1, 1]


def test_floats_convert_exactly():
    assert linalg.to_fractions([[0.5]]) == [[Fraction(1, 2)]]
    assert linalg.to_fractions([[0.1]])[0][0] == Fraction(0.1)
