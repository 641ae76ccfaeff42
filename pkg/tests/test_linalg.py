import random
from fractions import Fraction

import numpy
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from qoa.linalg import (RowSpace, SparseMatrix, exact_rank, exact_signature, kernel_basis,
                        rank_of_vectors)

small = st.integers(-3, 3)


def matrices(max_dim=6):
    return st.integers(1, max_dim).flatmap(
        lambda r: st.integers(1, max_dim).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_rank_matches_sympy(rows):
    m = SparseMatrix.from_dense(rows)
    assert exact_rank(m) == sympy.Matrix(rows).rank()


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_kernel_basis_is_a_basis(rows):
    m = SparseMatrix.from_dense(rows)
    ker = kernel_basis(m)
    assert len(ker) == m.ncols - exact_rank(m)
    for v in ker:
        assert not m.apply(v)
    assert rank_of_vectors(ker) == len(ker) if ker else True


def test_rowspace_express_roundtrip():
    rng = random.Random(3)
    vecs = [{j: Fraction(rng.randint(-2, 2)) for j in range(6)} for _ in range(4)]
    space = RowSpace(track=True)
    for v in vecs:
        space.add(v)
    target = {}
    for i, c in [(0, 2), (3, -1)]:
        for j, x in vecs[i].items():
            target[j] = target.get(j, 0) + c * x
    combo = space.express(target)
    back = {}
    for i, c in combo.items():
        for j, x in vecs[i].items():
            back[j] = back.get(j, 0) + c * x
    assert {k: v for k, v in back.items() if v} == {k: v for k, v in target.items() if v}
    assert space.express({7: 1}) is None


@settings(max_examples=60, deadline=None)
@given(matrices(5))
def test_signature_matches_eigenvalues(rows):
    a = sympy.Matrix(rows)
    g = a * a.T - 2 * sympy.eye(a.rows)  # symmetric, indefinite in general
    pos, neg, null = exact_signature(SparseMatrix.from_dense(g.tolist()))
    eig = numpy.linalg.eigvalsh(numpy.array(g.tolist(), dtype=float))
    want_pos = int((eig > 1e-9).sum())
    want_neg = int((eig < -1e-9).sum())
    assert (pos, neg) == (want_pos, want_neg)
    assert pos + neg + null == a.rows


def test_sparse_matrix_algebra_and_serialisation():
    a = SparseMatrix.from_dense([[1, 2], [0, Fraction(1, 3)]])
    b = SparseMatrix.identity(2)
    assert (a @ b) == a
    assert (a - a).is_zero()
    assert a.transpose().transpose() == a
    assert SparseMatrix.from_triplets(a.to_triplets()) == a
    with pytest.raises(ValueError):
        exact_signature(a)
