import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasedsim.errors import DimensionMismatch, SingularMatrix
from phasedsim.f2 import (
    BitMatrix,
    BitVector,
    inverse,
    inverse_transpose,
    is_reduced_column_echelon,
    kernel_basis,
    outer,
    rank,
    rref_with_transform,
    solve,
)


def bitmatrix(rows, cols):
    return st.lists(
        st.integers(min_value=0, max_value=(1 << cols) - 1), min_size=rows, max_size=rows
    ).map(lambda rs: BitMatrix(rows, cols, rs))


matrices = st.tuples(st.integers(0, 6), st.integers(0, 6)).flatmap(
    lambda rc: bitmatrix(rc[0], rc[1])
)


def invertible_from_ops(n, ops):
    """Build an invertible matrix as a product of elementary row operations."""
    rows = [1 << i for i in range(n)]
    for kind, i, j in ops:
        i, j = i % n, j % n
        if i == j:
            continue
        if kind:
            rows[i], rows[j] = rows[j], rows[i]
        else:
            rows[i] ^= rows[j]
    return BitMatrix(n, n, rows)


def invertibles(n):
    return st.lists(
        st.tuples(st.booleans(), st.integers(0, n - 1), st.integers(0, n - 1)),
        max_size=4 * n,
    ).map(lambda ops: invertible_from_ops(n, ops))


def test_rref_already_canonical():
    m = BitMatrix.from_rows([[1, 0], [0, 1]])
    r, t, profile = rref_with_transform(m)
    assert r == m
    assert t == BitMatrix.identity(2)
    assert profile == (0, 1)


def test_rref_hand_example():
    m = BitMatrix.from_rows([[1, 1], [0, 1]])
    r, t, profile = rref_with_transform(m)
    assert r == BitMatrix.from_rows([[1, 0], [0, 1]])
    assert m @ t == r
    assert profile == (0, 1)


def test_rref_zero_matrix():
    m = BitMatrix.zeros(2, 2)
    r, t, profile = rref_with_transform(m)
    assert r.is_zero()
    assert t == BitMatrix.identity(2)
    assert profile == ()


@given(matrices)
@settings(max_examples=300)
def test_rref_properties(m):
    r, t, profile = rref_with_transform(m)
    assert m @ t == r
    assert t @ inverse(t) == BitMatrix.identity(m.cols)
    assert is_reduced_column_echelon(r)
    assert list(profile) == sorted(profile)
    assert len(profile) == rank(m)


def test_inverse_examples():
    assert inverse(BitMatrix.identity(3)) == BitMatrix.identity(3)
    a = BitMatrix.from_rows([[1, 1], [0, 1]])
    assert inverse(a) == a
    assert a @ inverse(a) == BitMatrix.identity(2)
    with pytest.raises(SingularMatrix):
        inverse(BitMatrix.from_rows([[1, 1], [1, 1]]))


def test_inverse_transpose_examples():
    assert inverse_transpose(BitMatrix.identity(2)) == BitMatrix.identity(2)
    a = BitMatrix.from_rows([[1, 1], [0, 1]])
    assert inverse_transpose(a) == BitMatrix.from_rows([[1, 0], [1, 1]])
    swap = BitMatrix.from_rows([[0, 1], [1, 0]])
    assert inverse_transpose(swap) == swap


@given(st.integers(1, 6).flatmap(invertibles))
@settings(max_examples=150)
def test_inverse_involution(a):
    assert inverse(inverse(a)) == a
    assert inverse_transpose(a) == inverse(a.transpose())
    assert inverse_transpose(a) == inverse(a).transpose()


@given(st.integers(1, 64), st.randoms(use_true_random=False))
@settings(max_examples=200)
def test_inner_product_bilinear(n, rng):
    u = BitVector(n, rng.getrandbits(n))
    v = BitVector(n, rng.getrandbits(n))
    w = BitVector(n, rng.getrandbits(n))
    assert (u ^ v).dot(w) == u.dot(w) ^ v.dot(w)


def test_vector_basics():
    v = BitVector.from_string("1011")
    assert v.to_string() == "1011"
    assert v.weight() == 3
    assert v.support() == [0, 2, 3]
    assert v[0] == 1 and v[1] == 0
    assert v.set(1, 1).to_string() == "1111"
    assert v.concat(BitVector.from_string("01")).to_string() == "101101"
    assert v.take([3, 0]).to_string() == "11"
    with pytest.raises(DimensionMismatch):
        v.dot(BitVector(3))


def test_matrix_serialization_roundtrip():
    m = BitMatrix.from_rows([[1, 0, 1], [0, 1, 1]])
    assert m.to_strings() == ["101", "011"]
    assert BitMatrix.from_strings(m.to_strings()) == m


def test_matmul_and_vec():
    a = BitMatrix.from_rows([[1, 1], [0, 1]])
    b = BitMatrix.from_rows([[1, 0], [1, 1]])
    assert a @ b == BitMatrix.from_rows([[0, 1], [1, 1]])
    v = BitVector.from_string("11")
    assert a.mul_vec(v).to_string() == "01"
    assert a.vec_mul(v).to_string() == "10"
    assert a.transpose().mul_vec(v) == a.vec_mul(v)


def test_outer_and_kernel_and_solve():
    u = BitVector.from_string("101")
    v = BitVector.from_string("11")
    m = outer(u, v)
    assert m.to_strings() == ["11", "00", "11"]
    a = BitMatrix.from_rows([[1, 1, 0], [0, 0, 1]])
    ker = kernel_basis(a)
    assert len(ker) == 1
    assert a.mul_vec(ker[0]).is_zero()
    b = BitVector.from_string("10")
    x = solve(a, b)
    assert a.mul_vec(x) == b
    with pytest.raises(SingularMatrix):
        solve(BitMatrix.from_rows([[1, 1], [1, 1]]), BitVector.from_string("10"))
