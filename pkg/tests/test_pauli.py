import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasedsim.dense_oracle import cpauli_matrix, pauli_matrix
from phasedsim.errors import DimensionMismatch, NonHermitian
from phasedsim.f2 import BitVector
from phasedsim.pauli import ControlledPauli, PauliExponent, PauliOperator, comm, mul


def all_paulis(n):
    for s in range(4):
        for x in range(1 << n):
            for z in range(1 << n):
                yield PauliOperator(s, BitVector(n, x), BitVector(n, z))


def paulis(n):
    return st.tuples(
        st.integers(0, 3), st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1)
    ).map(lambda t: PauliOperator(t[0], BitVector(n, t[1]), BitVector(n, t[2])))


def P(s, n=None):
    return PauliOperator.from_string(s, n)


def test_mul_examples():
    x, z = P("X0"), P("Z0")
    assert x * z == PauliOperator(0, BitVector(1, 1), BitVector(1, 1))
    assert z * x == PauliOperator(2, BitVector(1, 1), BitVector(1, 1))
    y = P("Y0")
    assert y.s == 1
    assert y * y == PauliOperator.identity(1)


def test_mul_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        P("X0") * P("X0*X1")


def test_comm_examples():
    assert comm(P("X0", 1), P("Z0", 1)) == 1
    assert comm(P("X0*X1"), P("Z0*Z1")) == 0
    assert comm(P("Y0", 2), P("X0*X1")) == 1


def test_mul_exhaustive_dense_2q():
    for a in all_paulis(2):
        for b in all_paulis(2):
            prod = a * b
            lhs = pauli_matrix(a) @ pauli_matrix(b)
            assert lhs == pauli_matrix(prod)


def test_comm_matches_dense_2q():
    for a in all_paulis(2):
        for b in all_paulis(2):
            ab = pauli_matrix(a) @ pauli_matrix(b)
            ba = pauli_matrix(b) @ pauli_matrix(a)
            assert comm(a, b) == (0 if ab == ba else 1)


@given(st.integers(3, 4).flatmap(lambda n: st.tuples(paulis(n), paulis(n), paulis(n))))
@settings(max_examples=120)
def test_mul_associative_randomized(abc):
    a, b, c = abc
    assert (a * b) * c == a * (b * c)
    assert pauli_matrix(a * b) == pauli_matrix(a) @ pauli_matrix(b)


@given(st.integers(1, 4).flatmap(paulis))
@settings(max_examples=150)
def test_hermitian_square_and_dagger(p):
    assert pauli_matrix(p.dagger()) == pauli_matrix(p).dagger()
    if p.is_hermitian():
        assert p * p == PauliOperator.identity(p.n)


def test_cpauli_conjugate_examples():
    # CX with control 0, target 1 is controlled-(Z0, X1)
    cx = ControlledPauli(P("Z0", 2), P("X1", 2))
    assert cx.conjugate(P("X0", 2)) == P("X0*X1")
    assert cx.conjugate(P("Z1", 2)) == P("Z0*Z1")
    assert cx.conjugate(P("Z0", 2)) == P("Z0", 2)


def test_cpauli_validation():
    with pytest.raises(ValueError):
        ControlledPauli(P("X0"), P("Z0"))  # anticommute
    with pytest.raises(NonHermitian):
        ControlledPauli(P("+iX0"), P("Z1", 2).embed(1, [0]) if False else P("+iX0"))
    g = ControlledPauli(P("X0", 2), P("+I", 2))
    assert g.is_identity()


def test_cpauli_involution_and_dense():
    for p1s, p2s in [("Z0", "X1"), ("X0*X1", "Z0*Z1"), ("X0", "Z1")]:
        g = ControlledPauli(P(p1s, 2), P(p2s, 2))
        gm = cpauli_matrix(g)
        assert gm @ gm == cpauli_matrix(ControlledPauli(P("X0", 2), P("+I", 2)))  # identity
        for q in all_paulis(2):
            lhs = gm @ pauli_matrix(q) @ gm
            assert lhs == pauli_matrix(g.conjugate(q))
            assert g.conjugate(g.conjugate(q)) == q


def test_h_conjugate():
    p = P("Y0*X1*Z2")
    h_all = BitVector(3, 0b111)
    q = p.h_conjugate(h_all)
    # HYH = -Y, HXH = Z, HZH = X
    assert q == P("-Y0*Z1*X2")
    assert p.h_conjugate(BitVector(3, 0)) == p


@pytest.mark.parametrize(
    "s",
    ["X0", "-Y0*Y2", "+iX1*Z3", "-iZ0", "+I", "-I", "X0*Y1*Z2"],
)
def test_string_roundtrip(s):
    p = PauliOperator.from_string(s)
    assert PauliOperator.from_string(p.to_string(), p.n) == p


@given(st.integers(1, 4).flatmap(paulis))
def test_to_string_roundtrip_random(p):
    assert PauliOperator.from_string(p.to_string(), p.n) == p


def test_string_errors():
    with pytest.raises(ValueError):
        PauliOperator.from_string("X0*X0")
    with pytest.raises(ValueError):
        PauliOperator.from_string("Q1")
    with pytest.raises(ValueError):
        PauliOperator.from_string("X5", n=2)


def test_exponent_axis():
    e = PauliExponent(-1, P("X0"))
    assert e.axis() == P("-X0")
    assert e.dagger().axis() == P("X0")
    with pytest.raises(NonHermitian):
        PauliExponent(1, P("+iX0"))


def test_restrict_and_embed():
    p = P("Y0*X1*Z2")
    mask = BitVector(3, 0b011)
    a = p.restrict(mask)
    assert a.is_hermitian()
    b = p.restrict(BitVector(3, 0b100))
    prod = a * b
    assert (prod.x, prod.z) == (p.x, p.z)
    small = P("Y0*Z1")
    assert small.embed(4, [2, 0]) == P("Z0*Y2", 4)
    assert small.embed(4, [2, 0]).take([2, 0]) == small
