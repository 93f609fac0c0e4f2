import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasedsim import circuit as cir
from phasedsim.dense_oracle import (
    INV_SQRT2,
    OMEGA,
    ONE,
    ZERO,
    DenseState,
    DenseUnitary,
    ExactScalar,
    apply_exponent,
    apply_pauli,
    exponent_matrix,
    gate_matrix,
    omega_power,
    pauli_matrix,
    run_dense,
    states_equal_exact,
)
from phasedsim.errors import (
    FreeOnNonZeroQubit,
    InvalidAssignment,
    TooManyQubits,
    UnknownGate,
)
from phasedsim.f2 import BitVector
from phasedsim.pauli import PauliOperator


def scalars(parity):
    return st.tuples(
        st.integers(-50, 50), st.integers(-50, 50), st.integers(0, 4)
    ).map(lambda t: ExactScalar(t[0], t[1], 2 * t[2] + parity))


def test_scalar_canonical():
    assert ExactScalar(2, 2, 2) == ExactScalar(1, 1, 0)
    assert ExactScalar(0, 0, 5) == ZERO
    assert ExactScalar(4, 0, 3) == ExactScalar(2, 0, 1)
    assert ExactScalar(2, 0, 1) != ExactScalar(1, 0, 0)


def test_scalar_constants():
    assert INV_SQRT2 * INV_SQRT2 == ExactScalar(1, 0, 2)  # exactly 1/2
    assert omega_power(8) == ONE
    assert omega_power(4) == -ONE
    assert OMEGA * OMEGA == ExactScalar(0, 1)  # omega^2 = i
    p = ONE
    for _ in range(8):
        p = p * OMEGA
    assert p == ONE


def test_scalar_mixed_parity_add_rejected():
    with pytest.raises(ValueError):
        ExactScalar(1, 0, 0) + ExactScalar(1, 0, 1)
    # adding zero is always fine
    assert ZERO + INV_SQRT2 == INV_SQRT2
    assert INV_SQRT2 + ZERO == INV_SQRT2


@given(scalars(0), scalars(0), scalars(0))
@settings(max_examples=200)
def test_scalar_ring_laws_even(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x + y == y + x
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x
    assert x * (y + z) == x * y + x * z


@given(scalars(1), scalars(1), scalars(0))
@settings(max_examples=200)
def test_scalar_ring_laws_odd(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert x * (z + z) == x * z + x * z


@given(scalars(0))
def test_scalar_conj_abs(x):
    assert x.conj().conj() == x
    assert x * x.conj() == x.abs2()


def test_gate_matrix_h():
    h = gate_matrix("H", [0], 1)
    assert h.m[0][0] == INV_SQRT2
    assert h.m[1][1] == -INV_SQRT2
    assert (h @ h).is_identity()


def test_gate_matrix_htilde():
    ht = gate_matrix("HTILDE", [0], 1)
    h = gate_matrix("H", [0], 1)
    assert ht == h.scaled(OMEGA)


def test_exponent_z_diag():
    e = exponent_matrix(PauliOperator.from_string("Z0"))
    assert e.m[0][0] == OMEGA
    assert e.m[1][1] == OMEGA.conj()
    assert e.m[0][1] == ZERO


def test_gate_errors():
    with pytest.raises(UnknownGate):
        gate_matrix("T", [0], 1)
    from phasedsim.errors import QubitOutOfRange

    with pytest.raises(QubitOutOfRange):
        gate_matrix("H", [2], 1)


def test_all_gate_fast_paths_match_matrices():
    for name in ["H", "HTILDE", "S", "SDG", "X", "Y", "Z"]:
        m = gate_matrix(name, [1], 2)
        for idx in range(4):
            v = DenseState.basis(2, idx)
            from phasedsim.dense_oracle import _apply_gate

            assert states_equal_exact(_apply_gate(v, name, (1,)), m.apply(v))
    for name in ["CX", "CZ", "SWAP"]:
        m = gate_matrix(name, [1, 0], 2)
        for idx in range(4):
            v = DenseState.basis(2, idx)
            from phasedsim.dense_oracle import _apply_gate

            assert states_equal_exact(_apply_gate(v, name, (1, 0)), m.apply(v))


def test_states_equal_exact_phase_sensitive():
    zero = DenseState.zero_state(1)
    minus_zero = zero.scaled(-ONE)
    assert states_equal_exact(zero, zero)
    assert not states_equal_exact(zero, minus_zero)
    # Z|+> equals |->
    plus = DenseState(1, [INV_SQRT2, INV_SQRT2])
    minus = DenseState(1, [INV_SQRT2, -INV_SQRT2])
    assert states_equal_exact(apply_pauli(plus, PauliOperator.from_string("Z0")), minus)


def test_run_dense_h_measure():
    c = cir.parse("qubits 1\nH 0\nM Z0\n")
    r0 = run_dense(c, BitVector.from_string("0"))
    assert states_equal_exact(r0.state, DenseState.basis(1, 0))
    assert r0.outcomes.to_string() == "0"
    assert r0.weight == 1
    r1 = run_dense(c, BitVector.from_string("1"))
    assert states_equal_exact(r1.state, DenseState.basis(1, 1))
    assert r1.outcomes.to_string() == "1"


def test_run_dense_conditional_reset():
    c = cir.parse("qubits 1\nH 0\nM Z0\nCOND X0 IF 0 == 1\n")
    r1 = run_dense(c, BitVector.from_string("1"))
    assert states_equal_exact(r1.state, DenseState.basis(1, 0))


def test_run_dense_deterministic_measure():
    c = cir.parse("qubits 1\nX 0\nM Z0\n")
    r = run_dense(c, BitVector(0))
    assert r.outcomes.to_string() == "1"
    assert r.weight == 0


def test_run_dense_total_probability():
    text = "qubits 2\nH 0\nCX 0 1\nM Z0\nM X0*X1\nRAND\nCOND Z1 IF 1^2 == 1\n"
    c = cir.parse(text)
    total = ZERO
    count = 0
    for bits in itertools.product([0, 1], repeat=3):
        try:
            r = run_dense(c, BitVector.from_bits(bits))
        except InvalidAssignment:
            continue
        count += 1
        total = total + ExactScalar(1, 0, 2 * r.weight) * r.state.norm2()
    # runs enumerate distinct branches; probabilities sum to one exactly
    assert total == ONE


def test_run_dense_free():
    c = cir.parse("qubits 2\nH 0\nCX 0 1\nM Z0\nCOND X1 IF 0 == 1\nFREE 1\n")
    for b in "01":
        r = run_dense(c, BitVector.from_string(b))
        assert r.state.n == 1
    bad = cir.parse("qubits 1\nH 0\nFREE 0\n")
    with pytest.raises(FreeOnNonZeroQubit):
        run_dense(bad, BitVector(0))


def test_run_dense_too_many_qubits():
    text = "qubits 9\n"
    c = cir.parse(text)
    with pytest.raises(TooManyQubits):
        run_dense(c, BitVector(0))


def test_run_dense_rotation_lowering():
    c = cir.parse("qubits 1\nH 0\nROT t Z0\nH 0\n")
    lowered, registry = cir.lower_rotations(c)
    assert registry == {"t": 0}
    r0 = run_dense(lowered, BitVector.from_string("0"))
    assert states_equal_exact(r0.state, DenseState.basis(1, 0))
    r1 = run_dense(lowered, BitVector.from_string("1"))
    assert states_equal_exact(r1.state, DenseState.basis(1, 1))
