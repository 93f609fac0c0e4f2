import random

import pytest

from phasedsim import dense_oracle as dense
from phasedsim import phased_clifford as pc
from phasedsim.dense_oracle import DenseUnitary, omega_power
from phasedsim.errors import IdentityExponent, NotClifford
from phasedsim.f2 import BitMatrix, BitVector
from phasedsim.pauli import ControlledPauli, PauliExponent, PauliOperator


def P(s, n=None):
    return PauliOperator.from_string(s, n)


def bruhat_dense_ref(c):
    return pc.to_dense(c)


def random_pauli(rng, n, hermitian=True):
    while True:
        x = BitVector(n, rng.getrandbits(n))
        z = BitVector(n, rng.getrandbits(n))
        if hermitian:
            p = PauliOperator.from_xz(x, z, rng.getrandbits(1))
        else:
            p = PauliOperator(rng.getrandbits(2), x, z)
        if not p.is_identity_bits() or not hermitian:
            return p


def random_bruhat(rng, n, steps=8, with_dense=True):
    """Random phased Clifford built from exponents and Paulis, with a parallel
    dense product as the independent reference."""
    c = pc.identity(n)
    ref = DenseUnitary.identity(n) if with_dense else None
    for _ in range(steps):
        if rng.random() < 0.3:
            q = random_pauli(rng, n)
            c = pc.left_mul_pauli(c, q)
            if with_dense:
                ref = dense.pauli_matrix(q) @ ref
        else:
            axis = random_pauli(rng, n)
            c = pc.left_mul_exponent(c, axis)
            if with_dense:
                ref = dense.exponent_matrix(axis) @ ref
    return c, ref


def test_identity_dense():
    for n in range(4):
        assert pc.to_dense(pc.identity(n)) == DenseUnitary.identity(n)


def test_gate_tableaus_match_dense():
    for name, qs in [("S", (0,)), ("SDG", (1,)), ("CZ", (0, 1)), ("CX", (0, 1)), ("CX", (1, 0))]:
        t = pc.gate_tableau(2, name, qs)
        t.check()
        c = pc.PhasedBruhat(0, t, frozenset(), PauliOperator.identity(2), pc.PhaseCssTableau.identity(2))
        assert pc.to_dense(c) == dense.gate_matrix(name, list(qs), 2)


def test_tableau_compose_adjoint():
    rng = random.Random(7)
    for _ in range(30):
        n = rng.randrange(1, 4)
        t = pc.PhaseCssTableau.identity(n)
        for _ in range(6):
            name = rng.choice(["S", "SDG", "CZ", "CX"])
            if name in ("S", "SDG"):
                qs = (rng.randrange(n),)
            else:
                if n < 2:
                    continue
                a = rng.randrange(n)
                b = (a + 1 + rng.randrange(n - 1)) % n
                qs = (a, b)
            t = t.compose(pc.gate_tableau(n, name, qs))
        t.check()
        assert t.compose(t.adjoint()) == pc.PhaseCssTableau.identity(n)
        assert t.adjoint().compose(t) == pc.PhaseCssTableau.identity(n)
        # image/preimage roundtrip with exact phases
        for _ in range(5):
            p = random_pauli(rng, n, hermitian=False)
            assert t.preimage(t.image(p)) == p


def test_tableau_to_gates_roundtrip():
    rng = random.Random(11)
    for _ in range(25):
        n = rng.randrange(1, 5)
        t = pc.PhaseCssTableau.identity(n)
        for _ in range(8):
            name = rng.choice(["S", "SDG", "CZ", "CX"])
            if name in ("S", "SDG") or n < 2:
                if name in ("CZ", "CX"):
                    continue
                qs = (rng.randrange(n),)
            else:
                a = rng.randrange(n)
                b = (a + 1 + rng.randrange(n - 1)) % n
                qs = (a, b)
            t = t.compose(pc.gate_tableau(n, name, qs))
        rebuilt = pc.PhaseCssTableau.identity(n)
        for name, qs in t.to_gates():
            rebuilt = rebuilt.compose(pc.gate_tableau(n, name, qs))
        assert rebuilt == t


def test_insert_qubit():
    # htilde on qubit 0, insert at 0 -> htilde on qubit 1 of 2
    c = pc.PhasedBruhat(
        0,
        pc.PhaseCssTableau.identity(1),
        frozenset([0]),
        PauliOperator.identity(1),
        pc.PhaseCssTableau.identity(1),
    )
    c2 = pc.insert_qubit(c, 0)
    ref = dense.gate_matrix("HTILDE", [1], 2)
    assert pc.to_dense(c2) == ref
    # S form, insert at end
    s_form = pc.apply_gate(pc.identity(1), "S", (0,))
    s2 = pc.insert_qubit(s_form, 1)
    assert pc.to_dense(s2) == dense.gate_matrix("S", [0], 2)
    assert pc.to_dense(pc.insert_qubit(pc.identity(1), 1)) == DenseUnitary.identity(2)


def test_left_mul_pauli_dense():
    rng = random.Random(3)
    for n in (1, 2, 3):
        c = pc.identity(n)
        ref = DenseUnitary.identity(n)
        for _ in range(10):
            q = random_pauli(rng, n, hermitian=False)
            c = pc.left_mul_pauli(c, q)
            ref = dense.pauli_matrix(q) @ ref
            assert pc.to_dense(c) == ref


def test_apply_gate_expansions_match_dense():
    cases = [
        ("H", (0,), 1), ("S", (0,), 1), ("SDG", (0,), 1), ("HTILDE", (0,), 1),
        ("X", (0,), 1), ("Y", (0,), 1), ("Z", (0,), 1),
        ("CX", (0, 1), 2), ("CX", (1, 0), 2), ("CZ", (0, 1), 2), ("SWAP", (0, 1), 2),
    ]
    for name, qs, n in cases:
        c = pc.apply_gate(pc.identity(n), name, qs)
        assert pc.to_dense(c) == dense.gate_matrix(name, list(qs), n), name


def test_image_preimage_roundtrip():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randrange(1, 4)
        c, ref = random_bruhat(rng, n, steps=6)
        for _ in range(4):
            p = random_pauli(rng, n, hermitian=False)
            img = pc.image(c, p)
            assert pc.preimage(c, img) == p
            # dense check: c p c^dag
            lhs = ref @ dense.pauli_matrix(p) @ ref.dagger()
            assert lhs == dense.pauli_matrix(img)


def test_left_mul_exponent_fast_path():
    c = pc.left_mul_exponent(pc.identity(1), P("Z0"))
    assert c.m == 1
    assert pc.to_dense(c) == dense.exponent_matrix(P("Z0"))
    # e^{i pi/4 Z} = omega * S^dag
    sdg = dense.gate_matrix("SDG", [0], 1).scaled(omega_power(1))
    assert pc.to_dense(c) == sdg
    c2 = pc.left_mul_exponent(pc.identity(2), P("Z0*Z1"))
    assert pc.to_dense(c2) == dense.exponent_matrix(P("Z0*Z1"))
    c3 = pc.left_mul_exponent(pc.identity(2), P("-Z0*Z1"))
    assert pc.to_dense(c3) == dense.exponent_matrix(P("-Z0*Z1"))


def test_left_mul_exponent_identity_rejected():
    with pytest.raises(IdentityExponent):
        pc.left_mul_exponent(pc.identity(1), P("+I", 1))


def test_css_orbit_exhaustive_small():
    for n in (1, 2, 3):
        count = 0
        for s in range(4):
            for xb in range(1 << n):
                for zb in range(1 << n):
                    p = PauliOperator(s, BitVector(n, xb), BitVector(n, zb))
                    if not p.is_hermitian():
                        continue
                    count += 1
                    gates, canonical = pc.css_orbit(p)
                    assert len(gates) <= 2
                    for g in gates:
                        assert g.is_css()
                        # CSS constraint <a,b> = 0
                        assert g.p1.x.dot(g.p2.z) == 0 and g.p1.z.dot(g.p2.x) == 0
                    sign, shape, pos = pc._canonical_info(canonical)
                    assert shape in ("I", "X", "Y", "Z", "YY")
                    q = p
                    for g in gates:
                        q = g.conjugate(q)
                    assert q == canonical
                    # dense check of the conjugation chain
                    md = dense.pauli_matrix(p)
                    for g in gates:
                        gm = dense.cpauli_matrix(g)
                        md = gm @ md @ gm
                    assert md == dense.pauli_matrix(canonical)
        assert count == 2 * (4 ** n)


def test_css_orbit_disjoint_example():
    gates, canonical = pc.css_orbit(P("X0*Z1"))
    sign, shape, pos = pc._canonical_info(canonical)
    assert shape == "YY" and pos == [0, 1]
    assert len(gates) <= 2


def test_css_orbit_random_n5():
    rng = random.Random(17)
    for _ in range(60):
        p = random_pauli(rng, 5)
        gates, canonical = pc.css_orbit(p)
        assert len(gates) <= 2
        q = p
        for g in gates:
            q = g.conjugate(q)
        assert q == canonical
        md = dense.pauli_matrix(p)
        for g in gates:
            gm = dense.cpauli_matrix(g)
            md = gm @ md @ gm
        assert md == dense.pauli_matrix(canonical)


def test_bruhat_decompose_small_roundtrip():
    rng = random.Random(23)
    names1 = ["H", "S", "SDG", "X", "Y", "Z", "HTILDE"]
    for n in (1, 2, 3):
        for _ in range(12):
            u = DenseUnitary.identity(n)
            for _ in range(7):
                if n >= 2 and rng.random() < 0.4:
                    a = rng.randrange(n)
                    b = (a + 1 + rng.randrange(n - 1)) % n
                    u = dense.gate_matrix(rng.choice(["CX", "CZ", "SWAP"]), [a, b], n) @ u
                else:
                    u = dense.gate_matrix(rng.choice(names1), [rng.randrange(n)], n) @ u
                if rng.random() < 0.3:
                    u = u.scaled(omega_power(rng.randrange(8)))
            c = pc.bruhat_decompose_small(u)
            assert pc.to_dense(c) == u


def test_bruhat_decompose_rejects_non_clifford():
    t = DenseUnitary.identity(1)
    t.m[1][1] = dense.OMEGA  # T gate
    with pytest.raises(NotClifford):
        pc.bruhat_decompose_small(t)


def test_generate_table():
    table = pc.shared_table()
    assert len(table) == 48
    assert pc.verify_table(table) == []


def test_table_examples():
    table = pc.shared_table()
    # e^{-i pi/4 Z0} = omega^7 * S
    entry = table.lookup(1, "Z", "I")
    assert pc.to_dense(entry) == dense.exponent_matrix(P("-Z0"))
    # key (+, I, Z): decomposition of e^{i pi/4 Z} htilde on one qubit
    entry = table.lookup(0, "I", "Z")
    target = dense.exponent_matrix(P("Z0")) @ dense.gate_matrix("HTILDE", [0], 1)
    assert pc.to_dense(entry) == target


def test_table_serialization_roundtrip():
    table = pc.shared_table()
    text = pc.serialize_table(table)
    parsed = pc.parse_table(text)
    assert len(parsed) == 48
    assert pc.verify_table(parsed) == []
    assert pc.serialize_table(parsed) == text


def test_left_mul_exponent_randomized_small():
    rng = random.Random(99)
    for n in (1, 2, 3, 4):
        for _ in range(25 if n < 4 else 12):
            c, ref = random_bruhat(rng, n, steps=8)
            axis = random_pauli(rng, n)
            out = pc.left_mul_exponent(c, axis)
            assert pc.to_dense(out) == dense.exponent_matrix(axis) @ ref


def test_left_mul_exponent_spec_y_on_htilde():
    c = pc.apply_gate(pc.identity(1), "HTILDE", (0,))
    out = pc.left_mul_exponent(c, P("Y0"))
    ref = dense.exponent_matrix(P("Y0")) @ dense.gate_matrix("HTILDE", [0], 1)
    assert pc.to_dense(out) == ref


def test_basis_amplitude_examples():
    c = pc.identity(1)
    assert pc.basis_amplitude(c, BitVector(1, 0), BitVector(1, 0)) == dense.ONE
    ht = pc.apply_gate(pc.identity(1), "HTILDE", (0,))
    # <0|htilde|0> = omega/sqrt2 = (1+i)/2
    assert pc.basis_amplitude(ht, BitVector(1, 0), BitVector(1, 0)) == dense.ExactScalar(1, 1, 2)
    s = pc.apply_gate(pc.identity(1), "S", (0,))
    assert pc.basis_amplitude(s, BitVector(1, 1), BitVector(1, 1)) == dense.I_UNIT


def test_basis_amplitude_norm():
    rng = random.Random(31)
    for n in (1, 2, 3):
        c, _ = random_bruhat(rng, n, steps=8, with_dense=False)
        for b_in_bits in range(1 << n):
            b_in = BitVector(n, b_in_bits)
            total = dense.ZERO
            for b_out_bits in range(1 << n):
                amp = pc.basis_amplitude(c, b_in, BitVector(n, b_out_bits))
                total = total + amp.abs2()
            assert total == dense.ONE


def test_support_point():
    rng = random.Random(41)
    for _ in range(20):
        n = rng.randrange(1, 4)
        c, _ = random_bruhat(rng, n, steps=6, with_dense=False)
        b = BitVector(n, rng.getrandbits(n))
        pt, amp = pc.support_point(c, b)
        assert amp == pc.basis_amplitude(c, b, pt)
        assert not amp.is_zero()


def test_states_equal_examples():
    one = pc.identity(1)
    z0 = BitVector(1, 0)
    assert pc.states_equal(pc.BasisImageState(one, z0), pc.BasisImageState(one, z0))
    # Z htilde |0> = omega |->  and htilde |1> = omega |->
    zht = pc.left_mul_pauli(pc.apply_gate(pc.identity(1), "HTILDE", (0,)), P("Z0"))
    ht = pc.apply_gate(pc.identity(1), "HTILDE", (0,))
    assert pc.states_equal(
        pc.BasisImageState(zht, BitVector(1, 0)), pc.BasisImageState(ht, BitVector(1, 1))
    )
    # distinct states and pure phase differences are unequal
    minus_one = pc.add_phase(one, 4)
    assert not pc.states_equal(
        pc.BasisImageState(one, z0), pc.BasisImageState(minus_one, z0)
    )


def test_states_equal_matches_dense():
    rng = random.Random(53)
    agree = 0
    for _ in range(120):
        n = rng.randrange(1, 4)
        c1, _ = random_bruhat(rng, n, steps=5, with_dense=False)
        if rng.random() < 0.5:
            c2 = pc.add_phase(c1, rng.randrange(8)) if rng.random() < 0.5 else c1
            b1 = BitVector(n, rng.getrandbits(n))
            b2 = b1
        else:
            c2, _ = random_bruhat(rng, n, steps=5, with_dense=False)
            b1 = BitVector(n, rng.getrandbits(n))
            b2 = BitVector(n, rng.getrandbits(n))
        u = pc.BasisImageState(c1, b1)
        v = pc.BasisImageState(c2, b2)
        expected = dense.states_equal_exact(u.to_dense(), v.to_dense())
        assert pc.states_equal(u, v) == expected
        agree += expected
    assert 0 < agree < 120  # the sample covers both verdicts


def test_decompose_into_exponents():
    rng = random.Random(61)
    for n in (1, 2, 3):
        for _ in range(8):
            c, ref = random_bruhat(rng, n, steps=6)
            seq, residual = pc.decompose_into_exponents(c)
            prod = DenseUnitary.identity(n)
            for e in seq:
                prod = prod @ dense.exponent_matrix(e.axis())
            prod = prod @ dense.pauli_matrix(residual)
            # equal up to a power of omega
            ok = any(prod.scaled(omega_power(t)) == ref for t in range(8))
            assert ok


def test_right_mul_pauli():
    rng = random.Random(71)
    for _ in range(15):
        n = rng.randrange(1, 4)
        c, ref = random_bruhat(rng, n, steps=5)
        q = random_pauli(rng, n, hermitian=False)
        out = pc.right_mul_pauli(c, q)
        assert pc.to_dense(out) == ref @ dense.pauli_matrix(q)
