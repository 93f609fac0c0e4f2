"""Outcome-complete simulation of stabilizer circuits with exact phases.

simulate() folds a whole circuit into a GeneralForm: one pass computes the
output state, outcome vector and conditional probabilities as functions of
every random outcome and angle bit simultaneously, global phase included.
"""

from __future__ import annotations

from .circuit import (
    Alloc,
    AngleCondPauli,
    Circuit,
    CondPauli,
    ExpGate,
    Free,
    Gate,
    Measure,
    RandBit,
    Rot,
)
from .dense_oracle import ExactScalar, omega_power
from .errors import (
    DimensionMismatch,
    FreeOnEntangledQubit,
    HintCommutes,
    HintNotStabilizer,
    InvalidAssignment,
    MalformedCondition,
    ResidualEntanglement,
)
from .f2 import BitMatrix, BitVector
from .general_form import (
    GeneralForm,
    fit_phase_function,
    phase_product,
)
from .pauli import PauliOperator
from .phased_clifford import (
    BasisImageState,
    BruhatTable,
    PhasedBruhat,
    add_phase,
    apply_gate,
    basis_amplitude,
    identity,
    image,
    insert_qubit,
    left_mul_exponent,
    left_mul_pauli,
    preimage,
    right_mul_exponent,
    right_mul_pauli,
    shared_table,
    support_point,
)


class _SimState:
    """Mutable Algorithm state; emits an immutable GeneralForm at the end."""

    def __init__(self, n_angle: int, table: BruhatTable):
        self.table = table
        self.n_angle = n_angle
        self.n_r = n_angle
        self.q: list[str] = []
        self.cliff = identity(0)
        self.a_rows: list[int] = []  # one per slot
        self.b_rows: list[int] = [0] * n_angle
        self.m_rows: list[int] = []  # one per outcome
        self.v0: list[int] = []
        self.p = 0
        self.s = 0
        self.slot_of: dict[int, int] = {}
        self.freed: list[int] = []

    @property
    def n_slots(self) -> int:
        return len(self.a_rows)

    # -- plumbing -----------------------------------------------------------

    def lift(self, p: PauliOperator) -> PauliOperator:
        for q in p.support():
            if q not in self.slot_of:
                raise InvalidAssignment(f"qubit {q} is not live")
        return p.embed(self.n_slots, [self.slot_of.get(q, 0) for q in range(p.n)])

    def alloc(self, qubit: int) -> None:
        if self.freed:
            slot = self.freed.pop(0)
        else:
            slot = self.n_slots
            self.cliff = insert_qubit(self.cliff, slot)
            self.a_rows.append(0)
        self.slot_of[qubit] = slot

    def extend_random(self) -> int:
        """New random coordinate, recorded as an outcome equal to that bit."""
        idx = self.n_r
        self.n_r += 1
        self.q.append("h")
        self.b_rows.append(0)
        self.m_rows.append(1 << idx)
        self.v0.append(0)
        return idx

    def row_combo(self, rows: list[int], sel: int) -> int:
        acc = 0
        while sel:
            i = (sel & -sel).bit_length() - 1
            acc ^= rows[i]
            sel &= sel - 1
        return acc

    # -- Algorithm branches --------------------------------------------------

    def cond_pauli_on_r(self, p: PauliOperator, a_bits: int, const: int) -> None:
        """Apply p^(const + <a,r>) with exact phase bookkeeping."""
        if const:
            self.cliff = left_mul_pauli(self.cliff, p)
        if not a_bits:
            return
        pre = preimage(self.cliff, p)
        l, x, z = pre.s, pre.x, pre.z
        # B += a (z^T A); the quadratic cross term of the basis shift
        zta = self.row_combo(self.a_rows, z.bits)
        sel = a_bits
        while sel:
            i = (sel & -sel).bit_length() - 1
            self.b_rows[i] ^= zta
            sel &= sel - 1
        # A += x a^T
        xb = x.bits
        while xb:
            i = (xb & -xb).bit_length() - 1
            self.a_rows[i] ^= a_bits
            xb &= xb - 1
        # (i^l)^<a,r> carries into p, s and B
        if l & 1:
            pb = self.p
            sel = pb
            while sel:
                i = (sel & -sel).bit_length() - 1
                self.b_rows[i] ^= a_bits
                sel &= sel - 1
            self.p ^= a_bits
        if l & 2:
            self.s ^= a_bits

    def cond_pauli_on_outcomes(self, p: PauliOperator, outcomes: tuple[int, ...], parity: int) -> None:
        for i in outcomes:
            if i >= len(self.m_rows):
                raise MalformedCondition(f"outcome {i} not yet produced")
        sel = 0
        for i in outcomes:
            sel |= 1 << i
        a_bits = self.row_combo(self.m_rows, sel)
        v0c = 0
        for i in outcomes:
            v0c ^= self.v0[i]
        self.cond_pauli_on_r(p, a_bits, (1 + parity + v0c) & 1)

    def measure(self, p: PauliOperator, hint: PauliOperator | None) -> None:
        q_pre = preimage(self.cliff, p)
        if hint is None and q_pre.x.is_zero():
            # deterministic: outcome is an affine function of r
            self.q.append("1")
            self.m_rows.append(self.row_combo(self.a_rows, q_pre.z.bits))
            self.v0.append((q_pre.s >> 1) & 1)
            return
        if hint is None:
            j = q_pre.x.support()[0]
            p_hint = image(self.cliff, PauliOperator.single("Z", j, self.n_slots))
        else:
            p_hint = hint
        if p.comm(p_hint) != 1:
            raise HintCommutes(
                f"hint {p_hint.to_string()} commutes with measured {p.to_string()}"
            )
        t = preimage(self.cliff, p_hint)
        if not t.x.is_zero():
            raise HintNotStabilizer(f"hint {p_hint.to_string()} does not stabilize the state")
        alpha = (t.s >> 1) & 1
        b_prime = t.z
        # unitary update (-1)^alpha exp(i*pi/4 * i P' P)
        axis = p_hint.mul(p).phase_times(1)
        self.cliff = add_phase(left_mul_exponent(self.cliff, axis, self.table), 4 * alpha)
        a_bits = self.row_combo(self.a_rows, b_prime.bits)
        idx = self.extend_random()
        # global phase (-1)^{beta(beta+rho)} split into B, s and the scalar
        a1 = a_bits | (1 << idx)
        sel = a_bits
        while sel:
            i = (sel & -sel).bit_length() - 1
            self.b_rows[i] ^= a1
            sel &= sel - 1
        self.s ^= alpha << idx
        # P' to the power alpha + <a1, r>
        self.cond_pauli_on_r(p_hint, a1, alpha)

    def free(self, qubit: int) -> None:
        slot = self.slot_of.pop(qubit)
        q_pre = preimage(self.cliff, PauliOperator.single("Z", slot, self.n_slots))
        if not q_pre.x.is_zero():
            raise FreeOnEntangledQubit(f"qubit {qubit} is not in a basis state")
        a_bits = self.row_combo(self.a_rows, q_pre.z.bits)
        self.cond_pauli_on_r(
            PauliOperator.single("X", slot, self.n_slots), a_bits, (q_pre.s >> 1) & 1
        )
        self.freed.append(slot)
        self.freed.sort()

    # -- wrap-up --------------------------------------------------------------

    def to_form(self) -> GeneralForm:
        g = GeneralForm(
            q=tuple(self.q),
            cliff=self.cliff,
            a=BitMatrix(self.n_slots, self.n_r, self.a_rows),
            b=BitMatrix(self.n_r, self.n_r, self.b_rows),
            m=BitMatrix(len(self.m_rows), self.n_r, self.m_rows),
            v0=BitVector.from_bits(self.v0),
            p=BitVector(self.n_r, self.p),
            s=BitVector(self.n_r, self.s),
            n_angle=self.n_angle,
        )
        g.validate()
        return g

    def finalize(self) -> GeneralForm:
        live_slots = [self.slot_of[q] for q in sorted(self.slot_of)]
        n_out = len(live_slots)
        order = live_slots + self.freed
        if not self.freed and order == list(range(self.n_slots)):
            return self.to_form()
        # arrange outputs (by qubit id) first, freed slots last
        current = list(range(self.n_slots))
        for k in range(self.n_slots):
            src = current.index(order[k])
            while src > k:
                self.cliff = apply_gate(self.cliff, "SWAP", (src, src - 1), self.table)
                current[src], current[src - 1] = current[src - 1], current[src]
                src -= 1
        g = self.to_form()
        g_out, aux, scalar = separate_aux(g, n_out)
        # the freed qubits hold |0...0> exactly; contract them away
        k_scal = _omega_exponent(scalar)
        zero = BitVector(aux.n)

        def overlap(r: BitVector) -> ExactScalar:
            return basis_amplitude(aux.cliff, aux.a.mul_vec(r), zero)

        k2, p2, b2, s2 = fit_phase_function(overlap, g.n_r)
        p3, b3, s3 = phase_product(g_out.p, g_out.b, g_out.s, p2, b2, s2)
        out = GeneralForm(
            q=g_out.q,
            cliff=add_phase(g_out.cliff, k_scal + k2),
            a=g_out.a,
            b=b3,
            m=g_out.m,
            v0=g_out.v0,
            p=p3,
            s=s3,
            n_angle=g_out.n_angle,
        )
        out.validate()
        return out


def _omega_exponent(x: ExactScalar) -> int:
    for t in range(8):
        if x == omega_power(t):
            return t
    raise ValueError("scalar is not a power of omega")


def simulate(circuit: Circuit, table: BruhatTable | None = None) -> GeneralForm:
    """Run the outcome-complete simulation of a closed, lowered circuit."""
    if circuit.n_inputs:
        raise InvalidAssignment("circuit has input qubits; close it first")
    if table is None:
        table = shared_table()
    st = _SimState(circuit.n_angle, table)
    for g in circuit.instructions:
        if isinstance(g, Alloc):
            st.alloc(g.qubit)
        elif isinstance(g, Free):
            st.free(g.qubit)
        elif isinstance(g, Gate):
            st.cliff = apply_gate(
                st.cliff, g.name, tuple(st.slot_of[q] for q in g.qubits), table
            )
        elif isinstance(g, ExpGate):
            axis = st.lift(g.pauli)
            st.cliff = left_mul_exponent(
                st.cliff, axis if g.sign == 1 else axis.phase_times(2), table
            )
        elif isinstance(g, Measure):
            st.measure(st.lift(g.pauli), st.lift(g.hint) if g.hint else None)
        elif isinstance(g, RandBit):
            st.extend_random()
        elif isinstance(g, CondPauli):
            st.cond_pauli_on_outcomes(st.lift(g.pauli), g.outcomes, g.parity)
        elif isinstance(g, AngleCondPauli):
            st.cond_pauli_on_r(st.lift(g.pauli), 1 << g.angle_index, 0)
        elif isinstance(g, Rot):
            raise InvalidAssignment("symbolic rotation present; lower it first")
        else:
            raise InvalidAssignment(f"unsupported instruction {g!r}")
    return st.finalize()


def measure_with_assertion(
    state: BasisImageState, p: PauliOperator, hint: PauliOperator
) -> tuple[BasisImageState, BasisImageState]:
    """Both post-measurement states of measuring p, given a stabilizer hint.

    The hint must stabilize the state up to sign and anticommute with p; each
    returned state equals (I + (-1)^outcome p)/sqrt(2) applied to the input,
    realized as a phased unitary update.
    """
    if p.comm(hint) != 1:
        raise HintCommutes("hint must anticommute with the measured operator")
    t = preimage(state.c, hint)
    if not t.x.is_zero():
        raise HintNotStabilizer("hint does not stabilize the state up to sign")
    b = ((t.s >> 1) ^ t.z.dot(state.b)) & 1
    base = left_mul_exponent(state.c, hint.mul(p).phase_times(1))
    out = []
    for rho in (0, 1):
        c = base
        if (rho ^ b) & 1:
            c = left_mul_pauli(c, hint)
        c = add_phase(c, 4 * (b & (rho ^ b)))
        out.append(BasisImageState(c, state.b))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Output/auxiliary separation
# ---------------------------------------------------------------------------


def separate_aux(
    g: GeneralForm, n_out: int
) -> tuple[GeneralForm, GeneralForm, ExactScalar]:
    """Split a form into output and auxiliary factors times a constant.

    Requires the last n - n_out qubits to be unentangled from the first
    n_out in every member of the family. The returned output form keeps all
    outcome data and the whole phase function; the auxiliary form is a bare
    state family (all of r treated as parameters) with trivial phase.
    """
    n = g.n
    if not 0 <= n_out <= n:
        raise DimensionMismatch("bad output count")
    n_aux = n - n_out
    if n_aux == 0:
        empty = GeneralForm(
            q=(),
            cliff=identity(0),
            a=BitMatrix(0, g.n_r),
            b=BitMatrix(g.n_r, g.n_r),
            m=BitMatrix(0, g.n_r),
            v0=BitVector(0),
            p=BitVector(g.n_r),
            s=BitVector(g.n_r),
            n_angle=g.n_r,
        )
        return g, empty, omega_power(0)

    zimg = [image(g.cliff, PauliOperator.single("Z", j, n)) for j in range(n)]
    out_coords = list(range(n_out))
    aux_coords = list(range(n_out, n))
    w_out = _supported_combinations(zimg, aux_coords, n)
    w_aux = _supported_combinations(zimg, out_coords, n)
    if len(w_out) + len(w_aux) != n:
        raise ResidualEntanglement(
            "the output/auxiliary cut carries entanglement",
            witness=BitVector(g.n_r),
        )

    c1, a1 = _side_form(g, zimg, w_out, out_coords)
    c2, a2 = _side_form(g, zimg, w_aux, aux_coords)

    h_full = len(g.cliff.hset)
    h_split = len(c1.hset) + len(c2.hset)
    if h_full != h_split:
        raise ResidualEntanglement(
            "support mismatch across the cut", witness=BitVector(g.n_r)
        )
    scale = ExactScalar(1 << h_split, 0, 0)

    def ratio(r: BitVector) -> ExactScalar:
        v1 = a1.mul_vec(r)
        v2 = a2.mul_vec(r)
        b1, amp1 = support_point(c1, v1)
        b2, amp2 = support_point(c2, v2)
        amp_full = basis_amplitude(g.cliff, g.a.mul_vec(r), b1.concat(b2))
        rho = amp_full * (amp1 * amp2).conj() * scale
        if rho.abs2() != omega_power(0):
            raise ResidualEntanglement(
                "family member is not a tensor product across the cut", witness=r
            )
        return rho

    k, p_r, b_r, s_r = fit_phase_function(ratio, g.n_r)
    p3, b3, s3 = phase_product(g.p, g.b, g.s, p_r, b_r, s_r)
    g_out = GeneralForm(
        q=g.q,
        cliff=c1,
        a=a1,
        b=b3,
        m=g.m,
        v0=g.v0,
        p=p3,
        s=s3,
        n_angle=g.n_angle,
    )
    aux_form = GeneralForm(
        q=(),
        cliff=c2,
        a=a2,
        b=BitMatrix(g.n_r, g.n_r),
        m=BitMatrix(0, g.n_r),
        v0=BitVector(0),
        p=BitVector(g.n_r),
        s=BitVector(g.n_r),
        n_angle=g.n_r,
    )
    return g_out, aux_form, omega_power(k)


def _supported_combinations(
    zimg: list[PauliOperator], forbidden: list[int], n: int
) -> list[BitVector]:
    """Basis of {w : the image of Z^w has no support on the forbidden qubits}."""
    rows = []
    for k in forbidden:
        rows.append(sum(1 << j for j in range(n) if zimg[j].x[k]))
        rows.append(sum(1 << j for j in range(n) if zimg[j].z[k]))
    from .f2 import kernel_basis

    return kernel_basis(BitMatrix(2 * len(forbidden), n, rows))


def _side_form(
    g: GeneralForm,
    zimg: list[PauliOperator],
    w_basis: list[BitVector],
    coords: list[int],
) -> tuple[PhasedBruhat, BitMatrix]:
    """Clifford and basis map reproducing the family restricted to one side.

    The side's stabilizer generators (with their r-dependent signs) are
    reduced to the +Z frame by exponent conjugations; the accumulated unitary
    v satisfies v |A_side r> = side state up to a phase fitted later.
    """
    d = len(coords)
    n = g.n
    pairs = []
    for w in w_basis:
        tau = PauliOperator.identity(n)
        wb = w.bits
        while wb:
            j = (wb & -wb).bit_length() - 1
            tau = tau.mul(zimg[j])
            wb &= wb - 1
        pairs.append([tau.take(coords), g.a.vec_mul(w)])
    v = identity(d)
    done: list[tuple[int, int]] = []
    for i in range(len(pairs)):
        gen = preimage(v, pairs[i][0])
        avec = pairs[i][1]
        for jd, idx in done:
            if gen.z[jd]:
                gen = gen.mul(PauliOperator.single("Z", jd, d))
                avec = avec ^ pairs[idx][1]
        if gen.is_identity_bits():
            raise ResidualEntanglement(
                "dependent stabilizer generators", witness=BitVector(g.n_r)
            )
        j = gen.support()[0]
        zj = PauliOperator.single("Z", j, d)
        if gen.comm(zj) == 1:
            v = right_mul_exponent(v, zj.mul(gen).phase_times(1))
        elif gen.x.is_zero() and gen.z == zj.z:
            if gen.s == 2:
                v = right_mul_pauli(v, PauliOperator.single("X", j, d))
        else:
            xj = PauliOperator.single("X", j, d)
            v = right_mul_exponent(v, xj.mul(gen).phase_times(1))
            v = right_mul_exponent(v, zj.mul(xj).phase_times(1))
        # the conjugations act away from the done pivots, so the frame built
        # so far is untouched; the reduced generator now reads exactly +Z_j
        check = preimage(v, pairs[i][0])
        for jd, idx in done:
            if check.z[jd]:
                check = check.mul(PauliOperator.single("Z", jd, d))
        if check != zj:
            raise ResidualEntanglement(
                "stabilizer reduction failed", witness=BitVector(g.n_r)
            )
        pairs[i][1] = avec
        done.append((j, i))
    rows = [0] * d
    for j, idx in done:
        rows[j] = pairs[idx][1].bits
    return v, BitMatrix(d, g.n_r, rows)
