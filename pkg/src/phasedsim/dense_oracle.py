"""Exact dense simulation on up to 8 qubits.

Amplitudes live in the ring of Gaussian integers divided by powers of sqrt(2),
so state and unitary comparisons are exact with no tolerance anywhere. This
module is the brute-force reference against which every phase-sensitive
operation in the package is validated.

Basis convention: qubit 0 is the least significant bit of the basis index.
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
from .errors import (
    DimensionMismatch,
    FreeOnNonZeroQubit,
    InvalidAssignment,
    QubitOutOfRange,
    TooManyQubits,
    UnknownGate,
)
from .f2 import BitVector
from .pauli import ControlledPauli, PauliOperator

MAX_QUBITS = 8


class ExactScalar:
    """(a + b*i) / sqrt(2)^k, canonicalized so not both a, b are even while k >= 2."""

    __slots__ = ("a", "b", "k")

    def __init__(self, a: int, b: int = 0, k: int = 0):
        if a == 0 and b == 0:
            k = 0
        else:
            while k >= 2 and not ((a | b) & 1):
                a >>= 1
                b >>= 1
                k -= 2
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "k", k)

    def __setattr__(self, name, value):
        raise AttributeError("ExactScalar is immutable")

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __add__(self, other: "ExactScalar") -> "ExactScalar":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        ka, kb = self.k, other.k
        if (ka ^ kb) & 1:
            # (a+bi)/sqrt2^even + (c+di)/sqrt2^odd never has Gaussian numerator
            raise ValueError("sum leaves the Gaussian-over-sqrt2 representation")
        if ka < kb:
            m = 1 << ((kb - ka) >> 1)
            return ExactScalar(self.a * m + other.a, self.b * m + other.b, kb)
        m = 1 << ((ka - kb) >> 1)
        return ExactScalar(self.a + other.a * m, self.b + other.b * m, ka)

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(-self.a, -self.b, self.k)

    def __sub__(self, other: "ExactScalar") -> "ExactScalar":
        return self + (-other)

    def __mul__(self, other: "ExactScalar") -> "ExactScalar":
        return ExactScalar(
            self.a * other.a - self.b * other.b,
            self.a * other.b + self.b * other.a,
            self.k + other.k,
        )

    def times_i_power(self, t: int) -> "ExactScalar":
        t &= 3
        if t == 0:
            return self
        if t == 1:
            return ExactScalar(-self.b, self.a, self.k)
        if t == 2:
            return ExactScalar(-self.a, -self.b, self.k)
        return ExactScalar(self.b, -self.a, self.k)

    def div_sqrt2(self) -> "ExactScalar":
        return ExactScalar(self.a, self.b, self.k + 1)

    def conj(self) -> "ExactScalar":
        return ExactScalar(self.a, -self.b, self.k)

    def abs2(self) -> "ExactScalar":
        return ExactScalar(self.a * self.a + self.b * self.b, 0, 2 * self.k)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExactScalar)
            and self.a == other.a
            and self.b == other.b
            and self.k == other.k
        )

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.k))

    def to_complex(self) -> complex:
        return complex(self.a, self.b) / (2 ** (self.k / 2))

    def __repr__(self) -> str:
        return f"ExactScalar({self.a}, {self.b}, {self.k})"


ZERO = ExactScalar(0)
ONE = ExactScalar(1)
I_UNIT = ExactScalar(0, 1)
INV_SQRT2 = ExactScalar(1, 0, 1)
OMEGA = ExactScalar(1, 1, 1)  # e^{i*pi/4}

_OMEGA_POWERS = [ONE]
for _ in range(7):
    _OMEGA_POWERS.append(_OMEGA_POWERS[-1] * OMEGA)


def omega_power(m: int) -> ExactScalar:
    """omega^m with omega = e^{i*pi/4}."""
    return _OMEGA_POWERS[m & 7]


class DenseState:
    """Exact state vector on n <= 8 qubits."""

    __slots__ = ("n", "amps")

    def __init__(self, n: int, amps: list[ExactScalar]):
        if n > MAX_QUBITS:
            raise TooManyQubits(f"{n} > {MAX_QUBITS}")
        if len(amps) != 1 << n:
            raise DimensionMismatch("amplitude count mismatch")
        self.n = n
        self.amps = amps

    @classmethod
    def zero_state(cls, n: int) -> "DenseState":
        amps = [ZERO] * (1 << n)
        amps[0] = ONE
        return cls(n, amps)

    @classmethod
    def basis(cls, n: int, index: int) -> "DenseState":
        amps = [ZERO] * (1 << n)
        amps[index] = ONE
        return cls(n, amps)

    def copy(self) -> "DenseState":
        return DenseState(self.n, list(self.amps))

    def scaled(self, c: ExactScalar) -> "DenseState":
        return DenseState(self.n, [a * c for a in self.amps])

    def norm2(self) -> ExactScalar:
        total = ZERO
        for a in self.amps:
            total = total + a.abs2()
        return total

    def tensor(self, other: "DenseState") -> "DenseState":
        n = self.n + other.n
        amps = [ZERO] * (1 << n)
        for j, bj in enumerate(other.amps):
            if bj.is_zero():
                continue
            base = j << self.n
            for i, ai in enumerate(self.amps):
                amps[base | i] = ai * bj
        return DenseState(n, amps)


def states_equal_exact(u: DenseState, v: DenseState) -> bool:
    """Exact amplitude-wise equality; a global phase difference is unequal."""
    if u.n != v.n:
        raise DimensionMismatch(f"{u.n} != {v.n} qubits")
    return u.amps == v.amps


class DenseUnitary:
    """Exact matrix on n <= 8 qubits, stored row-major."""

    __slots__ = ("n", "m")

    def __init__(self, n: int, m: list[list[ExactScalar]]):
        if n > MAX_QUBITS:
            raise TooManyQubits(f"{n} > {MAX_QUBITS}")
        d = 1 << n
        if len(m) != d or any(len(r) != d for r in m):
            raise DimensionMismatch("matrix shape mismatch")
        self.n = n
        self.m = m

    @classmethod
    def identity(cls, n: int) -> "DenseUnitary":
        d = 1 << n
        return cls(n, [[ONE if i == j else ZERO for j in range(d)] for i in range(d)])

    def __matmul__(self, other: "DenseUnitary") -> "DenseUnitary":
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} != {other.n} qubits")
        d = 1 << self.n
        cols = [[other.m[i][j] for i in range(d)] for j in range(d)]
        out = []
        for i in range(d):
            row = self.m[i]
            nz = [(j, row[j]) for j in range(d) if not row[j].is_zero()]
            out.append([_dot(nz, cols[j]) for j in range(d)])
        return DenseUnitary(self.n, out)

    def apply(self, v: DenseState) -> DenseState:
        if self.n != v.n:
            raise DimensionMismatch(f"{self.n} != {v.n} qubits")
        d = 1 << self.n
        out = []
        for i in range(d):
            row = self.m[i]
            acc = ZERO
            for j in range(d):
                if not row[j].is_zero() and not v.amps[j].is_zero():
                    acc = acc + row[j] * v.amps[j]
            out.append(acc)
        return DenseState(self.n, out)

    def scaled(self, c: ExactScalar) -> "DenseUnitary":
        return DenseUnitary(self.n, [[a * c for a in row] for row in self.m])

    def dagger(self) -> "DenseUnitary":
        d = 1 << self.n
        return DenseUnitary(self.n, [[self.m[j][i].conj() for j in range(d)] for i in range(d)])

    def __eq__(self, other) -> bool:
        return isinstance(other, DenseUnitary) and self.n == other.n and self.m == other.m

    def is_identity(self) -> bool:
        return self == DenseUnitary.identity(self.n)

    def tensor_insert(self, pos: int) -> "DenseUnitary":
        """Interleave an identity qubit at the given position."""
        n = self.n + 1
        d = 1 << n
        low = (1 << pos) - 1

        def old(i):
            return (i & low) | ((i >> 1) & ~low & ((1 << self.n) - 1))

        def bit(i):
            return (i >> pos) & 1

        out = [[ZERO] * d for _ in range(d)]
        for i in range(d):
            for j in range(d):
                if bit(i) == bit(j):
                    out[i][j] = self.m[old(i)][old(j)]
        return DenseUnitary(n, out)


def _dot(nz, col):
    acc = ZERO
    for j, a in nz:
        if not col[j].is_zero():
            acc = acc + a * col[j]
    return acc


def apply_pauli(v: DenseState, p: PauliOperator) -> DenseState:
    """p acting on the state: index flips by x-bits, phases from z-bits and s."""
    if p.n != v.n:
        raise DimensionMismatch(f"{p.n} != {v.n} qubits")
    d = 1 << v.n
    xb, zb = p.x.bits, p.z.bits
    out = [ZERO] * d
    for j in range(d):
        a = v.amps[j]
        if a.is_zero():
            continue
        # i^s X^x Z^z |j> = i^s (-1)^{<z,j>} |j ^ x>
        t = p.s + 2 * ((zb & j).bit_count() & 1)
        out[j ^ xb] = a.times_i_power(t)
    return DenseState(v.n, out)


def apply_exponent(v: DenseState, axis: PauliOperator) -> DenseState:
    """exp(i*pi/4*axis) acting on the state, axis Hermitian: (v + i*axis v)/sqrt2."""
    pv = apply_pauli(v, axis)
    return DenseState(
        v.n,
        [(a + b.times_i_power(1)).div_sqrt2() for a, b in zip(v.amps, pv.amps)],
    )


def apply_cpauli(v: DenseState, g: ControlledPauli) -> DenseState:
    """Controlled-Pauli on a state: average of identity and p1, p2 branches."""
    p1v = apply_pauli(v, g.p1)
    p2v = apply_pauli(v, g.p2)
    p12v = apply_pauli(p2v, g.p1)
    half = ExactScalar(1, 0, 2)
    return DenseState(
        v.n,
        [
            (a + b + c - d) * half
            for a, b, c, d in zip(v.amps, p1v.amps, p2v.amps, p12v.amps)
        ],
    )


def pauli_matrix(p: PauliOperator) -> DenseUnitary:
    d = 1 << p.n
    out = [[ZERO] * d for _ in range(d)]
    xb, zb = p.x.bits, p.z.bits
    for j in range(d):
        t = p.s + 2 * ((zb & j).bit_count() & 1)
        out[j ^ xb][j] = ONE.times_i_power(t)
    return DenseUnitary(p.n, out)


def exponent_matrix(axis: PauliOperator) -> DenseUnitary:
    """exp(i*pi/4*axis) = (I + i*axis)/sqrt2 for a Hermitian axis."""
    d = 1 << axis.n
    pm = pauli_matrix(axis)
    out = [
        [
            ((ONE if i == j else ZERO) + pm.m[i][j].times_i_power(1)).div_sqrt2()
            for j in range(d)
        ]
        for i in range(d)
    ]
    return DenseUnitary(axis.n, out)


def cpauli_matrix(g: ControlledPauli) -> DenseUnitary:
    d = 1 << g.n
    m1 = pauli_matrix(g.p1)
    m2 = pauli_matrix(g.p2)
    m12 = m1 @ m2
    half = ExactScalar(1, 0, 2)
    out = [
        [
            ((ONE if i == j else ZERO) + m1.m[i][j] + m2.m[i][j] - m12.m[i][j]) * half
            for j in range(d)
        ]
        for i in range(d)
    ]
    return DenseUnitary(g.n, out)


_SINGLE = {
    "H": [[INV_SQRT2, INV_SQRT2], [INV_SQRT2, -INV_SQRT2]],
    "HTILDE": [
        [OMEGA * INV_SQRT2, OMEGA * INV_SQRT2],
        [OMEGA * INV_SQRT2, -(OMEGA * INV_SQRT2)],
    ],
    "S": [[ONE, ZERO], [ZERO, I_UNIT]],
    "SDG": [[ONE, ZERO], [ZERO, -I_UNIT]],
    "X": [[ZERO, ONE], [ONE, ZERO]],
    "Y": [[ZERO, -I_UNIT], [I_UNIT, ZERO]],
    "Z": [[ONE, ZERO], [ZERO, -ONE]],
}


def gate_matrix(name: str, qubits: list[int] | tuple[int, ...], n: int) -> DenseUnitary:
    """Exact matrix of a named gate embedded on n qubits."""
    name = name.upper()
    for q in qubits:
        if not 0 <= q < n:
            raise QubitOutOfRange(f"qubit {q} out of range for {n} qubits")
    d = 1 << n
    if name in _SINGLE:
        (q,) = qubits
        g = _SINGLE[name]
        out = [[ZERO] * d for _ in range(d)]
        for j in range(d):
            jb = (j >> q) & 1
            for ib in range(2):
                e = g[ib][jb]
                if not e.is_zero():
                    out[(j & ~(1 << q)) | (ib << q)][j] = e
        return DenseUnitary(n, out)
    if name == "CX":
        c, t = qubits
        out = [[ZERO] * d for _ in range(d)]
        for j in range(d):
            i = j ^ (1 << t) if (j >> c) & 1 else j
            out[i][j] = ONE
        return DenseUnitary(n, out)
    if name == "CZ":
        c, t = qubits
        out = [[ZERO] * d for _ in range(d)]
        for j in range(d):
            sign = -ONE if ((j >> c) & 1) and ((j >> t) & 1) else ONE
            out[j][j] = sign
        return DenseUnitary(n, out)
    if name == "SWAP":
        a, b = qubits
        out = [[ZERO] * d for _ in range(d)]
        for j in range(d):
            ja, jb = (j >> a) & 1, (j >> b) & 1
            i = (j & ~(1 << a) & ~(1 << b)) | (jb << a) | (ja << b)
            out[i][j] = ONE
        return DenseUnitary(n, out)
    raise UnknownGate(name)


def _apply_gate(v: DenseState, name: str, qubits: tuple[int, ...]) -> DenseState:
    """Fast in-place style application of a named gate to a state."""
    n = v.n
    amps = list(v.amps)
    if name in ("H", "HTILDE"):
        (q,) = qubits
        mask = 1 << q
        for j in range(1 << n):
            if j & mask:
                continue
            a, b = amps[j], amps[j | mask]
            amps[j] = (a + b).div_sqrt2()
            amps[j | mask] = (a - b).div_sqrt2()
        if name == "HTILDE":
            amps = [a * OMEGA for a in amps]
    elif name == "S":
        (q,) = qubits
        mask = 1 << q
        for j in range(1 << n):
            if j & mask:
                amps[j] = amps[j].times_i_power(1)
    elif name == "SDG":
        (q,) = qubits
        mask = 1 << q
        for j in range(1 << n):
            if j & mask:
                amps[j] = amps[j].times_i_power(3)
    elif name in ("X", "Y", "Z"):
        (q,) = qubits
        return apply_pauli(v, PauliOperator.single(name, q, n))
    elif name == "CX":
        c, t = qubits
        cm, tm = 1 << c, 1 << t
        for j in range(1 << n):
            if (j & cm) and not (j & tm):
                amps[j], amps[j | tm] = amps[j | tm], amps[j]
    elif name == "CZ":
        c, t = qubits
        cm, tm = 1 << c, 1 << t
        for j in range(1 << n):
            if (j & cm) and (j & tm):
                amps[j] = -amps[j]
    elif name == "SWAP":
        a, b = qubits
        am, bm = 1 << a, 1 << b
        for j in range(1 << n):
            if (j & am) and not (j & bm):
                amps[j], amps[(j ^ am) | bm] = amps[(j ^ am) | bm], amps[j]
    else:
        raise UnknownGate(name)
    return DenseState(n, amps)


class DenseRun:
    """Result of running a circuit at one fixed assignment of all random bits."""

    __slots__ = ("state", "outcomes", "weight")

    def __init__(self, state: DenseState, outcomes: BitVector, weight: int):
        self.state = state
        self.outcomes = outcomes
        self.weight = weight


def run_dense(circuit: Circuit, assignment: BitVector) -> DenseRun:
    """Execute a circuit, post-selecting every random branch per the assignment.

    The assignment lists the angle bits first (one per angle label), then one
    bit for each random event (RAND lines and measurements with random
    outcomes) in execution order. Returns the exact normalized output state on
    the live qubits (ordered by qubit id), the realized outcome vector, and
    the number of probability-1/2 branch points taken.
    """
    if circuit.n_inputs:
        raise InvalidAssignment("circuit has input qubits; close it first")
    n_angle = circuit.n_angle
    angle_bits = [assignment[i] if i < assignment.len else 0 for i in range(n_angle)]
    cursor = n_angle

    slots: dict[int, int] = {}
    free_slots: list[int] = []
    n_slots = 0
    state = DenseState(0, [ONE])
    outcomes: list[int] = []
    weight = 0

    def next_bit() -> int:
        nonlocal cursor
        if cursor >= assignment.len:
            raise InvalidAssignment(
                f"assignment too short: need more than {assignment.len} bits"
            )
        b = assignment[cursor]
        cursor += 1
        return b

    def lift(p: PauliOperator) -> PauliOperator:
        """Map a Pauli over qubit ids to one over slots."""
        for q in p.support():
            if q not in slots:
                raise InvalidAssignment(f"qubit {q} is not live")
        return p.embed(n_slots, [slots.get(q, 0) for q in range(p.n)])

    for g in circuit.instructions:
        if isinstance(g, Alloc):
            if free_slots:
                slot = free_slots.pop(0)
            else:
                slot = n_slots
                n_slots += 1
                if n_slots > MAX_QUBITS:
                    raise TooManyQubits(f"{n_slots} > {MAX_QUBITS}")
                state = state.tensor(DenseState.zero_state(1))
            slots[g.qubit] = slot
        elif isinstance(g, Free):
            slot = slots.pop(g.qubit)
            value = _basis_value(state, slot)
            if value is None:
                raise FreeOnNonZeroQubit(f"qubit {g.qubit} is not in a basis state")
            if value == 1:
                state = apply_pauli(state, PauliOperator.single("X", slot, n_slots))
            free_slots.append(slot)
            free_slots.sort()
        elif isinstance(g, Gate):
            state = _apply_gate(state, g.name, tuple(slots[q] for q in g.qubits))
        elif isinstance(g, ExpGate):
            axis = lift(g.pauli)
            state = apply_exponent(state, axis if g.sign == 1 else axis.phase_times(2))
        elif isinstance(g, Measure):
            p = lift(g.pauli)
            pv = apply_pauli(state, p)
            if pv.amps == state.amps:
                outcomes.append(0)
            elif pv.amps == [-a for a in state.amps]:
                outcomes.append(1)
            else:
                r = next_bit()
                amps = [
                    (a + (b if r == 0 else -b)).div_sqrt2()
                    for a, b in zip(state.amps, pv.amps)
                ]
                state = DenseState(state.n, amps)
                if state.norm2().is_zero():
                    raise InvalidAssignment("branch has probability zero")
                weight += 1
                outcomes.append(r)
        elif isinstance(g, RandBit):
            r = next_bit()
            weight += 1
            outcomes.append(r)
        elif isinstance(g, CondPauli):
            par = 0
            for i in g.outcomes:
                par ^= outcomes[i]
            if par == g.parity:
                state = apply_pauli(state, lift(g.pauli))
        elif isinstance(g, AngleCondPauli):
            if angle_bits[g.angle_index]:
                state = apply_pauli(state, lift(g.pauli))
        elif isinstance(g, Rot):
            raise InvalidAssignment("symbolic rotation present; lower it first")
        else:
            raise InvalidAssignment(f"unsupported instruction {g!r}")

    # drop freed slots (all in |0>), order live qubits by id
    live = sorted(slots)
    positions = [slots[q] for q in live]
    out = _extract(state, positions)
    return DenseRun(out, BitVector.from_bits(outcomes), weight)


def _basis_value(state: DenseState, slot: int) -> int | None:
    """0 or 1 when the slot holds that computational value in every branch."""
    mask = 1 << slot
    seen0 = seen1 = False
    for j, a in enumerate(state.amps):
        if a.is_zero():
            continue
        if j & mask:
            seen1 = True
        else:
            seen0 = True
    if seen0 and seen1:
        return None
    return 1 if seen1 else 0


def _extract(state: DenseState, positions: list[int]) -> DenseState:
    """Project out all slots not listed (they must carry |0>) and reorder."""
    n_out = len(positions)
    amps = [ZERO] * (1 << n_out)
    keep = 0
    for p in positions:
        keep |= 1 << p
    for j, a in enumerate(state.amps):
        if a.is_zero():
            continue
        if j & ~keep:
            raise FreeOnNonZeroQubit("freed slot is not in the zero state")
        idx = 0
        for i, p in enumerate(positions):
            if (j >> p) & 1:
                idx |= 1 << i
        amps[idx] = a
    return DenseState(n_out, amps)
