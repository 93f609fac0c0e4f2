"""Phased Clifford unitaries in factored form.

A phased Clifford is kept as omega^m * U_P * Htilde_J * P * V_P where
omega = e^{i*pi/4}, U_P and V_P are phase-CSS unitaries (products of S,
controlled-Z and controlled-X, each fixing |0...0> exactly), Htilde_J applies
htilde = omega*H on the qubit set J, and P is a Pauli with no scalar prefix.
Every operation here tracks the scalar exactly; correctness of the nontrivial
update paths is enforced by dense comparison in the test suite.
"""

from __future__ import annotations

from . import dense_oracle as dense
from .dense_oracle import DenseUnitary, ExactScalar, omega_power
from .errors import (
    DecompositionFailure,
    DimensionMismatch,
    IdentityExponent,
    NonHermitian,
    NotClifford,
    PositionOutOfRange,
)
from .f2 import BitMatrix, BitVector, inverse, inverse_transpose, kernel_basis, _row_rref
from .pauli import ControlledPauli, PauliExponent, PauliOperator


class PhaseCssTableau:
    """Binary-symplectic data of a phase-CSS unitary.

    Column j of xi/eta and gamma[j] give the image U X_j U^dag =
    i^gamma[j] X^{xi_j} Z^{eta_j}; Z-images are Z^{zeta_j} with zeta =
    xi^{-T}. Together with the normalization U|0...0> = |0...0> this fixes
    the unitary exactly.
    """

    __slots__ = ("n", "xi", "eta", "gamma", "_zeta", "_xi_inv", "_adj")

    def __init__(self, n: int, xi: BitMatrix, eta: BitMatrix, gamma: tuple[int, ...]):
        if xi.rows != n or xi.cols != n or eta.rows != n or eta.cols != n:
            raise DimensionMismatch("tableau blocks must be n x n")
        if len(gamma) != n:
            raise DimensionMismatch("gamma length mismatch")
        self.n = n
        self.xi = xi
        self.eta = eta
        self.gamma = tuple(g & 3 for g in gamma)
        self._zeta = None
        self._xi_inv = None
        self._adj = None

    @classmethod
    def identity(cls, n: int) -> "PhaseCssTableau":
        return cls(n, BitMatrix.identity(n), BitMatrix.zeros(n, n), (0,) * n)

    @property
    def zeta(self) -> BitMatrix:
        if self._zeta is None:
            self._zeta = inverse_transpose(self.xi)
        return self._zeta

    @property
    def xi_inv(self) -> BitMatrix:
        if self._xi_inv is None:
            self._xi_inv = inverse(self.xi)
        return self._xi_inv

    def x_image(self, j: int) -> PauliOperator:
        return PauliOperator(self.gamma[j], self.xi.col(j), self.eta.col(j))

    def image(self, p: PauliOperator) -> PauliOperator:
        """U p U^dag with exact phase."""
        if p.n != self.n:
            raise DimensionMismatch(f"{p.n} != {self.n} qubits")
        out = PauliOperator(p.s, BitVector(self.n), BitVector(self.n))
        xb = p.x.bits
        while xb:
            j = (xb & -xb).bit_length() - 1
            out = out.mul(self.x_image(j))
            xb &= xb - 1
        if not p.z.is_zero():
            out = out.mul(PauliOperator(0, BitVector(self.n), self.zeta.mul_vec(p.z)))
        return out

    def state_image_phase(self, b: BitVector) -> tuple[int, BitVector]:
        """U|b> = i^g |xi b>; returns (g, xi b)."""
        out = PauliOperator.identity(self.n)
        xb = b.bits
        while xb:
            j = (xb & -xb).bit_length() - 1
            out = out.mul(self.x_image(j))
            xb &= xb - 1
        return out.s, out.x

    def adjoint(self) -> "PhaseCssTableau":
        if self._adj is not None:
            return self._adj
        n = self.n
        xi_a = self.xi_inv
        eta_cols = []
        gamma = []
        z_only = BitVector(n)
        for j in range(n):
            w = xi_a.col(j)
            r = self.image(PauliOperator(0, w, z_only))
            s_j = r.dagger().mul(PauliOperator.single("X", j, n))
            if not s_j.x.is_zero():
                raise NotClifford("tableau is not invertible consistently")
            eta_cols.append(self.xi.transpose().mul_vec(s_j.z))
            gamma.append(s_j.s)
        adj = PhaseCssTableau(n, xi_a, BitMatrix.from_col_vectors(eta_cols, n), tuple(gamma))
        self._adj = adj
        adj._adj = self
        return adj

    def preimage(self, p: PauliOperator) -> PauliOperator:
        """U^dag p U with exact phase."""
        return self.adjoint().image(p)

    def compose(self, other: "PhaseCssTableau") -> "PhaseCssTableau":
        """Tableau of self applied after other (matrix product self * other)."""
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} != {other.n} qubits")
        cols_x, cols_e, gamma = [], [], []
        for j in range(self.n):
            w = self.image(other.x_image(j))
            cols_x.append(w.x)
            cols_e.append(w.z)
            gamma.append(w.s)
        return PhaseCssTableau(
            self.n,
            BitMatrix.from_col_vectors(cols_x, self.n),
            BitMatrix.from_col_vectors(cols_e, self.n),
            tuple(gamma),
        )

    def right_mul_cpauli(self, g: ControlledPauli) -> "PhaseCssTableau":
        """Tableau of self * g for an involutive controlled-Pauli g."""
        cols_x, cols_e, gamma = [], [], []
        for j in range(self.n):
            w = self.image(g.conjugate(PauliOperator.single("X", j, self.n)))
            cols_x.append(w.x)
            cols_e.append(w.z)
            gamma.append(w.s)
        return PhaseCssTableau(
            self.n,
            BitMatrix.from_col_vectors(cols_x, self.n),
            BitMatrix.from_col_vectors(cols_e, self.n),
            tuple(gamma),
        )

    def left_mul_cpauli(self, g: ControlledPauli) -> "PhaseCssTableau":
        """Tableau of g * self."""
        cols_x, cols_e, gamma = [], [], []
        for j in range(self.n):
            w = g.conjugate(self.x_image(j))
            cols_x.append(w.x)
            cols_e.append(w.z)
            gamma.append(w.s)
        return PhaseCssTableau(
            self.n,
            BitMatrix.from_col_vectors(cols_x, self.n),
            BitMatrix.from_col_vectors(cols_e, self.n),
            tuple(gamma),
        )

    def insert_qubit(self, pos: int) -> "PhaseCssTableau":
        n = self.n + 1
        xi_cols, eta_cols, gamma = [], [], []
        for j in range(self.n):
            xi_cols.append(_insert_bit(self.xi.col(j), pos))
            eta_cols.append(_insert_bit(self.eta.col(j), pos))
            gamma.append(self.gamma[j])
        xi_cols.insert(pos, BitVector.unit(n, pos))
        eta_cols.insert(pos, BitVector(n))
        gamma.insert(pos, 0)
        return PhaseCssTableau(
            n,
            BitMatrix.from_col_vectors(xi_cols, n),
            BitMatrix.from_col_vectors(eta_cols, n),
            tuple(gamma),
        )

    def embed(self, n: int, positions: list[int]) -> "PhaseCssTableau":
        """Direct sum with the identity, small qubit i at positions[i]."""
        xi_cols = [BitVector.unit(n, j) for j in range(n)]
        eta_cols = [BitVector(n) for _ in range(n)]
        gamma = [0] * n
        for i, p in enumerate(positions):
            xi_cols[p] = _scatter(self.xi.col(i), n, positions)
            eta_cols[p] = _scatter(self.eta.col(i), n, positions)
            gamma[p] = self.gamma[i]
        return PhaseCssTableau(
            n,
            BitMatrix.from_col_vectors(xi_cols, n),
            BitMatrix.from_col_vectors(eta_cols, n),
            tuple(gamma),
        )

    def check(self) -> None:
        """Internal consistency: Hermitian images, symmetric coupling."""
        prod = self.xi.transpose() @ self.eta
        for j in range(self.n):
            if (self.gamma[j] & 1) != prod[j, j]:
                raise NotClifford("gamma parity inconsistent with xi^T eta")
            for k in range(j):
                if prod[j, k] != prod[k, j]:
                    raise NotClifford("xi^T eta is not symmetric")

    def to_gates(self) -> list[tuple[str, tuple[int, ...]]]:
        """Gate list in matrix order (leftmost factor first): S/CZ then CX."""
        cx = _cx_sequence(self.xi)
        u_xi = PhaseCssTableau(
            self.n, self.xi, BitMatrix.zeros(self.n, self.n), (0,) * self.n
        )
        d = self.compose(u_xi.adjoint())
        if d.xi != BitMatrix.identity(self.n):
            raise NotClifford("xi peel failed")
        gates: list[tuple[str, tuple[int, ...]]] = []
        for j in range(self.n):
            for _ in range(d.gamma[j] & 3):
                gates.append(("S", (j,)))
            for k in range(j + 1, self.n):
                if d.eta[k, j]:
                    gates.append(("CZ", (j, k)))
        return gates + cx

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PhaseCssTableau)
            and self.n == other.n
            and self.xi == other.xi
            and self.eta == other.eta
            and self.gamma == other.gamma
        )

    def __repr__(self) -> str:
        return f"PhaseCssTableau(n={self.n})"


def _insert_bit(v: BitVector, pos: int) -> BitVector:
    low = (1 << pos) - 1
    return BitVector(v.len + 1, (v.bits & low) | ((v.bits & ~low) << 1))


def _scatter(v: BitVector, n: int, positions: list[int]) -> BitVector:
    acc = 0
    for i, p in enumerate(positions):
        if (v.bits >> i) & 1:
            acc |= 1 << p
    return BitVector(n, acc)


def _cx_sequence(xi: BitMatrix) -> list[tuple[str, tuple[int, ...]]]:
    """CX gates whose xi-product equals the given invertible matrix.

    Returned in matrix order; each CX(c, t) contributes I + e_t e_c^T and the
    product of the factors left to right equals xi.
    """
    n = xi.rows
    work = [xi.row(i).bits for i in range(n)]
    ops: list[tuple[int, int]] = []  # row ops (target, source) reducing xi to I

    def add_row(t, s):
        work[t] ^= work[s]
        ops.append((t, s))

    for j in range(n):
        if not (work[j] >> j) & 1:
            for i in range(j + 1, n):
                if (work[i] >> j) & 1:
                    add_row(j, i)
                    break
            else:
                raise NotClifford("xi is singular")
        for i in range(n):
            if i != j and (work[i] >> j) & 1:
                add_row(i, j)
    # ops reduce xi to I and are self-inverse, so xi equals their product
    # in application order
    return [("CX", (src, tgt)) for tgt, src in ops]


def _s_tableau(n: int, q: int, power: int) -> PhaseCssTableau:
    eta_cols = [BitVector(n) for _ in range(n)]
    gamma = [0] * n
    if power & 1:
        eta_cols[q] = BitVector.unit(n, q)
    gamma[q] = power & 3
    return PhaseCssTableau(n, BitMatrix.identity(n), BitMatrix.from_col_vectors(eta_cols, n), tuple(gamma))


def _cz_tableau(n: int, a: int, b: int) -> PhaseCssTableau:
    eta_cols = [BitVector(n) for _ in range(n)]
    eta_cols[a] = BitVector.unit(n, b)
    eta_cols[b] = BitVector.unit(n, a)
    return PhaseCssTableau(n, BitMatrix.identity(n), BitMatrix.from_col_vectors(eta_cols, n), (0,) * n)


def _cx_tableau(n: int, c: int, t: int) -> PhaseCssTableau:
    xi_cols = [BitVector.unit(n, j) for j in range(n)]
    xi_cols[c] = BitVector.unit(n, c) ^ BitVector.unit(n, t)
    return PhaseCssTableau(n, BitMatrix.from_col_vectors(xi_cols, n), BitMatrix.zeros(n, n), (0,) * n)


def gate_tableau(n: int, name: str, qubits: tuple[int, ...]) -> PhaseCssTableau:
    if name == "S":
        return _s_tableau(n, qubits[0], 1)
    if name == "SDG":
        return _s_tableau(n, qubits[0], 3)
    if name == "CZ":
        return _cz_tableau(n, qubits[0], qubits[1])
    if name == "CX":
        return _cx_tableau(n, qubits[0], qubits[1])
    raise ValueError(f"not a phase-CSS generator: {name}")


def _ztype_exponent_tableau(w: BitVector, negative: bool) -> PhaseCssTableau:
    """D with exp(+-i*pi/4*Z^w) = omega^{+-1} * D; diagonal, phase-CSS."""
    n = w.len
    eta_cols = []
    gamma = []
    for j in range(n):
        if w[j]:
            eta_cols.append(w)
            gamma.append(1 if negative else 3)
        else:
            eta_cols.append(BitVector(n))
            gamma.append(0)
    return PhaseCssTableau(
        n, BitMatrix.identity(n), BitMatrix.from_col_vectors(eta_cols, n), tuple(gamma)
    )


class PhasedBruhat:
    """omega^m * U_P * Htilde_J * P * V_P, the factored phased Clifford."""

    __slots__ = ("m", "up", "hset", "pauli", "vp")

    def __init__(
        self,
        m: int,
        up: PhaseCssTableau,
        hset: frozenset[int],
        pauli: PauliOperator,
        vp: PhaseCssTableau,
    ):
        n = up.n
        if vp.n != n or pauli.n != n:
            raise DimensionMismatch("component qubit counts differ")
        if any(not 0 <= j < n for j in hset):
            raise PositionOutOfRange("hset index out of range")
        # the central Pauli carries no scalar; i-powers live in m
        object.__setattr__(self, "m", (m + 2 * pauli.s) & 7)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "hset", frozenset(hset))
        object.__setattr__(self, "pauli", PauliOperator(0, pauli.x, pauli.z))
        object.__setattr__(self, "vp", vp)

    def __setattr__(self, name, value):
        raise AttributeError("PhasedBruhat is immutable")

    @property
    def n(self) -> int:
        return self.up.n

    @property
    def hmask(self) -> BitVector:
        acc = 0
        for j in self.hset:
            acc |= 1 << j
        return BitVector(self.n, acc)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PhasedBruhat)
            and self.m == other.m
            and self.up == other.up
            and self.hset == other.hset
            and self.pauli == other.pauli
            and self.vp == other.vp
        )

    def __repr__(self) -> str:
        return (
            f"PhasedBruhat(n={self.n}, m={self.m}, hset={sorted(self.hset)}, "
            f"pauli={self.pauli.to_string()})"
        )


def identity(n: int) -> PhasedBruhat:
    return PhasedBruhat(
        0,
        PhaseCssTableau.identity(n),
        frozenset(),
        PauliOperator.identity(n),
        PhaseCssTableau.identity(n),
    )


def insert_qubit(c: PhasedBruhat, pos: int) -> PhasedBruhat:
    """Interleave a fresh identity qubit at the given position."""
    if not 0 <= pos <= c.n:
        raise PositionOutOfRange(f"position {pos + 1} out of range 1..{c.n + 1}")
    hset = frozenset(j if j < pos else j + 1 for j in c.hset)
    return PhasedBruhat(
        c.m,
        c.up.insert_qubit(pos),
        hset,
        c.pauli.insert_qubit(pos),
        c.vp.insert_qubit(pos),
    )


def left_mul_pauli(c: PhasedBruhat, q: PauliOperator) -> PhasedBruhat:
    """q * c, pulling q through U_P and the Hadamard layer into the center."""
    if q.n != c.n:
        raise DimensionMismatch(f"{q.n} != {c.n} qubits")
    qt = c.up.preimage(q)
    qt = qt.h_conjugate(c.hmask)
    return PhasedBruhat(c.m, c.up, c.hset, qt.mul(c.pauli), c.vp)


def right_mul_pauli(c: PhasedBruhat, q: PauliOperator) -> PhasedBruhat:
    """c * q, pulling q backwards through V_P into the center."""
    if q.n != c.n:
        raise DimensionMismatch(f"{q.n} != {c.n} qubits")
    return PhasedBruhat(c.m, c.up, c.hset, c.pauli.mul(c.vp.image(q)), c.vp)


def image(c: PhasedBruhat, p: PauliOperator) -> PauliOperator:
    """c p c^dag with exact phase."""
    if p.n != c.n:
        raise DimensionMismatch(f"{p.n} != {c.n} qubits")
    out = c.vp.image(p)
    out = out.phase_times(2 * c.pauli.comm(out))
    out = out.h_conjugate(c.hmask)
    return c.up.image(out)


def preimage(c: PhasedBruhat, p: PauliOperator) -> PauliOperator:
    """c^dag p c with exact phase."""
    if p.n != c.n:
        raise DimensionMismatch(f"{p.n} != {c.n} qubits")
    out = c.up.preimage(p)
    out = out.h_conjugate(c.hmask)
    out = out.phase_times(2 * c.pauli.comm(out))
    return c.vp.preimage(out)


def basis_amplitude(c: PhasedBruhat, b_in: BitVector, b_out: BitVector) -> ExactScalar:
    """<b_out| c |b_in> exactly."""
    if b_in.len != c.n or b_out.len != c.n:
        raise DimensionMismatch("basis vector length mismatch")
    g_v, w = c.vp.state_image_phase(b_in)
    mid = w ^ c.pauli.x
    l_mid = g_v + 2 * c.pauli.z.dot(w)
    hmask = c.hmask
    a_out = c.up.xi_inv.mul_vec(b_out)
    # off the Hadamard set, coordinates must agree
    if (a_out.bits ^ mid.bits) & ~hmask.bits:
        return dense.ZERO
    g_u, _ = c.up.state_image_phase(a_out)
    h = len(c.hset)
    overlap = (a_out.bits & mid.bits & hmask.bits).bit_count() & 1
    w_exp = (c.m + h + 2 * (l_mid + g_u) + 4 * overlap) & 7
    base = omega_power(w_exp)
    return ExactScalar(base.a, base.b, base.k + h)


def support_point(c: PhasedBruhat, b_in: BitVector) -> tuple[BitVector, ExactScalar]:
    """A basis point with nonzero amplitude in c|b_in>, and that amplitude."""
    g_v, w = c.vp.state_image_phase(b_in)
    mid = w ^ c.pauli.x
    a_out = BitVector(c.n, mid.bits & ~c.hmask.bits)
    b_out = c.up.xi.mul_vec(a_out)
    return b_out, basis_amplitude(c, b_in, b_out)


def to_dense(c: PhasedBruhat) -> DenseUnitary:
    """Exact dense matrix (small qubit counts only)."""
    d = 1 << c.n
    m = [[dense.ZERO] * d for _ in range(d)]
    for j in range(d):
        b_in = BitVector(c.n, j)
        g_v, w = c.vp.state_image_phase(b_in)
        mid = (w ^ c.pauli.x).bits
        l_mid = g_v + 2 * c.pauli.z.dot(w)
        hbits = c.hmask.bits
        h = len(c.hset)
        # enumerate the support: a_out = mid off hset, free on hset
        free = [k for k in range(c.n) if (hbits >> k) & 1]
        base = mid & ~hbits
        for mask in range(1 << h):
            a_bits = base
            for t, k in enumerate(free):
                if (mask >> t) & 1:
                    a_bits |= 1 << k
            a_out = BitVector(c.n, a_bits)
            g_u, b_out = c.up.state_image_phase(a_out)
            overlap = (a_bits & mid & hbits).bit_count() & 1
            w_exp = (c.m + h + 2 * (l_mid + g_u) + 4 * overlap) & 7
            sc = omega_power(w_exp)
            m[b_out.bits][j] = ExactScalar(sc.a, sc.b, sc.k + h)
    return DenseUnitary(c.n, m)


# ---------------------------------------------------------------------------
# CSS orbit: reduce a Pauli to weight <= 2 with at most two controlled gates
# ---------------------------------------------------------------------------


def css_orbit(p: PauliOperator) -> tuple[list[ControlledPauli], PauliOperator]:
    """CSS circuit (listed in application order) conjugating p to canonical form.

    The canonical operator is +-I, +-X_j, +-Y_j, +-Z_j or +-Y_j Y_k; every
    emitted gate is of CSS type (an X-type and a Z-type argument with even
    overlap). Degenerate gates with an identity argument are omitted.
    """
    if not p.is_hermitian():
        raise NonHermitian(p.to_string())
    n = p.n
    x, z = p.x, p.z
    gates: list[ControlledPauli] = []

    def lam(p1: PauliOperator, p2: PauliOperator):
        if not (p1.is_identity_bits() or p2.is_identity_bits()):
            gates.append(ControlledPauli(p1, p2))

    def xop(v: BitVector) -> PauliOperator:
        return PauliOperator(0, v, BitVector(n))

    def zop(v: BitVector) -> PauliOperator:
        return PauliOperator(0, BitVector(n), v)

    if x.is_zero() and z.is_zero():
        return gates, p
    if x.is_zero():
        j = z.support()[0]
        ej = BitVector.unit(n, j)
        lam(xop(ej), zop(z ^ ej))
        canonical = PauliOperator(p.s, BitVector(n), ej)
    elif z.is_zero():
        j = x.support()[0]
        ej = BitVector.unit(n, j)
        lam(zop(ej), xop(x ^ ej))
        canonical = PauliOperator(p.s, ej, BitVector(n))
    elif x.dot(z) == 1:
        j = BitVector(n, x.bits & z.bits).support()[0]
        ej = BitVector.unit(n, j)
        lam(zop(ej), xop(x ^ ej))
        lam(xop(ej), zop(z ^ ej))
        canonical = PauliOperator(p.s, ej, ej)
    else:
        common = BitVector(n, x.bits & z.bits).support()
        if common:
            j, k = common[0], common[1]
            ej, ek = BitVector.unit(n, j), BitVector.unit(n, k)
            lam(zop(ej), xop(x ^ ej))
            lam(xop(ek), zop(z ^ ek))
        else:
            # disjoint supports: two gates still suffice
            j = x.support()[0]
            k = z.support()[0]
            ej, ek = BitVector.unit(n, j), BitVector.unit(n, k)
            lam(xop(x ^ ej), zop(ej))
            lam(xop(ek), zop(z ^ ej ^ ek))
        # X_j X_k Z_j Z_k = -Y_j Y_k, so the bits alone make the sign explicit
        canonical = PauliOperator(p.s, ej ^ ek, ej ^ ek)
    # conjugation preserves the operator exactly; double-check cheaply
    return gates, canonical


def _canonical_info(p: PauliOperator) -> tuple[int, str, list[int]]:
    """(sign, shape, positions) of an orbit canonical form."""
    sign = p.hermitian_sign()
    sup = p.support()
    if not sup:
        return sign, "I", []
    if len(sup) == 2:
        return sign, "YY", sup
    (j,) = sup
    if p.x[j] and p.z[j]:
        return sign, "Y", sup
    if p.x[j]:
        return sign, "X", sup
    return sign, "Z", sup


_SHAPE_WEIGHT = {"I": 0, "X": 1, "Y": 1, "Z": 1, "YY": 2}


def _canonical_pauli(shape: str, offset: int, n: int) -> PauliOperator:
    if shape == "I":
        return PauliOperator.identity(n)
    if shape == "YY":
        return PauliOperator.single("Y", offset, n).mul(
            PauliOperator.single("Y", offset + 1, n)
        )
    return PauliOperator.single(shape, offset, n)


# ---------------------------------------------------------------------------
# Small-case decomposition from a dense matrix
# ---------------------------------------------------------------------------


def _dense_to_pauli(m: DenseUnitary) -> PauliOperator:
    n = m.n
    d = 1 << n
    col0 = [m.m[i][0] for i in range(d)]
    nz = [i for i in range(d) if not col0[i].is_zero()]
    if len(nz) != 1:
        raise NotClifford("image is not a Pauli operator")
    xbits = nz[0]
    s = None
    for t in range(4):
        if dense.ONE.times_i_power(t) == col0[xbits]:
            s = t
            break
    if s is None:
        raise NotClifford("image phase is not a power of i")
    zbits = 0
    for k in range(n):
        j = 1 << k
        entry = m.m[xbits ^ j][j]
        expect = dense.ONE.times_i_power(s)
        if entry == -expect:
            zbits |= 1 << k
        elif entry != expect:
            raise NotClifford("image is not a Pauli operator")
    p = PauliOperator(s, BitVector(n, xbits), BitVector(n, zbits))
    if dense.pauli_matrix(p) != m:
        raise NotClifford("image is not a Pauli operator")
    return p


def bruhat_decompose_small(u: DenseUnitary) -> PhasedBruhat:
    """Factor an exact dense Clifford into the phased representation.

    The tableau part is found by F2 elimination on the Z-image x-block; the
    scalar is fixed by an exact entry ratio. The result is verified densely
    and any mismatch raises NotClifford.
    """
    n = u.n
    udag = u.dagger()
    ximg = []
    zimg = []
    for j in range(n):
        ximg.append(_dense_to_pauli(u @ dense.pauli_matrix(PauliOperator.single("X", j, n)) @ udag))
        zimg.append(_dense_to_pauli(u @ dense.pauli_matrix(PauliOperator.single("Z", j, n)) @ udag))

    def u_conj(p: PauliOperator) -> PauliOperator:
        out = PauliOperator(p.s, BitVector(n), BitVector(n))
        for j in range(n):
            if p.x[j]:
                out = out.mul(ximg[j])
        for j in range(n):
            if p.z[j]:
                out = out.mul(zimg[j])
        return out

    bmat = BitMatrix.from_col_vectors([zimg[j].x for j in range(n)], n) if n else BitMatrix(0, 0)
    # factor bmat = xi_U E_J zeta_V with J = {0..r-1}
    e1, t1, piv = _row_rref(bmat)
    r = len(piv)
    t2_cols = [BitVector.unit(n, p) for p in piv] + kernel_basis(e1)
    if len(t2_cols) != n:
        raise NotClifford("rank factorization failed")
    t2 = BitMatrix.from_col_vectors(t2_cols, n)
    u1 = PhaseCssTableau(n, inverse(t1), BitMatrix.zeros(n, n), (0,) * n)
    v1 = PhaseCssTableau(n, t2.transpose(), BitMatrix.zeros(n, n), (0,) * n)

    def r_conj(p: PauliOperator) -> PauliOperator:
        # R p R^dag for R = U1^dag u V1^dag
        return u1.preimage(u_conj(v1.preimage(p)))

    # Z-images outside the Hadamard block are +-Z^{w_j} with the w_j an
    # independent family supported off the block; a further CSS right-factor
    # turns them into +-Z_j exactly.
    low = [r_conj(PauliOperator.single("Z", j, n)) for j in range(r, n)]
    zeta2_cols = [BitVector.unit(n, j) for j in range(n)]
    if r < n:
        cblock_cols = []
        for w in low:
            if not w.x.is_zero() or w.s & 1 or w.z.bits & ((1 << r) - 1):
                raise NotClifford("unexpected Z-image outside the Hadamard block")
            cblock_cols.append(w.z.take(list(range(r, n))))
        cblock = BitMatrix.from_col_vectors(cblock_cols, n - r)
        wmat = inverse(cblock)
        for j in range(r, n):
            zeta2_cols[j] = _scatter(wmat.col(j - r), n, list(range(r, n)))
    zeta2 = BitMatrix.from_col_vectors(zeta2_cols, n)
    v2 = PhaseCssTableau(n, inverse_transpose(zeta2), BitMatrix.zeros(n, n), (0,) * n)

    def r2_conj(p: PauliOperator) -> PauliOperator:
        return r_conj(v2.image(p))

    hbits = (1 << r) - 1
    hmask = BitVector(n, hbits)
    eta_u = [BitVector(n) for _ in range(n)]
    gamma_u = [0] * n
    xp = 0
    for j in range(n):
        w = r2_conj(PauliOperator.single("Z", j, n))
        if j < r:
            if w.x != BitVector.unit(n, j):
                raise NotClifford("unexpected Z-image inside the Hadamard block")
            eta_u[j] = w.z
            gamma_u[j] = w.s
        else:
            if not w.x.is_zero() or w.z != BitVector.unit(n, j) or w.s & 1:
                raise NotClifford("unexpected Z-image outside the Hadamard block")
            if w.s == 2:
                xp |= 1 << j
    for j in range(r, n):
        bits = 0
        for k in range(r):
            if eta_u[k][j]:
                bits |= 1 << k
        eta_u[j] = BitVector(n, bits)
    xp_vec = BitVector(n, xp)
    d_u = PhaseCssTableau(n, BitMatrix.identity(n), BitMatrix.from_col_vectors(eta_u, n), tuple(gamma_u))
    d_u_adj = d_u.adjoint()
    eta_v = [BitVector(n) for _ in range(n)]
    gamma_v = [0] * n
    for j in range(n):
        o = r2_conj(PauliOperator.single("X", j, n))
        w = d_u_adj.image(o).h_conjugate(hmask)
        if w.x != BitVector.unit(n, j):
            raise NotClifford("unexpected X-image structure")
        eta_v[j] = w.z
        gamma_v[j] = (w.s - 2 * xp_vec.dot(w.z)) & 3
    d_v = PhaseCssTableau(n, BitMatrix.identity(n), BitMatrix.from_col_vectors(eta_v, n), tuple(gamma_v))
    candidate = PhasedBruhat(
        0,
        u1.compose(d_u),
        frozenset(range(r)),
        PauliOperator(0, xp_vec, BitVector(n)),
        d_v.compose(v2.adjoint()).compose(v1),
    )
    cd = to_dense(candidate)
    m_val = None
    dd = 1 << n
    for i in range(dd):
        for j in range(dd):
            if not cd.m[i][j].is_zero():
                for t in range(8):
                    if cd.m[i][j] * omega_power(t) == u.m[i][j]:
                        m_val = t
                        break
                if m_val is None:
                    raise NotClifford("entry ratio is not a power of omega")
                break
        if m_val is not None:
            break
    if m_val is None:
        raise NotClifford("zero matrix is not Clifford")
    result = PhasedBruhat(m_val, candidate.up, candidate.hset, candidate.pauli, candidate.vp)
    if to_dense(result) != u:
        raise NotClifford("dense verification failed")
    return result


# ---------------------------------------------------------------------------
# The lookup table for exponent-times-Hadamard products on up to 4 qubits
# ---------------------------------------------------------------------------

_SHAPES = ("I", "X", "Y", "Z", "YY")


class BruhatTable:
    """Decompositions of exp(eps*i*pi/4*R) * htilde-layer for canonical R.

    Keys are (sign, I-side shape, H-side shape); the I-side part of R sits on
    the first qubits of the entry, the H-side part (which carries the htilde
    factors) on the remaining ones. Exactly 48 entries: both shapes I is
    impossible.
    """

    def __init__(self, entries: dict[tuple[int, str, str], PhasedBruhat]):
        self.entries = entries

    def lookup(self, sign: int, shape_i: str, shape_h: str) -> PhasedBruhat:
        return self.entries[(sign & 1, shape_i, shape_h)]

    def __len__(self) -> int:
        return len(self.entries)


def _table_target(sign: int, shape_i: str, shape_h: str) -> DenseUnitary:
    ni = _SHAPE_WEIGHT[shape_i]
    nh = _SHAPE_WEIGHT[shape_h]
    d = ni + nh
    axis = _canonical_pauli(shape_i, 0, d).mul(_canonical_pauli(shape_h, ni, d))
    if sign:
        axis = axis.phase_times(2)
    w = dense.exponent_matrix(axis)
    for q in range(ni, d):
        w = w @ dense.gate_matrix("HTILDE", [q], d)
    return w


def generate_table() -> BruhatTable:
    """Build and densely verify all 48 decompositions."""
    entries: dict[tuple[int, str, str], PhasedBruhat] = {}
    for sign in (0, 1):
        for shape_i in _SHAPES:
            for shape_h in _SHAPES:
                if shape_i == "I" and shape_h == "I":
                    continue
                w = _table_target(sign, shape_i, shape_h)
                try:
                    entry = bruhat_decompose_small(w)
                except NotClifford as e:
                    raise DecompositionFailure(
                        f"table entry ({'-' if sign else '+'}, {shape_i}, {shape_h}): {e}"
                    ) from e
                if to_dense(entry) != w:
                    raise DecompositionFailure("table entry failed dense verification")
                entries[(sign, shape_i, shape_h)] = entry
    return BruhatTable(entries)


_TABLE: BruhatTable | None = None


def shared_table() -> BruhatTable:
    """Process-wide table, built once on first use."""
    global _TABLE
    if _TABLE is None:
        _TABLE = generate_table()
    return _TABLE


# ---------------------------------------------------------------------------
# Left multiplication by a Pauli exponent
# ---------------------------------------------------------------------------


def left_mul_exponent(
    c: PhasedBruhat, e: PauliExponent | PauliOperator, table: BruhatTable | None = None
) -> PhasedBruhat:
    """exp(i*pi/4*Q) * c for a Hermitian axis Q, keeping the factored form.

    Z-type axes fold directly into U_P. Otherwise the axis is pulled through
    U_P, split across the Hadamard set, both parts are reduced to weight <= 2
    by CSS conjugations, and the small residual product is replaced by its
    tabulated decomposition.
    """
    axis = e.axis() if isinstance(e, PauliExponent) else e
    if axis.n != c.n:
        raise DimensionMismatch(f"{axis.n} != {c.n} qubits")
    if axis.is_identity_bits():
        raise IdentityExponent("exponent axis is the identity")
    if not axis.is_hermitian():
        raise NonHermitian(axis.to_string())
    n = c.n
    if axis.x.is_zero():
        neg = axis.hermitian_sign() == 1
        d = _ztype_exponent_tableau(axis.z, neg)
        return PhasedBruhat(
            c.m + (7 if neg else 1), d.compose(c.up), c.hset, c.pauli, c.vp
        )
    if table is None:
        table = shared_table()
    hmask = c.hmask
    qt = c.up.preimage(axis)
    qt_i = qt.restrict(BitVector(n, ~hmask.bits))
    qt_h = PauliOperator(
        qt.s - qt_i.s,
        BitVector(n, qt.x.bits & hmask.bits),
        BitVector(n, qt.z.bits & hmask.bits),
    )
    circ_i, can_i = css_orbit(qt_i)
    circ_h, can_h = css_orbit(qt_h)
    circ_h_sharp = [
        ControlledPauli(g.p1.h_conjugate(hmask), g.p2.h_conjugate(hmask)) for g in circ_h
    ]
    sign_i, shape_i, pos_i = _canonical_info(can_i)
    sign_h, shape_h, pos_h = _canonical_info(can_h)

    up = c.up
    for g in circ_i + circ_h:
        up = up.right_mul_cpauli(g)
    pauli = c.pauli
    vp = c.vp
    for g in circ_i + circ_h_sharp:
        pauli = g.conjugate(pauli)
        vp = vp.left_mul_cpauli(g)

    entry = table.lookup(sign_i ^ sign_h, shape_i, shape_h)
    positions = pos_i + pos_h
    e_up = entry.up.embed(n, positions)
    e_vp = entry.vp.embed(n, positions)
    e_pauli = entry.pauli.embed(n, positions)
    e_hset = frozenset(positions[j] for j in entry.hset)

    new_hset = e_hset | (c.hset - set(pos_h))
    new_pauli = e_pauli.mul(e_vp.image(pauli))
    return PhasedBruhat(
        c.m + entry.m,
        up.compose(e_up),
        new_hset,
        new_pauli,
        e_vp.compose(vp),
    )


def add_phase(c: PhasedBruhat, m: int) -> PhasedBruhat:
    """omega^m * c."""
    return PhasedBruhat(c.m + m, c.up, c.hset, c.pauli, c.vp)


def right_mul_exponent(
    c: PhasedBruhat, axis: PauliOperator, table: BruhatTable | None = None
) -> PhasedBruhat:
    """c * exp(i*pi/4*axis), via c E = exp(i*pi/4* c axis c^dag) c."""
    return left_mul_exponent(c, image(c, axis), table)


# ---------------------------------------------------------------------------
# Named gates as exponent sequences
# ---------------------------------------------------------------------------


def _gate_expansion(n: int, name: str, qubits: tuple[int, ...]):
    """(omega shift, exponent axes in matrix order) with gate = w^shift * prod."""
    z = lambda q: PauliOperator.single("Z", q, n)
    x = lambda q: PauliOperator.single("X", q, n)
    if name == "S":
        (q,) = qubits
        return 1, [z(q).phase_times(2)]
    if name == "SDG":
        (q,) = qubits
        return 7, [z(q)]
    if name == "H":
        (q,) = qubits
        return 6, [z(q), x(q), z(q)]
    if name == "HTILDE":
        (q,) = qubits
        return 7, [z(q), x(q), z(q)]
    if name == "CZ":
        a, b = qubits
        return 7, [z(a), z(b), z(a).mul(z(b)).phase_times(2)]
    if name == "CX":
        c, t = qubits
        return 7, [z(c), x(t), z(c).mul(x(t)).phase_times(2)]
    raise ValueError(f"no exponent expansion for {name}")


def apply_gate(
    c: PhasedBruhat, name: str, qubits: tuple[int, ...], table: BruhatTable | None = None
) -> PhasedBruhat:
    """Left-multiply a named Clifford gate onto the representation."""
    name = name.upper()
    if name in ("X", "Y", "Z"):
        return left_mul_pauli(c, PauliOperator.single(name, qubits[0], c.n))
    if name == "SWAP":
        a, b = qubits
        for cq, tq in ((a, b), (b, a), (a, b)):
            c = apply_gate(c, "CX", (cq, tq), table)
        return c
    shift, axes = _gate_expansion(c.n, name, qubits)
    for axis in reversed(axes):
        c = left_mul_exponent(c, axis, table)
    return add_phase(c, shift)


# ---------------------------------------------------------------------------
# States of the form c|b> and their exact comparison
# ---------------------------------------------------------------------------


class BasisImageState:
    """The state c|b>."""

    __slots__ = ("c", "b")

    def __init__(self, c: PhasedBruhat, b: BitVector):
        if b.len != c.n:
            raise DimensionMismatch("basis vector length mismatch")
        self.c = c
        self.b = b

    @property
    def n(self) -> int:
        return self.c.n

    def to_dense(self) -> dense.DenseState:
        d = 1 << self.n
        amps = [basis_amplitude(self.c, self.b, BitVector(self.n, i)) for i in range(d)]
        return dense.DenseState(self.n, amps)


def states_equal(u: BasisImageState, v: BasisImageState) -> bool:
    """Exact vector equality of two factored states (phase included).

    Stabilizer generators of u are checked against v (agreement up to phase),
    then one shared basis amplitude pins the phase.
    """
    if u.n != v.n:
        raise DimensionMismatch(f"{u.n} != {v.n} qubits")
    n = u.n
    for j in range(n):
        s_j = image(u.c, PauliOperator.single("Z", j, n)).phase_times(2 * u.b[j])
        t_j = preimage(v.c, s_j)
        if not t_j.x.is_zero():
            return False
        if ((t_j.s >> 1) ^ t_j.z.dot(v.b)) & 1:
            return False
    b_star, amp_u = support_point(u.c, u.b)
    return amp_u == basis_amplitude(v.c, v.b, b_star)


def decompose_into_exponents(
    c: PhasedBruhat,
) -> tuple[list[PauliExponent], PauliOperator]:
    """Pauli exponents (matrix order) and a trailing Pauli multiplying to c
    up to a power of omega."""
    n = c.n
    seq: list[PauliExponent] = []

    def emit(tableau_gates):
        for name, qs in tableau_gates:
            _, axes = _gate_expansion(n, name, qs)
            for axis in axes:
                seq.append(PauliExponent(-1 if axis.s else 1, axis.phase_times(2 * (axis.s >> 1))))

    emit(c.up.to_gates())
    for j in sorted(c.hset):
        _, axes = _gate_expansion(n, "HTILDE", (j,))
        for axis in axes:
            seq.append(PauliExponent(1, axis))
    emit(c.vp.to_gates())
    residual = c.vp.preimage(c.pauli)
    return seq, residual


# ---------------------------------------------------------------------------
# Table serialization
# ---------------------------------------------------------------------------

TABLE_HEADER = "phased-bruhat-table v1"


def _key_strings(sign: int, shape_i: str, shape_h: str) -> tuple[str, str, str]:
    ni = _SHAPE_WEIGHT[shape_i]
    qi = _canonical_pauli(shape_i, 0, 2).to_string() if shape_i != "I" else "+I"
    qh = _canonical_pauli(shape_h, 2, 4).to_string() if shape_h != "I" else "+I"
    return ("-" if sign else "+", qi, qh)


def _key_from_strings(sign_s: str, qi_s: str, qh_s: str) -> tuple[int, str, str]:
    sign = 1 if sign_s == "-" else 0

    def shape_of(s: str) -> str:
        p = PauliOperator.from_string(s, 4)
        _, shape, _ = _canonical_info(p)
        return shape

    return sign, shape_of(qi_s), shape_of(qh_s)


def _tableau_lines(prefix: str, t: PhaseCssTableau) -> list[str]:
    rows_xi = ",".join(t.xi.to_strings()) or "-"
    rows_eta = ",".join(t.eta.to_strings()) or "-"
    gam = "".join(str(g) for g in t.gamma) or "-"
    return [f"{prefix}.xi {rows_xi}", f"{prefix}.eta {rows_eta}", f"{prefix}.gamma {gam}"]


def _tableau_from_fields(n: int, xi_s: str, eta_s: str, gam_s: str) -> PhaseCssTableau:
    xi = BitMatrix.from_strings([] if xi_s == "-" else xi_s.split(","), n)
    eta = BitMatrix.from_strings([] if eta_s == "-" else eta_s.split(","), n)
    gamma = tuple(int(ch) for ch in (gam_s if gam_s != "-" else ""))
    return PhaseCssTableau(n, xi, eta, gamma)


def serialize_table(table: BruhatTable) -> str:
    lines = [TABLE_HEADER]
    for (sign, shape_i, shape_h) in sorted(table.entries):
        entry = table.entries[(sign, shape_i, shape_h)]
        s, qi, qh = _key_strings(sign, shape_i, shape_h)
        lines.append(f"entry {s} {qi} {qh}")
        lines.append(f"n {entry.n}")
        lines.append(f"m {entry.m}")
        lines.append("hset " + (" ".join(str(j) for j in sorted(entry.hset)) or "-"))
        lines.append(f"pauli {entry.pauli.to_string()}")
        lines.extend(_tableau_lines("up", entry.up))
        lines.extend(_tableau_lines("vp", entry.vp))
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> BruhatTable:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != TABLE_HEADER:
        raise ValueError("missing table header")
    entries: dict[tuple[int, str, str], PhasedBruhat] = {}
    i = 1
    while i < len(lines):
        parts = lines[i].split()
        if parts[0] != "entry" or len(parts) != 4:
            raise ValueError(f"expected an entry line, got {lines[i]!r}")
        key = _key_from_strings(parts[1], parts[2], parts[3])
        fields: dict[str, str] = {}
        i += 1
        for _ in range(10):
            name, _, value = lines[i].partition(" ")
            fields[name] = value.strip()
            i += 1
        n = int(fields["n"])
        hset = frozenset(
            int(t) for t in fields["hset"].split() if t != "-"
        )
        entries[key] = PhasedBruhat(
            int(fields["m"]),
            _tableau_from_fields(n, fields["up.xi"], fields["up.eta"], fields["up.gamma"]),
            hset,
            PauliOperator.from_string(fields["pauli"], n),
            _tableau_from_fields(n, fields["vp.xi"], fields["vp.eta"], fields["vp.gamma"]),
        )
    return BruhatTable(entries)


def verify_table(table: BruhatTable) -> list[str]:
    """Dense re-check of every entry; returns human-readable failures."""
    problems = []
    expected = {
        (sign, si, sh)
        for sign in (0, 1)
        for si in _SHAPES
        for sh in _SHAPES
        if not (si == "I" and sh == "I")
    }
    missing = expected - set(table.entries)
    extra = set(table.entries) - expected
    for k in sorted(missing):
        problems.append(f"missing entry {k}")
    for k in sorted(extra):
        problems.append(f"unexpected entry {k}")
    for key in sorted(set(table.entries) & expected):
        sign, shape_i, shape_h = key
        entry = table.entries[key]
        target = _table_target(sign, shape_i, shape_h)
        if entry.n != target.n or to_dense(entry) != target:
            problems.append(f"entry {key} fails dense verification")
    return problems
