"""The outcome-complete form of a simulated circuit.

A form denotes the family of output states

    i^<p,r> * (-1)^<B r + s, r> * C |A r>      over r in {0,1}^{n_r}

with outcome vectors v0 + M r. The first n_angle coordinates of r are angle
parameters (from lowered rotations); the rest are genuine random bits, one per
probability-1/2 entry of q.

All i/-1 carry rules for manipulating the phase function live in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .dense_oracle import ExactScalar, omega_power
from .errors import DimensionMismatch, NotCanonical
from .f2 import (
    BitMatrix,
    BitVector,
    is_reduced_column_echelon,
    outer,
    rref_with_transform,
)
from .pauli import PauliOperator
from .phased_clifford import (
    BasisImageState,
    PhaseCssTableau,
    PhasedBruhat,
    add_phase,
    right_mul_pauli,
)


@dataclass(frozen=True)
class GeneralForm:
    q: tuple[str, ...]  # "1" or "h" per outcome
    cliff: PhasedBruhat
    a: BitMatrix  # n x n_r
    b: BitMatrix  # n_r x n_r
    m: BitMatrix  # n_M x n_r
    v0: BitVector  # length n_M
    p: BitVector  # length n_r
    s: BitVector  # length n_r
    n_angle: int = 0

    @property
    def n(self) -> int:
        return self.cliff.n

    @property
    def n_r(self) -> int:
        return self.a.cols

    @property
    def n_m(self) -> int:
        return len(self.q)

    def validate(self) -> None:
        nr, nm = self.n_r, self.n_m
        if self.a.rows != self.n:
            raise DimensionMismatch("A row count != qubit count")
        if self.b.rows != nr or self.b.cols != nr:
            raise DimensionMismatch("B must be n_r x n_r")
        if self.m.rows != nm or self.m.cols != nr:
            raise DimensionMismatch("M must be n_M x n_r")
        if self.v0.len != nm or self.p.len != nr or self.s.len != nr:
            raise DimensionMismatch("vector length mismatch")
        if any(e not in ("1", "h") for e in self.q):
            raise ValueError("q entries must be '1' or 'h'")
        if self.n_angle + sum(1 for e in self.q if e == "h") != nr:
            raise ValueError("n_r must count angle bits plus random outcomes")

    def check_r(self, r: BitVector) -> None:
        if r.len != self.n_r:
            raise DimensionMismatch(f"r has {r.len} bits, expected {self.n_r}")


def phase_at(g: GeneralForm, r: BitVector) -> ExactScalar:
    """i^<p,r> * (-1)^<B r + s, r>, a fourth root of unity."""
    g.check_r(r)
    ip = g.p.dot(r)
    sg = (g.b.mul_vec(r) ^ g.s).dot(r)
    return omega_power(2 * ip + 4 * sg)


def state_at(g: GeneralForm, r: BitVector) -> BasisImageState:
    """The output state at r, its phase folded into the Clifford's scalar."""
    g.check_r(r)
    ip = g.p.dot(r)
    sg = (g.b.mul_vec(r) ^ g.s).dot(r)
    return BasisImageState(add_phase(g.cliff, 2 * ip + 4 * sg), g.a.mul_vec(r))


def outcome_at(g: GeneralForm, r: BitVector) -> BitVector:
    g.check_r(r)
    return g.v0 ^ g.m.mul_vec(r)


def i_linear_carry(
    p: BitVector, b: BitMatrix, s: BitVector, l: int, a: BitVector
) -> tuple[BitVector, BitMatrix, BitVector]:
    """Multiply the phase function by (i^l)^<a,r>.

    i^u i^v = i^(u xor v) * (-1)^(u v) over F2 exponents, so folding the
    i-linear part injects a rank-one update into B.
    """
    if l & 1:
        b = b ^ outer(p, a)
        p = p ^ a
    if l & 2:
        s = s ^ a
    return p, b, s


def phase_product(
    p1: BitVector, b1: BitMatrix, s1: BitVector, p2: BitVector, b2: BitMatrix, s2: BitVector
) -> tuple[BitVector, BitMatrix, BitVector]:
    """Pointwise product of two phase functions over the same r."""
    return p1 ^ p2, b1 ^ b2 ^ outer(p1, p2), s1 ^ s2


def shift_substitution(
    p: BitVector, b: BitMatrix, s: BitVector, t: BitVector
) -> tuple[BitVector, BitMatrix, BitVector, int]:
    """Substitute r -> r + t; returns the new function and an omega exponent."""
    bt = b.mul_vec(t)
    btt = b.vec_mul(t)  # B^T t
    pt = p.dot(t)
    new_s = s ^ bt ^ btt
    extra = (2 * pt + 4 * (bt.dot(t) ^ s.dot(t))) & 7
    if pt:
        new_s = new_s ^ p
    return p, b, new_s, extra


def linear_substitution(
    g: GeneralForm, t_mat: BitMatrix
) -> GeneralForm:
    """Reparametrize r -> T r for invertible T fixing the angle block."""
    return replace(
        g,
        a=g.a @ t_mat,
        b=t_mat.transpose() @ g.b @ t_mat,
        m=g.m @ t_mat,
        p=t_mat.vec_mul(g.p),
        s=t_mat.vec_mul(g.s),
    )


def canonicalize(g: GeneralForm) -> GeneralForm:
    """Equivalent form with M^T in reduced row echelon form on the random
    block and v0 zero on the row rank profile of M.

    The witness is an invertible affine reparametrization of the random
    coordinates; angle coordinates are fixed pointwise. The basis offset is
    absorbed into the Clifford as a trailing X factor, with exact phase
    carries into s and the scalar.
    """
    na, nr = g.n_angle, g.n_r
    rand_cols = list(range(na, nr))
    m_rand = BitMatrix.from_col_vectors(
        [g.m.col(j) for j in rand_cols], g.n_m
    ) if rand_cols else BitMatrix(g.n_m, 0)
    _, t_rand, profile = rref_with_transform(m_rand)
    t_mat = _block_identity_plus(na, t_rand)
    out = linear_substitution(g, t_mat)

    # affine shift zeroing v0 on the rank profile
    t_bits = BitVector(nr)
    for k, row_idx in enumerate(profile):
        if out.v0[row_idx]:
            # pivot column k of the reduced random block
            t_bits = t_bits.set(na + k, 1)
    if t_bits.is_zero():
        return out
    p2, b2, s2, extra = shift_substitution(out.p, out.b, out.s, t_bits)
    shift = out.a.mul_vec(t_bits)
    cliff2 = right_mul_pauli(out.cliff, PauliOperator(0, shift, BitVector(g.n)))
    return replace(
        out,
        cliff=add_phase(cliff2, extra),
        v0=out.v0 ^ out.m.mul_vec(t_bits),
        p=p2,
        b=b2,
        s=s2,
    )


def is_canonical(g: GeneralForm) -> bool:
    na, nr = g.n_angle, g.n_r
    cols = [g.m.col(j) for j in range(na, nr)]
    m_rand = BitMatrix.from_col_vectors(cols, g.n_m) if cols else BitMatrix(g.n_m, 0)
    _, _, profile = rref_with_transform(m_rand)
    if not is_reduced_column_echelon(m_rand):
        return False
    return all(not g.v0[i] for i in profile)


def require_canonical(g: GeneralForm) -> None:
    if not is_canonical(g):
        raise NotCanonical("form is not canonicalized")


def _block_identity_plus(na: int, t_rand: BitMatrix) -> BitMatrix:
    n = na + t_rand.rows
    cols = [BitVector.unit(n, j) for j in range(na)]
    for j in range(t_rand.cols):
        cols.append(_shift_up(t_rand.col(j), na, n))
    return BitMatrix.from_col_vectors(cols, n)


def _shift_up(v: BitVector, offset: int, n: int) -> BitVector:
    return BitVector(n, v.bits << offset)


def fit_phase_function(eval_fn, n_r: int) -> tuple[int, BitVector, BitMatrix, BitVector]:
    """Fit omega^k * i^<p,r> * (-1)^<B r + s, r> to a unit-valued function.

    eval_fn maps a BitVector to an ExactScalar of modulus one. The function
    must be of the stated shape (true for ratios of amplitudes of outcome
    -complete families); it is probed at 0, e_i and e_i + e_j.
    """
    v0 = eval_fn(BitVector(n_r))
    k = None
    for t in range(8):
        if v0 == omega_power(t):
            k = t
            break
    if k is None:
        raise ValueError("constant part is not a power of omega")
    inv0 = omega_power(-k % 8)
    p_bits = 0
    s_bits = 0
    singles = []
    for i in range(n_r):
        ratio = eval_fn(BitVector.unit(n_r, i)) * inv0
        singles.append(ratio)
        if ratio == omega_power(2):
            p_bits |= 1 << i
        elif ratio == omega_power(4):
            s_bits |= 1 << i
        elif ratio == omega_power(6):
            p_bits |= 1 << i
            s_bits |= 1 << i
        elif ratio != omega_power(0):
            raise ValueError("single-coordinate value is not a fourth root")
    rows = [0] * n_r
    for i in range(n_r):
        for j in range(i + 1, n_r):
            both = eval_fn(BitVector.unit(n_r, i) ^ BitVector.unit(n_r, j)) * inv0
            expected = singles[i] * singles[j]
            if both == expected:
                continue
            if both == expected * omega_power(4):
                rows[i] |= 1 << j
            else:
                raise ValueError("pairwise value violates the degree-2 shape")
    return k, BitVector(n_r, p_bits), BitMatrix(n_r, n_r, rows), BitVector(n_r, s_bits)


# ---------------------------------------------------------------------------
# Dump format
# ---------------------------------------------------------------------------

DUMP_HEADER = "phased-general-form v1"


def _mat_field(m: BitMatrix) -> str:
    return ",".join(m.to_strings()) or "-"


def _mat_parse(s: str, rows: int, cols: int) -> BitMatrix:
    if s == "-":
        return BitMatrix(rows, cols)
    return BitMatrix.from_strings(s.split(","), cols)


def _vec_field(v: BitVector) -> str:
    return v.to_string() or "-"


def _vec_parse(s: str, length: int) -> BitVector:
    if s == "-":
        return BitVector(length)
    return BitVector.from_string(s)


def dumps(g: GeneralForm) -> str:
    """Serialize; deterministic, plain ASCII, coordinate 1 first."""
    c = g.cliff
    lines = [
        DUMP_HEADER,
        f"n {g.n}",
        f"n_M {g.n_m}",
        f"n_r {g.n_r}",
        f"n_angle {g.n_angle}",
        "q " + ("".join(g.q) or "-"),
        "A " + _mat_field(g.a),
        "B " + _mat_field(g.b),
        "M " + _mat_field(g.m),
        "v0 " + _vec_field(g.v0),
        "p " + _vec_field(g.p),
        "s " + _vec_field(g.s),
        f"c.m {c.m}",
        "c.hset " + (" ".join(str(j) for j in sorted(c.hset)) or "-"),
        f"c.pauli {c.pauli.to_string()}",
        "c.up.xi " + _mat_field(c.up.xi),
        "c.up.eta " + _mat_field(c.up.eta),
        "c.up.gamma " + ("".join(str(x) for x in c.up.gamma) or "-"),
        "c.vp.xi " + _mat_field(c.vp.xi),
        "c.vp.eta " + _mat_field(c.vp.eta),
        "c.vp.gamma " + ("".join(str(x) for x in c.vp.gamma) or "-"),
    ]
    return "\n".join(lines) + "\n"


def loads(text: str) -> GeneralForm:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != DUMP_HEADER:
        raise ValueError("missing dump header")
    fields = {}
    for ln in lines[1:]:
        name, _, value = ln.partition(" ")
        fields[name] = value.strip()
    n = int(fields["n"])
    n_m = int(fields["n_M"])
    n_r = int(fields["n_r"])
    n_angle = int(fields["n_angle"])
    q = tuple(fields["q"]) if fields["q"] != "-" else ()
    if any(e not in ("1", "h") for e in q):
        raise ValueError("bad q field")

    def tab(prefix: str) -> PhaseCssTableau:
        gam_s = fields[f"{prefix}.gamma"]
        return PhaseCssTableau(
            n,
            _mat_parse(fields[f"{prefix}.xi"], n, n),
            _mat_parse(fields[f"{prefix}.eta"], n, n),
            tuple(int(ch) for ch in (gam_s if gam_s != "-" else "")),
        )

    cliff = PhasedBruhat(
        int(fields["c.m"]),
        tab("c.up"),
        frozenset(int(t) for t in fields["c.hset"].split() if t != "-"),
        PauliOperator.from_string(fields["c.pauli"], n),
        tab("c.vp"),
    )
    g = GeneralForm(
        q=q,
        cliff=cliff,
        a=_mat_parse(fields["A"], n, n_r),
        b=_mat_parse(fields["B"], n_r, n_r),
        m=_mat_parse(fields["M"], n_m, n_r),
        v0=_vec_parse(fields["v0"], n_m),
        p=_vec_parse(fields["p"], n_r),
        s=_vec_parse(fields["s"], n_r),
        n_angle=n_angle,
    )
    g.validate()
    return g
