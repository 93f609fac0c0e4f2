"""Circuit data model, text format, rotation lowering and Choi closure.

The text format is line oriented, one instruction per line, `#` comments:

    qubits N            header, declares N qubits (allocated upfront)
    inputs M            optional, first M qubits start in an arbitrary state
    ALLOC               allocate a fresh qubit (next unused id)
    FREE q              deallocate qubit q (must hold a computational basis
                        state; reset to |0> exactly)
    H|S|SDG|X|Y|Z q     single-qubit gates
    CX|CZ|SWAP q1 q2    two-qubit gates
    EXP [+|-] P         exp(+-i*pi/4*P) for a Hermitian Pauli string P
    M P [HINT P']       non-destructive Pauli measurement, optional hint
    RAND                allocate a fair random bit (recorded as an outcome)
    COND P IF i1^i2 == b   apply P when the parity of listed outcomes equals b
    ROT label P         symbolic-angle rotation exp(i*alpha_label*P)

Qubit ids are allocation order and never reused in the text. Outcome indices
are assigned to M and RAND lines in order, starting at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CircuitSyntaxError,
    DuplicateRotationLabel,
    ForwardOutcomeReference,
    UndeclaredQubit,
)
from .pauli import PauliOperator

GATE_ARITY = {
    "H": 1, "S": 1, "SDG": 1, "X": 1, "Y": 1, "Z": 1,
    "CX": 2, "CZ": 2, "SWAP": 2,
}


@dataclass(frozen=True)
class Alloc:
    qubit: int


@dataclass(frozen=True)
class Free:
    qubit: int


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class ExpGate:
    sign: int
    pauli: PauliOperator


@dataclass(frozen=True)
class Measure:
    pauli: PauliOperator
    hint: PauliOperator | None = None


@dataclass(frozen=True)
class RandBit:
    pass


@dataclass(frozen=True)
class CondPauli:
    pauli: PauliOperator
    outcomes: tuple[int, ...]
    parity: int


@dataclass(frozen=True)
class Rot:
    label: str
    pauli: PauliOperator


@dataclass(frozen=True)
class AngleCondPauli:
    """Lowered rotation: apply pauli when the angle bit is 1."""

    pauli: PauliOperator
    angle_index: int


Instruction = (
    Alloc | Free | Gate | ExpGate | Measure | RandBit | CondPauli | Rot | AngleCondPauli
)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    n_inputs: int
    instructions: tuple[Instruction, ...]
    n_outcomes: int
    rotation_labels: tuple[str, ...] = ()
    angle_labels: tuple[str, ...] = ()

    @property
    def n_angle(self) -> int:
        return len(self.angle_labels)

    def output_arity(self) -> int:
        """Number of qubits live at the end of the circuit."""
        live = self.n_inputs
        for g in self.instructions:
            if isinstance(g, Alloc):
                live += 1
            elif isinstance(g, Free):
                live -= 1
        return live


def _resize(p: PauliOperator, n: int) -> PauliOperator:
    if p.n == n:
        return p
    return p.embed(n, list(range(p.n)))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.budget = 0
        self.n_inputs = 0
        self.live: set[int] = set()
        self.next_id = 0
        self.instrs: list[Instruction] = []
        self.n_outcomes = 0
        self.rot_labels: list[str] = []

    def error(self, cls, msg: str, lineno: int, col: int | None = None):
        raise cls(msg, line=lineno, column=col)

    def need_live(self, q: int, lineno: int):
        if q not in self.live:
            self.error(UndeclaredQubit, f"qubit {q} is not live", lineno)

    def pauli(self, s: str, lineno: int, hermitian: bool = True) -> PauliOperator:
        try:
            p = PauliOperator.from_string(s)
        except ValueError as e:
            self.error(CircuitSyntaxError, f"bad Pauli string: {e}", lineno)
        if hermitian and not p.is_hermitian():
            self.error(CircuitSyntaxError, f"Pauli {s!r} is not Hermitian", lineno)
        for q in p.support():
            self.need_live(q, lineno)
        return p

    def alloc(self) -> int:
        q = self.next_id
        self.next_id += 1
        self.live.add(q)
        return q

    def parse(self) -> Circuit:
        lines = self.text.splitlines()
        body: list[tuple[int, str]] = []
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                body.append((lineno, line))
        if not body or not body[0][1].lower().startswith("qubits"):
            self.error(CircuitSyntaxError, "missing 'qubits N' header", body[0][0] if body else 1)
        lineno, header = body[0]
        try:
            n_header = int(header.split()[1])
        except (IndexError, ValueError):
            self.error(CircuitSyntaxError, "malformed 'qubits N' header", lineno)
        body = body[1:]
        if body and body[0][1].lower().startswith("inputs"):
            lineno, inp = body[0]
            try:
                self.n_inputs = int(inp.split()[1])
            except (IndexError, ValueError):
                self.error(CircuitSyntaxError, "malformed 'inputs M' header", lineno)
            if self.n_inputs > n_header:
                self.error(CircuitSyntaxError, "more inputs than declared qubits", lineno)
            body = body[1:]
        for _ in range(self.n_inputs):
            self.alloc()
        for _ in range(n_header - self.n_inputs):
            self.instrs.append(Alloc(self.alloc()))
        for lineno, line in body:
            self.instr(line, lineno)
        self.budget = self.next_id
        return Circuit(
            n_qubits=self.budget,
            n_inputs=self.n_inputs,
            instructions=tuple(
                self._resize_instr(g, self.budget) for g in self.instrs
            ),
            n_outcomes=self.n_outcomes,
            rotation_labels=tuple(self.rot_labels),
        )

    @staticmethod
    def _resize_instr(g: Instruction, n: int) -> Instruction:
        if isinstance(g, ExpGate):
            return ExpGate(g.sign, _resize(g.pauli, n))
        if isinstance(g, Measure):
            return Measure(_resize(g.pauli, n), _resize(g.hint, n) if g.hint else None)
        if isinstance(g, CondPauli):
            return CondPauli(_resize(g.pauli, n), g.outcomes, g.parity)
        if isinstance(g, Rot):
            return Rot(g.label, _resize(g.pauli, n))
        return g

    def instr(self, line: str, lineno: int):
        parts = line.split()
        op = parts[0].upper()
        if op == "ALLOC":
            if len(parts) != 1:
                self.error(CircuitSyntaxError, "ALLOC takes no arguments", lineno)
            self.instrs.append(Alloc(self.alloc()))
        elif op == "FREE":
            q = self._qubit_arg(parts, 1, lineno)
            self.need_live(q, lineno)
            self.live.discard(q)
            self.instrs.append(Free(q))
        elif op in GATE_ARITY:
            arity = GATE_ARITY[op]
            if len(parts) != 1 + arity:
                self.error(CircuitSyntaxError, f"{op} takes {arity} qubit(s)", lineno)
            qs = tuple(self._qubit_arg(parts, i + 1, lineno) for i in range(arity))
            if arity == 2 and qs[0] == qs[1]:
                self.error(CircuitSyntaxError, f"{op} qubits must differ", lineno)
            for q in qs:
                self.need_live(q, lineno)
            self.instrs.append(Gate(op, qs))
        elif op == "EXP":
            rest = parts[1:]
            sign = 1
            if rest and rest[0] in ("+", "-"):
                sign = 1 if rest[0] == "+" else -1
                rest = rest[1:]
            if len(rest) != 1:
                self.error(CircuitSyntaxError, "EXP takes [+|-] and one Pauli", lineno)
            p = self.pauli(rest[0], lineno)
            if p.is_identity_bits():
                self.error(CircuitSyntaxError, "EXP axis must not be the identity", lineno)
            self.instrs.append(ExpGate(sign, p))
        elif op == "M":
            hint = None
            rest = parts[1:]
            if "HINT" in [x.upper() for x in rest]:
                i = [x.upper() for x in rest].index("HINT")
                hint_str = rest[i + 1:]
                if len(hint_str) != 1:
                    self.error(CircuitSyntaxError, "HINT takes one Pauli", lineno)
                hint = self.pauli(hint_str[0], lineno)
                rest = rest[:i]
            if len(rest) != 1:
                self.error(CircuitSyntaxError, "M takes one Pauli", lineno)
            p = self.pauli(rest[0], lineno)
            self.instrs.append(Measure(p, hint))
            self.n_outcomes += 1
        elif op == "RAND":
            self.instrs.append(RandBit())
            self.n_outcomes += 1
        elif op == "COND":
            try:
                i = [x.upper() for x in parts].index("IF")
            except ValueError:
                self.error(CircuitSyntaxError, "COND requires IF", lineno)
            p = self.pauli(" ".join(parts[1:i]), lineno)
            cond = parts[i + 1:]
            if len(cond) != 3 or cond[1] != "==":
                self.error(CircuitSyntaxError, "COND must read 'IF i1^i2^... == b'", lineno)
            try:
                idxs = tuple(int(t) for t in cond[0].split("^"))
                parity = int(cond[2])
            except ValueError:
                self.error(CircuitSyntaxError, "malformed COND indices", lineno)
            if parity not in (0, 1):
                self.error(CircuitSyntaxError, "COND parity must be 0 or 1", lineno)
            for j in idxs:
                if j >= self.n_outcomes or j < 0:
                    self.error(
                        ForwardOutcomeReference,
                        f"outcome {j} not yet produced (have {self.n_outcomes})",
                        lineno,
                    )
            self.instrs.append(CondPauli(p, idxs, parity))
        elif op == "ROT":
            if len(parts) != 3:
                self.error(CircuitSyntaxError, "ROT takes a label and one Pauli", lineno)
            label = parts[1]
            if label in self.rot_labels:
                self.error(DuplicateRotationLabel, f"rotation label {label!r} reused", lineno)
            p = self.pauli(parts[2], lineno)
            if p.is_identity_bits():
                self.error(CircuitSyntaxError, "rotation axis must not be the identity", lineno)
            self.rot_labels.append(label)
            self.instrs.append(Rot(label, p))
        else:
            self.error(CircuitSyntaxError, f"unknown instruction {parts[0]!r}", lineno)

    def _qubit_arg(self, parts, i, lineno) -> int:
        try:
            return int(parts[i])
        except (IndexError, ValueError):
            self.error(CircuitSyntaxError, "expected a qubit index", lineno)


def parse(text: str) -> Circuit:
    """Parse the text format; raises CircuitSyntaxError subclasses on failure."""
    return _Parser(text).parse()


def print_circuit(c: Circuit) -> str:
    """Canonical text of a parseable circuit (inverse of parse)."""
    lines = [f"qubits {c.n_inputs + _header_allocs(c)}"]
    if c.n_inputs:
        lines.append(f"inputs {c.n_inputs}")
    header_remaining = _header_allocs(c)
    next_id = c.n_inputs
    for g in c.instructions:
        if isinstance(g, Alloc):
            if g.qubit != next_id:
                raise ValueError("non-sequential allocations have no text form")
            next_id += 1
            if header_remaining > 0:
                header_remaining -= 1
            else:
                lines.append("ALLOC")  # qubit id implied by allocation order
        elif isinstance(g, Free):
            lines.append(f"FREE {g.qubit}")
        elif isinstance(g, Gate):
            lines.append(f"{g.name} {' '.join(str(q) for q in g.qubits)}")
        elif isinstance(g, ExpGate):
            lines.append(f"EXP {'+' if g.sign == 1 else '-'} {g.pauli.to_string()}")
        elif isinstance(g, Measure):
            line = f"M {g.pauli.to_string()}"
            if g.hint is not None:
                line += f" HINT {g.hint.to_string()}"
            lines.append(line)
        elif isinstance(g, RandBit):
            lines.append("RAND")
        elif isinstance(g, CondPauli):
            cond = "^".join(str(i) for i in g.outcomes)
            lines.append(f"COND {g.pauli.to_string()} IF {cond} == {g.parity}")
        elif isinstance(g, Rot):
            lines.append(f"ROT {g.label} {g.pauli.to_string()}")
        else:
            raise ValueError(f"instruction {g!r} has no text form")
    return "\n".join(lines) + "\n"


def _header_allocs(c: Circuit) -> int:
    """Leading Alloc run emitted by the 'qubits N' header."""
    count = 0
    for g in c.instructions:
        if isinstance(g, Alloc):
            count += 1
        else:
            break
    return count


def lower_rotations(c: Circuit) -> tuple[Circuit, dict[str, int]]:
    """Replace each rotation by a conditional Pauli on a fresh angle bit.

    Angle bits are indexed by first appearance and are parameters, not
    outcomes: they occupy the leading coordinates of the random vector and
    get no conditional-probability entry.
    """
    registry: dict[str, int] = {}
    out: list[Instruction] = []
    for g in c.instructions:
        if isinstance(g, Rot):
            idx = registry.setdefault(g.label, len(registry))
            out.append(AngleCondPauli(g.pauli, idx))
        else:
            out.append(g)
    labels = tuple(sorted(registry, key=registry.get))
    return (
        Circuit(
            n_qubits=c.n_qubits,
            n_inputs=c.n_inputs,
            instructions=tuple(out),
            n_outcomes=c.n_outcomes,
            rotation_labels=(),
            angle_labels=labels,
        ),
        registry,
    )


def choi_closure(c: Circuit) -> Circuit:
    """Close over input qubits with Bell pairs.

    Each input qubit is paired with a fresh reference qubit via H and CX; the
    reference qubits become additional outputs (appended after all existing
    qubit ids). The result has no inputs.
    """
    if c.n_inputs == 0:
        return c
    n_in = c.n_inputs
    n_new = c.n_qubits + n_in
    prelude: list[Instruction] = []
    for q in range(n_in):
        prelude.append(Alloc(q))  # former input qubit, now allocated to |0>
    for r in range(n_in):
        prelude.append(Alloc(c.n_qubits + r))  # reference qubit
    for q in range(n_in):
        ref = c.n_qubits + q
        prelude.append(Gate("H", (ref,)))
        prelude.append(Gate("CX", (ref, q)))
    body = [_Parser._resize_instr(g, n_new) for g in c.instructions]
    return Circuit(
        n_qubits=n_new,
        n_inputs=0,
        instructions=tuple(prelude) + tuple(body),
        n_outcomes=c.n_outcomes,
        rotation_labels=c.rotation_labels,
        angle_labels=c.angle_labels,
    )
