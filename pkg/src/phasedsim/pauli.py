"""Exact-phase Pauli algebra.

A Pauli on n qubits is stored in the normal form i^s X^x Z^z with s mod 4.
All products and conjugations keep the scalar exactly; nothing is tracked
"up to sign".
"""

from __future__ import annotations

import re

from .errors import DimensionMismatch, NonHermitian
from .f2 import BitVector


class PauliOperator:
    """i^s X^x Z^z with s in Z4 and x, z bit vectors of equal length."""

    __slots__ = ("s", "x", "z")

    def __init__(self, s: int, x: BitVector, z: BitVector):
        if x.len != z.len:
            raise DimensionMismatch(f"x has {x.len} qubits, z has {z.len}")
        object.__setattr__(self, "s", s & 3)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    def __setattr__(self, name, value):
        raise AttributeError("PauliOperator is immutable")

    @property
    def n(self) -> int:
        return self.x.len

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(0, BitVector(n), BitVector(n))

    @classmethod
    def single(cls, kind: str, index: int, n: int) -> "PauliOperator":
        e = BitVector.unit(n, index)
        o = BitVector(n)
        if kind == "X":
            return cls(0, e, o)
        if kind == "Z":
            return cls(0, o, e)
        if kind == "Y":
            return cls(1, e, e)
        raise ValueError(f"unknown Pauli letter {kind!r}")

    @classmethod
    def from_xz(cls, x: BitVector, z: BitVector, sign: int = 0) -> "PauliOperator":
        """Hermitian operator (-1)^sign with the given bits, phase fixed by x,z."""
        return cls((x.dot(z) + 2 * sign) & 3, x, z)

    def is_identity_bits(self) -> bool:
        return self.x.is_zero() and self.z.is_zero()

    def is_identity(self) -> bool:
        return self.s == 0 and self.is_identity_bits()

    def is_hermitian(self) -> bool:
        return (self.s & 1) == self.x.dot(self.z)

    def hermitian_sign(self) -> int:
        """For a Hermitian operator, the bit b with self = (-1)^b * positive form.

        The positive form is the plain tensor of letters, carrying i per Y.
        """
        if not self.is_hermitian():
            raise NonHermitian(str(self))
        ys = (self.x.bits & self.z.bits).bit_count()
        return ((self.s - ys) >> 1) & 1

    def phase_times(self, k: int) -> "PauliOperator":
        """Multiply by i^k."""
        return PauliOperator(self.s + k, self.x, self.z)

    def mul(self, other: "PauliOperator") -> "PauliOperator":
        """Exact matrix product self * other."""
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} != {other.n} qubits")
        s = self.s + other.s + 2 * self.z.dot(other.x)
        return PauliOperator(s, self.x ^ other.x, self.z ^ other.z)

    __mul__ = mul

    def dagger(self) -> "PauliOperator":
        return PauliOperator(-self.s + 2 * self.x.dot(self.z), self.x, self.z)

    def comm(self, other: "PauliOperator") -> int:
        """0 when the operators commute, 1 when they anticommute."""
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} != {other.n} qubits")
        return self.x.dot(other.z) ^ self.z.dot(other.x)

    def weight(self) -> int:
        return (self.x.bits | self.z.bits).bit_count()

    def support(self) -> list[int]:
        return BitVector(self.n, self.x.bits | self.z.bits).support()

    def h_conjugate(self, hmask: BitVector) -> "PauliOperator":
        """Conjugate by Hadamard on the masked qubits (swaps X and Z there)."""
        m = hmask.bits
        keep = ~m
        nx = (self.x.bits & keep) | (self.z.bits & m)
        nz = (self.z.bits & keep) | (self.x.bits & m)
        # on each swapped qubit carrying XZ, HXZH = ZX = -XZ
        flip = (self.x.bits & self.z.bits & m).bit_count() & 1
        return PauliOperator(
            self.s + 2 * flip, BitVector(self.n, nx), BitVector(self.n, nz)
        )

    def restrict(self, mask: BitVector) -> "PauliOperator":
        """Factor supported on the masked qubits, Hermitian if self is.

        The complementary factor (restrict to the complement, with the phase
        balanced) multiplies with this one back to self when the mask splits
        the support.
        """
        x = BitVector(self.n, self.x.bits & mask.bits)
        z = BitVector(self.n, self.z.bits & mask.bits)
        return PauliOperator(x.dot(z), x, z)

    def embed(self, n: int, positions: list[int]) -> "PauliOperator":
        """Place qubit i of self at positions[i] of an n-qubit operator."""
        x = 0
        z = 0
        for i, p in enumerate(positions):
            if self.x[i]:
                x |= 1 << p
            if self.z[i]:
                z |= 1 << p
        return PauliOperator(self.s, BitVector(n, x), BitVector(n, z))

    def take(self, positions: list[int]) -> "PauliOperator":
        """Operator on len(positions) qubits read off the given coordinates."""
        return PauliOperator(self.s, self.x.take(positions), self.z.take(positions))

    def insert_qubit(self, pos: int) -> "PauliOperator":
        """Insert an identity qubit at the given position."""
        low = (1 << pos) - 1
        nx = (self.x.bits & low) | ((self.x.bits & ~low) << 1)
        nz = (self.z.bits & low) | ((self.z.bits & ~low) << 1)
        return PauliOperator(self.s, BitVector(self.n + 1, nx), BitVector(self.n + 1, nz))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliOperator)
            and self.s == other.s
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self) -> int:
        return hash((self.s, self.x, self.z))

    def to_string(self) -> str:
        """Render in the shared text syntax, e.g. '-Y0*Y2', 'iX1', '+I'."""
        letters = []
        for q in range(self.n):
            xb, zb = self.x[q], self.z[q]
            if xb and zb:
                letters.append(f"Y{q}")
            elif xb:
                letters.append(f"X{q}")
            elif zb:
                letters.append(f"Z{q}")
        # phase relative to the Y-normalized letters: Y contributes one i each
        ys = (self.x.bits & self.z.bits).bit_count()
        rel = (self.s - ys) & 3
        prefix = {0: "", 1: "+i", 2: "-", 3: "-i"}[rel]
        if not letters:
            return (prefix or "+") + "I"
        return prefix + "*".join(letters)

    _FACTOR = re.compile(r"([XYZ])(\d+)")

    @classmethod
    def from_string(cls, text: str, n: int | None = None) -> "PauliOperator":
        """Parse the shared syntax: optional +/-/+i/-i prefix, X<q>*Y<q>... or I."""
        s = text.strip()
        rel = 0
        for prefix, val in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if s.startswith(prefix):
                rel = val
                s = s[len(prefix):]
                break
        if s == "I":
            if n is None:
                n = 0
            return cls(rel, BitVector(n), BitVector(n))
        xs = 0
        zs = 0
        ys = 0
        maxq = -1
        for part in s.split("*"):
            m = cls._FACTOR.fullmatch(part.strip())
            if not m:
                raise ValueError(f"bad Pauli factor {part!r} in {text!r}")
            kind, q = m.group(1), int(m.group(2))
            if (xs | zs) >> q & 1:
                raise ValueError(f"qubit {q} repeated in {text!r}")
            maxq = max(maxq, q)
            if kind in ("X", "Y"):
                xs |= 1 << q
            if kind in ("Z", "Y"):
                zs |= 1 << q
            if kind == "Y":
                ys += 1
        if n is None:
            n = maxq + 1
        elif maxq >= n:
            raise ValueError(f"qubit {maxq} out of range for {n} qubits")
        return cls(rel + ys, BitVector(n, xs), BitVector(n, zs))

    def __repr__(self) -> str:
        return f"PauliOperator({self.to_string()!r}, n={self.n})"


def mul(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    return a.mul(b)


def comm(a: PauliOperator, b: PauliOperator) -> int:
    return a.comm(b)


class ControlledPauli:
    """Unitary acting as p2 on the -1 eigenspace of p1 (identity elsewhere).

    p1 and p2 must be commuting Hermitian operators. Either argument equal to
    the identity yields the identity unitary; such degenerate gates are legal.
    """

    __slots__ = ("p1", "p2")

    def __init__(self, p1: PauliOperator, p2: PauliOperator):
        if p1.n != p2.n:
            raise DimensionMismatch(f"{p1.n} != {p2.n} qubits")
        if not (p1.is_hermitian() and p2.is_hermitian()):
            raise NonHermitian("controlled-Pauli arguments must be Hermitian")
        if p1.comm(p2):
            raise ValueError("controlled-Pauli arguments must commute")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)

    def __setattr__(self, name, value):
        raise AttributeError("ControlledPauli is immutable")

    @property
    def n(self) -> int:
        return self.p1.n

    def is_identity(self) -> bool:
        return self.p1.is_identity() or self.p2.is_identity()

    def is_css(self) -> bool:
        """True for gates of the form (X-type control, Z-type target) or dual."""
        return (self.p1.z.is_zero() and self.p2.x.is_zero()) or (
            self.p1.x.is_zero() and self.p2.z.is_zero()
        )

    def conjugate(self, q: PauliOperator) -> PauliOperator:
        """Image of q under conjugation; the gate is an involution."""
        if q.n != self.n:
            raise DimensionMismatch(f"{q.n} != {self.n} qubits")
        out = q
        if self.p2.comm(q):
            out = self.p1.mul(out)
        if self.p1.comm(q):
            out = out.mul(self.p2)
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ControlledPauli)
            and self.p1 == other.p1
            and self.p2 == other.p2
        )

    def __hash__(self) -> int:
        return hash((self.p1, self.p2))

    def __repr__(self) -> str:
        return f"ControlledPauli({self.p1.to_string()}, {self.p2.to_string()})"


def cpauli_conjugate(g: ControlledPauli, q: PauliOperator) -> PauliOperator:
    return g.conjugate(q)


class PauliExponent:
    """exp(sign * i*pi/4 * p) for a Hermitian Pauli p."""

    __slots__ = ("sign", "p")

    def __init__(self, sign: int, p: PauliOperator):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not p.is_hermitian():
            raise NonHermitian("exponent axis must be Hermitian")
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("PauliExponent is immutable")

    @property
    def n(self) -> int:
        return self.p.n

    def axis(self) -> PauliOperator:
        """The Hermitian operator Q with self = exp(i*pi/4*Q) (sign folded in)."""
        return self.p if self.sign == 1 else self.p.phase_times(2)

    def dagger(self) -> "PauliExponent":
        return PauliExponent(-self.sign, self.p)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliExponent)
            and self.sign == other.sign
            and self.p == other.p
        )

    def __hash__(self) -> int:
        return hash((self.sign, self.p))

    def __repr__(self) -> str:
        s = "+" if self.sign == 1 else "-"
        return f"PauliExponent({s}, {self.p.to_string()})"
