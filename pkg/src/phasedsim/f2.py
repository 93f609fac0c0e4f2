"""Bit-packed vectors and matrices over F2.

Vectors and matrices are immutable. Storage is 0-indexed Python style; the
first coordinate of a vector (coordinate 1 in maths notation) is bit 0 of the
packed integer, and serialized row strings list it first.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .errors import DimensionMismatch, SingularMatrix


def _parity(x: int) -> int:
    return x.bit_count() & 1


class BitVector:
    """Immutable vector over F2, packed into a single int (bit i = coordinate i)."""

    __slots__ = ("len", "bits")

    def __init__(self, length: int, bits: int = 0):
        if length < 0:
            raise ValueError("negative length")
        object.__setattr__(self, "len", length)
        object.__setattr__(self, "bits", bits & ((1 << length) - 1))

    def __setattr__(self, name, value):
        raise AttributeError("BitVector is immutable")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        acc = 0
        n = 0
        for b in bits:
            if b & 1:
                acc |= 1 << n
            n += 1
        return cls(n, acc)

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length, 0)

    @classmethod
    def unit(cls, length: int, index: int) -> "BitVector":
        if not 0 <= index < length:
            raise IndexError(f"coordinate {index + 1} out of range 1..{length}")
        return cls(length, 1 << index)

    def __len__(self) -> int:
        return self.len

    def __getitem__(self, index: int) -> int:
        if not 0 <= index < self.len:
            raise IndexError(f"coordinate {index + 1} out of range 1..{self.len}")
        return (self.bits >> index) & 1

    def __iter__(self) -> Iterator[int]:
        return ((self.bits >> i) & 1 for i in range(self.len))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.len != other.len:
            raise DimensionMismatch(f"vector lengths {self.len} != {other.len}")
        return BitVector(self.len, self.bits ^ other.bits)

    __add__ = __xor__

    def dot(self, other: "BitVector") -> int:
        """Inner product over F2."""
        if self.len != other.len:
            raise DimensionMismatch(f"vector lengths {self.len} != {other.len}")
        return _parity(self.bits & other.bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def support(self) -> list[int]:
        return [i for i in range(self.len) if (self.bits >> i) & 1]

    def set(self, index: int, value: int) -> "BitVector":
        """Return a copy with one coordinate replaced."""
        if not 0 <= index < self.len:
            raise IndexError(f"coordinate {index + 1} out of range 1..{self.len}")
        if value & 1:
            return BitVector(self.len, self.bits | (1 << index))
        return BitVector(self.len, self.bits & ~(1 << index))

    def concat(self, other: "BitVector") -> "BitVector":
        return BitVector(self.len + other.len, self.bits | (other.bits << self.len))

    def take(self, indices: Sequence[int]) -> "BitVector":
        """Vector of the given coordinates, in the given order."""
        acc = 0
        for pos, i in enumerate(indices):
            if (self.bits >> i) & 1:
                acc |= 1 << pos
        return BitVector(len(indices), acc)

    def is_zero(self) -> bool:
        return self.bits == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVector)
            and self.len == other.len
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((self.len, self.bits))

    def to_string(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.len))

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        return cls.from_bits(int(c) for c in s)

    def __repr__(self) -> str:
        return f"BitVector('{self.to_string()}')"


class BitMatrix:
    """Immutable row-major matrix over F2; each row packed into an int."""

    __slots__ = ("rows", "cols", "_rows")

    def __init__(self, rows: int, cols: int, row_bits: Sequence[int] | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimensions")
        mask = (1 << cols) - 1
        if row_bits is None:
            packed = (0,) * rows
        else:
            if len(row_bits) != rows:
                raise ValueError("row count mismatch")
            packed = tuple(r & mask for r in row_bits)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "_rows", packed)

    def __setattr__(self, name, value):
        raise AttributeError("BitMatrix is immutable")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, [1 << i for i in range(n)])

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "BitMatrix":
        vecs = [BitVector.from_bits(r) for r in rows]
        if not vecs:
            return cls(0, 0)
        cols = vecs[0].len
        if any(v.len != cols for v in vecs):
            raise ValueError("ragged rows")
        return cls(len(vecs), cols, [v.bits for v in vecs])

    @classmethod
    def from_row_vectors(cls, vecs: Sequence[BitVector], cols: int | None = None) -> "BitMatrix":
        if cols is None:
            if not vecs:
                raise ValueError("cannot infer column count")
            cols = vecs[0].len
        if any(v.len != cols for v in vecs):
            raise DimensionMismatch("row length mismatch")
        return cls(len(vecs), cols, [v.bits for v in vecs])

    @classmethod
    def from_col_vectors(cls, vecs: Sequence[BitVector], rows: int | None = None) -> "BitMatrix":
        if rows is None:
            if not vecs:
                raise ValueError("cannot infer row count")
            rows = vecs[0].len
        if any(v.len != rows for v in vecs):
            raise DimensionMismatch("column length mismatch")
        row_bits = []
        for i in range(rows):
            acc = 0
            for j, v in enumerate(vecs):
                if (v.bits >> i) & 1:
                    acc |= 1 << j
            row_bits.append(acc)
        return cls(rows, len(vecs), row_bits)

    def __getitem__(self, pos: tuple[int, int]) -> int:
        i, j = pos
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i + 1},{j + 1}) out of range {self.rows}x{self.cols}")
        return (self._rows[i] >> j) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self._rows[i])

    def col(self, j: int) -> BitVector:
        acc = 0
        for i in range(self.rows):
            if (self._rows[i] >> j) & 1:
                acc |= 1 << i
        return BitVector(self.rows, acc)

    def row_list(self) -> list[BitVector]:
        return [BitVector(self.cols, r) for r in self._rows]

    def transpose(self) -> "BitMatrix":
        row_bits = [0] * self.cols
        for i, r in enumerate(self._rows):
            while r:
                j = (r & -r).bit_length() - 1
                row_bits[j] |= 1 << i
                r &= r - 1
        return BitMatrix(self.cols, self.rows, row_bits)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = []
        for r in self._rows:
            acc = 0
            rr = r
            while rr:
                k = (rr & -rr).bit_length() - 1
                acc ^= other._rows[k]
                rr &= rr - 1
            out.append(acc)
        return BitMatrix(self.rows, other.cols, out)

    def mul_vec(self, v: BitVector) -> BitVector:
        """Matrix times column vector."""
        if self.cols != v.len:
            raise DimensionMismatch(f"{self.rows}x{self.cols} times length-{v.len} vector")
        acc = 0
        for i, r in enumerate(self._rows):
            if _parity(r & v.bits):
                acc |= 1 << i
        return BitVector(self.rows, acc)

    def vec_mul(self, v: BitVector) -> BitVector:
        """Row vector times matrix (equals transpose(self) @ v)."""
        if self.rows != v.len:
            raise DimensionMismatch(f"length-{v.len} vector times {self.rows}x{self.cols}")
        acc = 0
        b = v.bits
        while b:
            i = (b & -b).bit_length() - 1
            acc ^= self._rows[i]
            b &= b - 1
        return BitVector(self.cols, acc)

    def __xor__(self, other: "BitMatrix") -> "BitMatrix":
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch("matrix shape mismatch")
        return BitMatrix(self.rows, self.cols, [a ^ b for a, b in zip(self._rows, other._rows)])

    __add__ = __xor__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self._rows == other._rows
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._rows))

    def is_zero(self) -> bool:
        return all(r == 0 for r in self._rows)

    def to_strings(self) -> list[str]:
        """Serialize as row strings, row 1 first, coordinate 1 first character."""
        return [self.row(i).to_string() for i in range(self.rows)]

    @classmethod
    def from_strings(cls, lines: Sequence[str], cols: int | None = None) -> "BitMatrix":
        if not lines:
            return cls(0, 0 if cols is None else cols)
        vecs = [BitVector.from_string(s) for s in lines]
        return cls.from_row_vectors(vecs, cols)

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def outer(u: BitVector, v: BitVector) -> BitMatrix:
    """Rank-one matrix u v^T."""
    return BitMatrix(u.len, v.len, [v.bits if (u.bits >> i) & 1 else 0 for i in range(u.len)])


def _row_rref(m: BitMatrix) -> tuple[BitMatrix, BitMatrix, list[int]]:
    """Row-reduce: returns (e, t, pivots) with e = t @ m in RREF, t invertible."""
    work = list(m._rows)
    trans = [1 << i for i in range(m.rows)]
    pivots: list[int] = []
    rank = 0
    for j in range(m.cols):
        pivot = None
        for i in range(rank, m.rows):
            if (work[i] >> j) & 1:
                pivot = i
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        trans[rank], trans[pivot] = trans[pivot], trans[rank]
        for i in range(m.rows):
            if i != rank and (work[i] >> j) & 1:
                work[i] ^= work[rank]
                trans[i] ^= trans[rank]
        pivots.append(j)
        rank += 1
    return (
        BitMatrix(m.rows, m.cols, work),
        BitMatrix(m.rows, m.rows, trans),
        pivots,
    )


def rref_with_transform(m: BitMatrix) -> tuple[BitMatrix, BitMatrix, tuple[int, ...]]:
    """Reduce by column operations: returns (r, t, profile) with r = m @ t.

    r is in reduced column echelon form (equivalently r^T is the RREF of m^T),
    t is invertible, and profile lists the pivot row indices in increasing
    order. A zero matrix yields an empty profile and t = identity.
    """
    e, t_left, pivots = _row_rref(m.transpose())
    return e.transpose(), t_left.transpose(), tuple(pivots)


def is_reduced_column_echelon(m: BitMatrix) -> bool:
    """Mechanical predicate for the shape produced by rref_with_transform."""
    pivots = []
    for j in range(m.cols):
        c = m.col(j)
        if c.is_zero():
            # all later columns must be zero too
            return all(m.col(k).is_zero() for k in range(j + 1, m.cols))
        p = c.support()[0]
        if pivots and p <= pivots[-1]:
            return False
        # pivot row has a single 1 across all columns
        if m.row(p).weight() != 1:
            return False
        pivots.append(p)
    return True


def inverse(a: BitMatrix) -> BitMatrix:
    """Inverse over F2; raises SingularMatrix when rank deficient."""
    if a.rows != a.cols:
        raise DimensionMismatch(f"matrix {a.rows}x{a.cols} is not square")
    e, t, pivots = _row_rref(a)
    if len(pivots) != a.rows:
        raise SingularMatrix(f"rank {len(pivots)} < {a.rows}")
    return t


def inverse_transpose(a: BitMatrix) -> BitMatrix:
    """(a^T)^{-1} over F2."""
    return inverse(a.transpose())


def rank(a: BitMatrix) -> int:
    return len(_row_rref(a)[2])


def kernel_basis(a: BitMatrix) -> list[BitVector]:
    """Basis of {v : a v = 0}."""
    e, _, pivots = _row_rref(a)
    pivot_set = set(pivots)
    free = [j for j in range(a.cols) if j not in pivot_set]
    basis = []
    for f in free:
        bits = 1 << f
        for i, p in enumerate(pivots):
            if e[i, f]:
                bits |= 1 << p
        basis.append(BitVector(a.cols, bits))
    return basis


def solve(a: BitMatrix, b: BitVector) -> BitVector:
    """One solution x of a x = b; raises SingularMatrix when inconsistent."""
    if a.rows != b.len:
        raise DimensionMismatch("right-hand side length mismatch")
    e, t, pivots = _row_rref(a)
    tb = t.mul_vec(b)
    x = 0
    for i, p in enumerate(pivots):
        if tb[i]:
            x |= 1 << p
    for i in range(len(pivots), a.rows):
        if tb[i]:
            raise SingularMatrix("inconsistent system")
    return BitVector(a.cols, x)
