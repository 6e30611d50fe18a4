"""Dense F2 vectors and matrices packed into machine words.

Bits are stored little-endian: bit ``j`` of a vector (0-based) is bit ``j``
of the underlying integer, so word ``w`` of the packed form holds positions
``64*w .. 64*w + 63``.  Python integers give exact packed storage and fast
xor/and/popcount; :meth:`BitVector.words` exposes the ``uint64`` layout for
vectorised code.

Column indices passed to *code-level* functions elsewhere in the package are
1-based, as in the coding literature.  The containers here behave like Python
sequences and index from 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import IndexOutOfRange, LengthMismatch, RankDeficient

MAX_LENGTH = 4096
WORD_BITS = 64


def _check_length(n: int) -> None:
    if not 1 <= n <= MAX_LENGTH:
        raise ValueError(f"bit length must be in [1, {MAX_LENGTH}], got {n}")


@dataclass(frozen=True)
class BitVector:
    """An immutable vector over F2.

    Parameters
    ----------
    length : int
        Number of bits.
    value : int
        Packed bits, position ``j`` at bit ``j``.
    """

    length: int
    value: int = 0

    def __post_init__(self):
        _check_length(self.length)
        if self.value < 0 or self.value >> self.length:
            raise ValueError("value has bits outside the vector length")

    # -- construction -------------------------------------------------------
    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> "BitVector":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        bits = [int(b) for b in bits]
        value = 0
        for j, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit {j} is {b}, expected 0 or 1")
            if b:
                value |= 1 << j
        return cls(len(bits), value)

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        """Parse ``"0110"`` (position 0 first); spaces are ignored."""
        s = "".join(s.split())
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls.from_bits(int(c) for c in s)

    # -- views --------------------------------------------------------------
    def __len__(self) -> int:
        return self.length

    def __getitem__(self, j: int) -> int:
        if not -self.length <= j < self.length:
            raise IndexError(j)
        return (self.value >> (j % self.length)) & 1

    def __iter__(self):
        v = self.value
        for _ in range(self.length):
            yield v & 1
            v >>= 1

    def to_array(self) -> np.ndarray:
        return np.array(list(self), dtype=np.uint8)

    def words(self) -> np.ndarray:
        nw = -(-self.length // WORD_BITS)
        mask = (1 << WORD_BITS) - 1
        return np.array([(self.value >> (WORD_BITS * w)) & mask for w in range(nw)],
                        dtype=np.uint64)

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self)

    def weight(self) -> int:
        return self.value.bit_count()

    def support(self) -> list[int]:
        """0-based positions of the set bits."""
        return [j for j, b in enumerate(self) if b]

    # -- arithmetic ---------------------------------------------------------
    def _same(self, other: "BitVector") -> None:
        if self.length != other.length:
            raise LengthMismatch(f"lengths {self.length} and {other.length} differ")

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._same(other)
        return BitVector(self.length, self.value ^ other.value)

    __add__ = __xor__

    def __and__(self, other: "BitVector") -> "BitVector":
        self._same(other)
        return BitVector(self.length, self.value & other.value)

    def dot(self, other: "BitVector") -> int:
        self._same(other)
        return (self.value & other.value).bit_count() & 1

    def flip(self, j: int) -> "BitVector":
        return BitVector(self.length, self.value ^ (1 << j))


@dataclass(frozen=True)
class BitMatrix:
    """An immutable ``nrows x ncols`` matrix over F2 stored as packed rows."""

    nrows: int
    ncols: int
    rows: tuple[int, ...]

    def __post_init__(self):
        _check_length(self.ncols)
        if self.nrows < 0 or len(self.rows) != self.nrows:
            raise ValueError("row count does not match nrows")
        for r in self.rows:
            if r < 0 or r >> self.ncols:
                raise ValueError("row has bits outside ncols")

    # -- construction -------------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[BitVector], ncols: int | None = None) -> "BitMatrix":
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for an empty row list")
            ncols = rows[0].length
        for r in rows:
            if r.length != ncols:
                raise LengthMismatch("every row must have length ncols")
        return cls(len(rows), ncols, tuple(r.value for r in rows))

    @classmethod
    def from_array(cls, a) -> "BitMatrix":
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        if np.any((a != 0) & (a != 1)):
            raise ValueError("entries must be 0 or 1")
        return cls.from_rows([BitVector.from_bits(row) for row in a], ncols=a.shape[1])

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << j for j in range(n)))

    # -- views --------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def row(self, r: int) -> BitVector:
        return BitVector(self.ncols, self.rows[r])

    def row_vectors(self) -> list[BitVector]:
        return [BitVector(self.ncols, r) for r in self.rows]

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            out[i] = BitVector(self.ncols, r).to_array()
        return out

    def column_keys(self) -> list[int]:
        """Columns as integers, bit ``r`` holding row ``r``.

        These are exact, collision-free dictionary keys for any number of rows.
        """
        keys = [0] * self.ncols
        for r, row in enumerate(self.rows):
            bit = 1 << r
            j = 0
            while row:
                if row & 1:
                    keys[j] |= bit
                row >>= 1
                j += 1
        return keys

    def column(self, j: int) -> BitVector:
        """Column ``j`` (0-based) as a vector of length ``nrows``."""
        if not 0 <= j < self.ncols:
            raise IndexOutOfRange(f"column {j} outside [0, {self.ncols})")
        return BitVector(self.nrows, self.column_keys()[j])

    def transpose(self) -> "BitMatrix":
        if self.nrows == 0:
            raise ValueError("cannot transpose a matrix with no rows")
        return BitMatrix(self.ncols, self.nrows, tuple(self.column_keys()))

    def __str__(self) -> str:
        return "\n".join(str(v) for v in self.row_vectors())

    # -- algebra ------------------------------------------------------------
    def mul_vec(self, m: BitVector) -> BitVector:
        """Row-vector product ``m @ self``."""
        if m.length != self.nrows:
            raise LengthMismatch(f"message length {m.length} != {self.nrows} rows")
        acc = 0
        v = m.value
        r = 0
        while v:
            if v & 1:
                acc ^= self.rows[r]
            v >>= 1
            r += 1
        return BitVector(self.ncols, acc)

    def annihilates(self, other: "BitMatrix") -> bool:
        """True iff ``self @ other.T == 0``."""
        if self.ncols != other.ncols:
            raise LengthMismatch("column counts differ")
        return all((a & b).bit_count() % 2 == 0 for a in self.rows for b in other.rows)

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.ncols != other.ncols:
            raise LengthMismatch("column counts differ")
        return BitMatrix(self.nrows + other.nrows, self.ncols, self.rows + other.rows)

    def same_row_space(self, other: "BitMatrix") -> bool:
        if self.ncols != other.ncols:
            return False
        r = rank(self)
        return r == rank(other) == rank(self.vstack(other))


def _echelon(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    rows = list(rows)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        bit = 1 << c
        for s in range(r, len(rows)):
            if rows[s] & bit:
                rows[r], rows[s] = rows[s], rows[r]
                break
        else:
            continue
        for s in range(len(rows)):
            if s != r and rows[s] & bit:
                rows[s] ^= rows[r]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(m: BitMatrix) -> int:
    """F2 row rank by Gaussian elimination."""
    if m.nrows == 0:
        return 0
    return len(_echelon(list(m.rows), m.ncols)[1])


def nullspace_basis(m: BitMatrix) -> BitMatrix:
    """Basis of ``{h : m @ h.T = 0}`` as the rows of a matrix.

    The basis is canonical: from the reduced echelon form, one vector per free
    column in ascending order, with that free bit set and the pivot bits read
    off the reduced rows.

    Raises
    ------
    RankDeficient
        If the rows of ``m`` are linearly dependent.
    """
    red, pivots = _echelon(list(m.rows), m.ncols)
    if len(pivots) != m.nrows:
        raise RankDeficient(f"rank {len(pivots)} < {m.nrows} rows")
    pivot_set = set(pivots)
    basis = []
    for f in range(m.ncols):
        if f in pivot_set:
            continue
        h = 1 << f
        for row, p in zip(red, pivots):
            if row >> f & 1:
                h |= 1 << p
        basis.append(h)
    return BitMatrix(len(basis), m.ncols, tuple(basis))


def column_sum(m: BitMatrix, indices: Iterable[int]) -> BitVector:
    """Xor of the selected columns; ``indices`` are 1-based."""
    keys = m.column_keys()
    acc = 0
    for i in indices:
        if not 1 <= i <= m.ncols:
            raise IndexOutOfRange(f"column index {i} outside [1, {m.ncols}]")
        acc ^= keys[i - 1]
    return BitVector(m.nrows, acc)


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a ``(..., n)`` 0/1 array into ``(..., ceil(n/64))`` uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    nw = -(-n // WORD_BITS)
    padded = np.zeros(bits.shape[:-1] + (nw * WORD_BITS,), dtype=np.uint8)
    padded[..., :n] = bits
    by = np.packbits(padded, axis=-1, bitorder="little")
    return by.view("<u8").reshape(bits.shape[:-1] + (nw,)).astype(np.uint64)


def unpack_rows(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_rows`."""
    words = np.ascontiguousarray(words, dtype="<u8")
    by = words.view(np.uint8)
    return np.unpackbits(by, axis=-1, bitorder="little")[..., :n]
