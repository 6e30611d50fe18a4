"""Binary linear codes: construction, enumeration and structural analysis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .algebra import (BitMatrix, BitVector, GF2m, default_field, nullspace_basis, poly_mod,
                      poly_mul, rank)
from .errors import InvalidCode, InvalidSpec, LengthMismatch, TooLarge
from .rng import labelled_stream

ENUMERATION_LIMIT = 28
# materialised (2^k, n) tables; streaming enumeration goes up to ENUMERATION_LIMIT
TABLE_LIMIT = 22
# codeword tables are materialised in blocks of at most 2**BLOCK_BITS rows
BLOCK_BITS = 16


@dataclass(frozen=True, eq=False)
class LinearCode:
    """A binary ``[n, k]`` code given by generator ``G`` and parity check ``H``.

    Build instances with :meth:`from_generator` or :meth:`from_matrices`, which
    validate the invariants (full-rank G, ``G H^T = 0``, no zero column in G).
    """

    G: BitMatrix
    H: BitMatrix
    name: str = "code"

    @property
    def n(self) -> int:
        return self.G.ncols

    @property
    def k(self) -> int:
        return self.G.nrows

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def from_matrices(cls, G: BitMatrix, H: BitMatrix, name: str = "code", *,
                      allow_zero_columns: bool = False, **extra) -> "LinearCode":
        n, k = G.ncols, G.nrows
        if k < 1:
            raise InvalidCode("k must be at least 1")
        if H.ncols != n:
            raise InvalidCode("G and H have different lengths")
        if rank(G) != k:
            raise InvalidCode(f"rank(G) = {rank(G)} < k = {k}")
        if H.nrows != n - k or rank(H) != n - k:
            raise InvalidCode("H must have n-k independent rows")
        if H.nrows and not G.annihilates(H):
            raise InvalidCode("G H^T != 0")
        if not allow_zero_columns and 0 in G.column_keys():
            raise InvalidCode("G has a zero column")
        return cls(G, H, name, **extra)

    @classmethod
    def from_generator(cls, G: BitMatrix, name: str = "code", **kw) -> "LinearCode":
        if rank(G) != G.nrows:
            raise InvalidCode(f"rank(G) = {rank(G)} < k = {G.nrows}")
        return cls.from_matrices(G, nullspace_basis(G), name, **kw)

    @cached_property
    def column_keys(self) -> tuple[int, ...]:
        return tuple(self.G.column_keys())

    @cached_property
    def generator_array(self) -> np.ndarray:
        return self.G.to_array()

    def contains(self, x: BitVector) -> bool:
        if x.length != self.n:
            raise LengthMismatch(f"word length {x.length} != n = {self.n}")
        return all((x.value & h).bit_count() % 2 == 0 for h in self.H.rows)

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, n={self.n}, k={self.k})"


@dataclass(frozen=True, eq=False, repr=False)
class BchCode(LinearCode):
    """Narrow-sense binary BCH code; bit ``i`` is the coefficient of ``x^i``."""

    field: GF2m = field(default_factory=lambda: default_field(6))
    generator_poly: int = 0
    designed_distance: int = 0

    @property
    def t(self) -> int:
        return (self.designed_distance - 1) // 2


def encode(code: LinearCode, m: BitVector) -> BitVector:
    """Codeword ``m G``."""
    if m.length != code.k:
        raise LengthMismatch(f"message length {m.length} != k = {code.k}")
    return code.G.mul_vec(m)


def encode_array(code: LinearCode, messages: np.ndarray) -> np.ndarray:
    """Encode a ``(B, k)`` 0/1 array of messages to ``(B, n)``."""
    prod = messages.astype(np.float32) @ code.generator_array.astype(np.float32)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def _check_enumerable(code: LinearCode) -> None:
    if code.k > ENUMERATION_LIMIT:
        raise TooLarge(code.k, ENUMERATION_LIMIT)


def enumerate_codewords(code: LinearCode) -> Iterator[BitVector]:
    """All ``2^k`` codewords in Gray-code message order.

    Consecutive codewords differ by one row of G.
    """
    _check_enumerable(code)
    rows = code.G.rows
    x = 0
    yield BitVector(code.n, 0)
    for t in range(1, 1 << code.k):
        # bit that flips between gray(t-1) and gray(t)
        x ^= rows[(t & -t).bit_length() - 1]
        yield BitVector(code.n, x)


def _gray_table(rows: np.ndarray) -> np.ndarray:
    """Xor-combinations of ``rows`` in reflected Gray order."""
    table = np.zeros((1, rows.shape[1]), dtype=np.uint8)
    for r in rows:
        table = np.concatenate([table, table[::-1] ^ r])
    return table


def codeword_blocks(code: LinearCode, block_bits: int = BLOCK_BITS) -> Iterator[np.ndarray]:
    """Yield the codewords as ``(rows, n)`` uint8 arrays, each exactly once.

    The first block starts with the zero codeword.
    """
    _check_enumerable(code)
    g = code.generator_array
    low = _gray_table(g[:block_bits])
    if code.k <= block_bits:
        yield low
        return
    for offset in _gray_table(g[block_bits:]):
        yield low ^ offset


def codeword_table(code: LinearCode) -> np.ndarray:
    """All codewords as one ``(2^k, n)`` array (Gray order)."""
    cached = code.__dict__.get("_codeword_table")
    if cached is None:
        if code.k > TABLE_LIMIT:
            raise TooLarge(code.k, TABLE_LIMIT)
        cached = np.concatenate(list(codeword_blocks(code)))
        cached.setflags(write=False)
        code.__dict__["_codeword_table"] = cached
    return cached


def min_distance(code: LinearCode) -> int:
    """Minimum Hamming weight over the nonzero codewords."""
    best = code.n + 1
    first = True
    for block in codeword_blocks(code):
        w = block.sum(axis=1, dtype=np.int64)
        if first:
            w = w[1:]
            first = False
        if w.size:
            best = min(best, int(w.min()))
    return best


def dual(code: LinearCode) -> LinearCode:
    """The code generated by H, whose parity check matrix is G."""
    name = code.name[:-1] if code.name.endswith("*") else code.name + "*"
    return LinearCode.from_matrices(code.H, code.G, name, allow_zero_columns=True)


Constraint = tuple[int | Sequence[int], int]


def subcode_count(code: LinearCode, constraints: Iterable[Constraint]) -> int:
    """Number of codewords meeting every constraint, by enumeration.

    Each constraint is ``(i, b)`` for ``x_i = b`` or ``((i1, ..., il), b)`` for
    ``x_i1 + ... + x_il = b``; indices are 1-based.
    """
    cons = []
    for idx, b in constraints:
        idx = (idx,) if isinstance(idx, (int, np.integer)) else tuple(idx)
        for i in idx:
            if not 1 <= i <= code.n:
                raise IndexError(f"index {i} outside [1, {code.n}]")
        cons.append(([i - 1 for i in idx], int(b) & 1))
    total = 0
    for block in codeword_blocks(code):
        ok = np.ones(block.shape[0], dtype=bool)
        for idx, b in cons:
            ok &= (block[:, idx].sum(axis=1) & 1) == b
        total += int(ok.sum())
    return total


class CleanOrder(NamedTuple):
    """Largest ``l`` with every ``l`` distinct columns of G independent.

    ``capped`` is set when the search stopped at :data:`CLEAN_ORDER_CAP`, in
    which case the true value may be larger.
    """

    order: int
    capped: bool


CLEAN_ORDER_CAP = 4


def _pair_sums(keys: Sequence[int]) -> dict[int, list[tuple[int, int]]]:
    table: dict[int, list[tuple[int, int]]] = {}
    for a, b in itertools.combinations(range(len(keys)), 2):
        table.setdefault(keys[a] ^ keys[b], []).append((a, b))
    return table


def smallest_dependent_columns(code: LinearCode, limit: int = CLEAN_ORDER_CAP) -> tuple[int, ...] | None:
    """A smallest set (size <= ``limit``) of dependent columns, 1-based, or None."""
    keys = code.column_keys
    for j, g in enumerate(keys):
        if g == 0:
            return (j + 1,)
    if limit < 2:
        return None
    seen: dict[int, int] = {}
    for j, g in enumerate(keys):
        if g in seen:
            return (seen[g] + 1, j + 1)
        seen[g] = j
    if limit < 3:
        return None
    for a, b in itertools.combinations(range(len(keys)), 2):
        c = seen.get(keys[a] ^ keys[b])
        if c is not None:
            return tuple(sorted((a + 1, b + 1, c + 1)))
    if limit < 4:
        return None
    # distinct columns and no dependent triple: any pair-sum collision is
    # between disjoint pairs, hence a dependent 4-set
    firsts: dict[int, tuple[int, int]] = {}
    for a, b in itertools.combinations(range(len(keys)), 2):
        s = keys[a] ^ keys[b]
        if s in firsts:
            return tuple(sorted(firsts[s] + (a + 1, b + 1)))
        firsts[s] = (a + 1, b + 1)
    return None


def max_clean_order(code: LinearCode) -> CleanOrder:
    """``d(C*) - 1`` computed from column combinatorics, capped at 4."""
    dep = smallest_dependent_columns(code, CLEAN_ORDER_CAP)
    if dep is None:
        return CleanOrder(CLEAN_ORDER_CAP, True)
    return CleanOrder(len(dep) - 1, False)


# ---------------------------------------------------------------------------
# concrete families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomCodeSpec:
    """Systematic code ``[I_k | A_1 ... A_blocks]`` with weight-``w`` circulants."""

    k: int
    blocks: int
    w: int
    seed: int

    @property
    def n(self) -> int:
        return self.k * (self.blocks + 1)

    def validate(self) -> None:
        if self.k < 1 or self.blocks < 1:
            raise InvalidSpec("k and blocks must be positive")
        if not 1 <= self.w <= self.k:
            raise InvalidSpec(f"w must be in [1, k], got {self.w}")
        if self.n > 4096:
            raise InvalidSpec("code length exceeds 4096")


MAX_REDRAWS = 64


def _circulant(k: int, w: int) -> np.ndarray:
    r = np.arange(k)[:, None]
    c = np.arange(k)[None, :]
    return ((r - c) % k < w).astype(np.uint8)


def _fisher_yates(n: int, gen: np.random.Generator) -> list[int]:
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(gen.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def random_systematic_circulant(spec: RandomCodeSpec) -> LinearCode:
    """Random systematic code with column-permuted circulant parity blocks.

    Each block is redrawn (fresh sub-seed) if it would break the code
    invariants; after :data:`MAX_REDRAWS` failures :class:`InvalidSpec` is raised.
    """
    spec.validate()
    k = spec.k
    base = _circulant(k, spec.w)
    parts = [np.eye(k, dtype=np.uint8)]
    for j in range(spec.blocks):
        for attempt in range(MAX_REDRAWS):
            gen = labelled_stream(spec.seed, "permutation", j, attempt)
            block = base[:, _fisher_yates(k, gen)]
            if block.any(axis=0).all():
                break
        else:
            raise InvalidSpec(f"could not draw block {j}")
        parts.append(block)
    G = BitMatrix.from_array(np.concatenate(parts, axis=1))
    name = f"random_k{k}_b{spec.blocks}_w{spec.w}_s{spec.seed}"
    return LinearCode.from_generator(G, name)


def bch_code(m: int, k: int) -> BchCode:
    """Narrow-sense binary BCH code of length ``2^m - 1`` and dimension ``k``.

    The generator is the lcm of the minimal polynomials of ``alpha^1,
    alpha^2, ...``, taking as many as needed to reach degree ``n - k``.
    """
    gf = default_field(m)
    n = gf.order
    g = 1
    roots: set[int] = set()
    j = 0
    while g.bit_length() - 1 < n - k:
        j += 1
        if j % n in roots:
            continue
        mp = gf.minimal_polynomial(gf.alpha_pow(j))
        c = j % n
        while c not in roots:
            roots.add(c)
            c = (2 * c) % n
        g = poly_mul(g, mp)
    if g.bit_length() - 1 != n - k:
        raise InvalidSpec(f"no narrow-sense BCH code with n={n}, k={k}")
    delta = 1
    while delta % n in roots:
        delta += 1
    designed = delta
    r = n - k
    rows = []
    for i in range(k):
        shifted = 1 << (r + i)
        rows.append(shifted | poly_mod(shifted, g))
    G = BitMatrix(k, n, tuple(rows))
    code = LinearCode.from_generator(G)
    return BchCode(G, code.H, f"bch{n}_{k}", field=gf, generator_poly=g,
                   designed_distance=designed)


def bch_63_7() -> BchCode:
    return bch_code(6, 7)


HERMITIAN_16_ROWS = (
    "1000000010100111",
    "0100000001011110",
    "0010000010001010",
    "0001000001000101",
    "0000100000101010",
    "0000010000010101",
    "0000001010101101",
    "0000000101011011",
)


def hermitian_16() -> LinearCode:
    """The expanded geometric Reed-Solomon code on the Hermitian curve, r = 2."""
    G = BitMatrix.from_rows([BitVector.from_string(s) for s in HERMITIAN_16_ROWS])
    return LinearCode.from_generator(G, "hermitian16")


def hamming_7_4() -> LinearCode:
    G = BitMatrix.from_rows([BitVector.from_string(s) for s in
                             ("1000110", "0100011", "0010111", "0001101")])
    return LinearCode.from_generator(G, "hamming7_4")


def repetition(n: int) -> LinearCode:
    return LinearCode.from_generator(BitMatrix(1, n, ((1 << n) - 1,)), f"repetition{n}")


BUILTINS = {
    "hermitian16": hermitian_16,
    "bch63_7": bch_63_7,
    "hamming7_4": hamming_7_4,
    "repetition3": lambda: repetition(3),
}


def builtin(name: str) -> LinearCode:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise InvalidSpec(f"unknown builtin code {name!r}; choose from {sorted(BUILTINS)}")
