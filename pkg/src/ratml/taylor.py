"""Taylor expansion of the rational map at the centre ``p``.

Two constructions are offered:

* :func:`clean_truncated_map` uses the column-combinatorics form
  ``f_i = u_i + (-2)^(l-1) sum_{Theta_i^(l)} v_i1 ... v_il``, valid when every
  ``l`` distinct columns of G are independent;
* :func:`general_taylor` computes the exact coefficients up to order 3 for any
  G, from closed-form values of the derivatives of ``H`` and ``I_i`` at ``p``.

All coordinate indices are 1-based.  Monomials are sorted index tuples; in the
general form an index may repeat (e.g. ``v_j^2 v_k``) when G has duplicate
columns.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .algebra import DyadicRational
from .code import LinearCode, smallest_dependent_columns
from .errors import HypothesisViolated, LengthMismatch, OrderOutOfRange
from .rational_map import LikelihoodPoint

THETA_MAX_ORDER = 4
GENERAL_MAX_ORDER = 3


# ---------------------------------------------------------------------------
# Theta sets
# ---------------------------------------------------------------------------

def _column_index(code: LinearCode) -> dict[int, list[int]]:
    """Column value -> ascending 0-based indices holding it."""
    cached = code.__dict__.get("_column_index")
    if cached is None:
        cached = {}
        for j, g in enumerate(code.column_keys):
            cached.setdefault(g, []).append(j)
        code.__dict__["_column_index"] = cached
    return cached


def _pair_table(code: LinearCode) -> dict[int, list[tuple[int, int]]]:
    """``g_a ^ g_b`` -> list of 0-based pairs ``a < b``; built once per code."""
    cached = code.__dict__.get("_pair_table")
    if cached is None:
        keys = code.column_keys
        cached = {}
        for a, b in itertools.combinations(range(len(keys)), 2):
            cached.setdefault(keys[a] ^ keys[b], []).append((a, b))
        code.__dict__["_pair_table"] = cached
    return cached


@dataclass(frozen=True)
class ThetaSet:
    """Index tuples ``(i1 < ... < il)``, none equal to ``i``, with
    ``g_i + g_i1 + ... + g_il = 0``."""

    i: int
    l: int
    tuples: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)


def theta(code: LinearCode, i: int, l: int) -> ThetaSet:
    """``Theta_i^(l)`` by associative lookup of column values.

    ``l = 2`` looks up ``g_i + g_a`` among single columns, ``l = 3`` among the
    shared pair-sum table, ``l = 4`` joins the pair-sum table with itself.
    """
    if not 2 <= l <= THETA_MAX_ORDER:
        raise OrderOutOfRange(f"theta order must be in [2, {THETA_MAX_ORDER}], got {l}")
    n = code.n
    if not 1 <= i <= n:
        raise IndexError(f"index {i} outside [1, {n}]")
    keys = code.column_keys
    i0 = i - 1
    gi = keys[i0]
    found: set[tuple[int, ...]] = set()
    if l == 2:
        cols = _column_index(code)
        for a in range(n):
            if a == i0:
                continue
            for b in cols.get(gi ^ keys[a], ()):
                if b > a and b != i0:
                    found.add((a, b))
    elif l == 3:
        pairs = _pair_table(code)
        for c in range(n):
            if c == i0:
                continue
            for a, b in pairs.get(gi ^ keys[c], ()):
                if i0 in (a, b) or c in (a, b):
                    continue
                found.add(tuple(sorted((a, b, c))))
    else:
        pairs = _pair_table(code)
        for s, left in pairs.items():
            right = pairs.get(s ^ gi)
            if not right or s > s ^ gi:
                continue
            for a, b in left:
                if i0 in (a, b):
                    continue
                for c, d in right:
                    if i0 in (c, d) or len({a, b, c, d}) < 4:
                        continue
                    found.add(tuple(sorted((a, b, c, d))))
    tuples = tuple(sorted(tuple(j + 1 for j in t) for t in found))
    return ThetaSet(i, l, tuples)


# ---------------------------------------------------------------------------
# truncated maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Term:
    """``coef * prod_{j in index} v_j`` contributing to coordinate ``coord``."""

    coord: int
    order: int
    index: tuple[int, ...]
    coef: float

    @classmethod
    def make(cls, coord: int, coef: float, index: Sequence[int]) -> "Term":
        index = tuple(sorted(index))
        return cls(coord, len(index), index, float(coef))


class TruncatedMap:
    """``f~(u) = p + sum of terms`` in the centred variables ``v = u - 1/2``.

    The linear part (the Jacobian at p) is stored as ordinary order-1 terms.
    """

    def __init__(self, n: int, order: int, terms: Iterable[Term], mode: str = "clean"):
        self.n = n
        self.order = order
        self.mode = mode
        self.terms = tuple(sorted(terms))
        for t in self.terms:
            if not 1 <= t.coord <= n or not all(1 <= j <= n for j in t.index):
                raise IndexError(f"term {t} refers to an index outside [1, {n}]")
            if not 1 <= t.order <= order:
                raise OrderOutOfRange(f"term {t} exceeds order {order}")

    def terms_for(self, i: int) -> list[Term]:
        return [t for t in self.terms if t.coord == i]

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, TruncatedMap):
            return NotImplemented
        return (self.n, self.order, self.terms) == (other.n, other.order, other.terms)

    def __repr__(self):
        return f"TruncatedMap(n={self.n}, order={self.order}, mode={self.mode!r}, terms={len(self)})"

    @cached_property
    def compiled(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Per monomial order: ``(index (T, m) 0-based, coord (T,), coef (T,))``."""
        out = []
        for m in range(1, self.order + 1):
            ts = [t for t in self.terms if t.order == m]
            if not ts:
                continue
            idx = np.array([t.index for t in ts], dtype=np.intp) - 1
            coord = np.array([t.coord for t in ts], dtype=np.intp) - 1
            coef = np.array([t.coef for t in ts])
            out.append((idx, coord, coef))
        return out

    def evaluate_v(self, V: np.ndarray) -> np.ndarray:
        """Evaluate at centred points ``V`` of shape ``(n,)`` or ``(B, n)``."""
        V = np.asarray(V, dtype=np.float64)
        if V.shape[-1] != self.n:
            raise LengthMismatch(f"point has length {V.shape[-1]}, map has n = {self.n}")
        flat = V.reshape(-1, self.n)
        out = np.full(flat.shape, 0.5)
        for idx, coord, coef in self.compiled:
            vals = flat[:, idx].prod(axis=2) * coef
            scatter = np.zeros((coord.size, self.n))
            scatter[np.arange(coord.size), coord] = 1.0
            out += vals @ scatter
        return out.reshape(V.shape)

    # text format -----------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"n {self.n} order {self.order}"]
        for t in self.terms:
            lines.append(f"{t.coord}\t{_format_coef(t.coef)}\t{','.join(map(str, t.index))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, mode: str = "clean") -> "TruncatedMap":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        head = lines[0].split()
        if len(head) != 4 or head[0] != "n" or head[2] != "order":
            raise ValueError("header must be 'n <n> order <l>'")
        terms = []
        for ln in lines[1:]:
            coord, coef, index = ln.split("\t")
            terms.append(Term.make(int(coord), float(coef), [int(j) for j in index.split(",")]))
        return cls(int(head[1]), int(head[3]), terms, mode)


def _format_coef(c: float) -> str:
    return str(int(c)) if float(c).is_integer() else repr(float(c))


def taylor_eval(tm: TruncatedMap, u) -> np.ndarray:
    """``f~(u)``, unclamped; ``u`` may be a point, a vector or a ``(B, n)`` batch."""
    u = u.u if isinstance(u, LikelihoodPoint) else np.asarray(u, dtype=np.float64)
    return tm.evaluate_v(u - 0.5)


def _identity_terms(n: int) -> list[Term]:
    return [Term.make(i, 1.0, (i,)) for i in range(1, n + 1)]


def clean_truncated_map(code: LinearCode, l: int) -> TruncatedMap:
    """``f~_i = u_i + (-2)^(l-1) sum_{Theta_i^(l)} v_i1 ... v_il``.

    Raises
    ------
    HypothesisViolated
        If some ``l`` or fewer distinct columns of G are dependent.
    """
    if not 2 <= l <= THETA_MAX_ORDER:
        raise OrderOutOfRange(f"clean order must be in [2, {THETA_MAX_ORDER}], got {l}")
    dep = smallest_dependent_columns(code, l)
    if dep is not None:
        raise HypothesisViolated(l, dep)
    coef = float((-2) ** (l - 1))
    terms = _identity_terms(code.n)
    for i in range(1, code.n + 1):
        terms.extend(Term.make(i, coef, t) for t in theta(code, i, l))
    return TruncatedMap(code.n, l, terms, "clean")


# ---------------------------------------------------------------------------
# closed-form derivative values at p
# ---------------------------------------------------------------------------

def _check_indices(code: LinearCode, S: Sequence[int]) -> None:
    for j in S:
        if not 1 <= j <= code.n:
            raise IndexError(f"index {j} outside [1, {code.n}]")


def _xor_columns(code: LinearCode, S: Sequence[int]) -> int:
    keys = code.column_keys
    s = 0
    for j in S:
        s ^= keys[j - 1]
    return s


def lemma_H(code: LinearCode, S: Sequence[int]) -> DyadicRational:
    """``d^S H(p)`` from the column classification.

    ``H(p) = 2^(k-n)``; with repeated indices or a nonzero column sum the
    derivative vanishes; otherwise it is ``(-1)^l 2^(-n+k+l)``.
    """
    S = tuple(S)
    _check_indices(code, S)
    l = len(S)
    if len(set(S)) < l or _xor_columns(code, S) != 0:
        return DyadicRational(0)
    return DyadicRational.pow2(code.k - code.n + l, (-1) ** l)


def lemma_I(code: LinearCode, i: int, S: Sequence[int]) -> DyadicRational:
    """``d^S I_i(p)`` from the column classification.

    With ``s = g_S`` the column sum: ``(-1)^l 2^(-n+k+l-1)`` if ``s = 0``,
    ``(-1)^(l+1) 2^(-n+k+l-1)`` if ``s = g_i``, zero otherwise or when an
    index repeats.  ``l = 0`` gives ``I_i(p) = 2^(k-n-1)`` and ``l = 1`` gives
    ``2^(k-n)`` exactly when ``g_j = g_i``.
    """
    S = tuple(S)
    _check_indices(code, S + (i,))
    l = len(S)
    if len(set(S)) < l:
        return DyadicRational(0)
    s = _xor_columns(code, S)
    e = code.k - code.n + l - 1
    if s == 0:
        return DyadicRational.pow2(e, (-1) ** l)
    if s == code.column_keys[i - 1]:
        return DyadicRational.pow2(e, (-1) ** (l + 1))
    return DyadicRational(0)


# ---------------------------------------------------------------------------
# quotient-rule engine
# ---------------------------------------------------------------------------

Values = Callable[[tuple[int, ...]], DyadicRational]


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for b in range(len(part)):
            yield part[:b] + [[first] + part[b]] + part[b + 1:]


def reciprocal_derivative(B: Sequence[int], H: Values) -> DyadicRational:
    """``d^B (1/H)`` at p, by Faa di Bruno over set partitions of ``B``."""
    H0 = H(())
    total = DyadicRational(0)
    for part in _set_partitions(list(range(len(B)))):
        prod = DyadicRational(1)
        for block in part:
            hv = H(tuple(B[j] for j in block))
            if not hv:
                prod = DyadicRational(0)
                break
            prod = prod * hv
        if prod:
            q = len(part)
            total = total + prod * ((-1) ** q * math.factorial(q)) / H0 ** (q + 1)
    return total


def quotient_derivative(S: Sequence[int], I: Values, H: Values) -> DyadicRational:
    """``d^S (I/H)`` at p via the Leibniz rule over the slots of ``S``."""
    S = tuple(S)
    total = DyadicRational(0)
    for r in range(len(S) + 1):
        for A in itertools.combinations(range(len(S)), r):
            ia = I(tuple(S[a] for a in A))
            if not ia:
                continue
            rest = [S[b] for b in range(len(S)) if b not in A]
            total = total + ia * reciprocal_derivative(rest, H)
    return total


def taylor_coefficient(S: Sequence[int], I: Values, H: Values) -> DyadicRational:
    """Coefficient of ``prod_{j in S} v_j`` in ``I/H``; ``S`` is a multiset."""
    denom = 1
    for c in _multiplicities(S):
        denom *= math.factorial(c)
    return quotient_derivative(S, I, H) / denom


def _multiplicities(S: Sequence[int]) -> list[int]:
    counts: dict[int, int] = {}
    for j in S:
        counts[j] = counts.get(j, 0) + 1
    return list(counts.values())


def lemma_coefficient(code: LinearCode, i: int, S: Sequence[int]) -> DyadicRational:
    """Taylor coefficient of ``f_i`` for the monomial ``S`` from closed forms."""
    return taylor_coefficient(S, lambda T: lemma_I(code, i, T), lambda T: lemma_H(code, T))


def _candidates(code: LinearCode, i: int, max_order: int) -> list[tuple[int, ...]]:
    """Monomials (0-based, sorted) that can carry a nonzero coefficient in f_i.

    Every term of the quotient expansion is a product of one ``I``-derivative
    and ``H``-derivatives over disjoint slots.  ``H``-derivatives need at least
    two distinct slots with zero column sum, ``I``-derivatives need distinct
    slots with column sum 0 or ``g_i``.  Up to order 3 this leaves: order 1,
    columns equal to ``g_i``; order 2, pairs summing to ``g_i`` or to 0;
    order 3, distinct triples summing to ``g_i`` or 0, and a column equal to
    ``g_i`` times an equal-column pair.
    """
    keys = code.column_keys
    gi = keys[i - 1]
    cols = _column_index(code)
    same = cols[gi]
    out: set[tuple[int, ...]] = {(j,) for j in same}
    if max_order >= 2:
        pairs = _pair_table(code)
        out.update(pairs.get(gi, ()))
        out.update(pairs.get(0, ()))
    if max_order >= 3:
        for s, plist in pairs.items():
            for target in (s ^ gi, s):
                for c in cols.get(target, ()):
                    for a, b in plist:
                        if c != a and c != b:
                            out.add(tuple(sorted((a, b, c))))
        for a in same:
            for b, c in pairs.get(0, ()):
                out.add(tuple(sorted((a, b, c))))
    return sorted(out, key=lambda t: (len(t), t))


def general_taylor(code: LinearCode, max_order: int = 3) -> TruncatedMap:
    """Exact Taylor polynomial of f at p up to ``max_order`` (at most 3).

    No independence hypothesis is needed.  Coefficients come from
    :func:`lemma_H` / :func:`lemma_I` through the quotient rule, so the cost
    depends on column combinatorics only, never on ``2^k``.
    """
    if not 1 <= max_order <= GENERAL_MAX_ORDER:
        raise OrderOutOfRange(f"general order must be in [1, {GENERAL_MAX_ORDER}], got {max_order}")
    terms = []
    for i in range(1, code.n + 1):
        for cand in _candidates(code, i, max_order):
            S = tuple(j + 1 for j in cand)
            c = lemma_coefficient(code, i, S)
            if c:
                terms.append(Term.make(i, float(c), S))
    return TruncatedMap(code.n, max_order, terms, "general")


def truncated_map(code: LinearCode, order: int, mode: str = "auto") -> TruncatedMap:
    """Clean map when the hypothesis holds (``mode="auto"``), else general."""
    if mode == "clean":
        return clean_truncated_map(code, order)
    if mode == "general":
        return general_taylor(code, order)
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    if order >= 2 and smallest_dependent_columns(code, order) is None:
        return clean_truncated_map(code, order)
    return general_taylor(code, order)
