"""Decoders: exact ML through the rational map, truncated-map approximate ML,
and Berlekamp-Massey bounded-distance decoding for BCH codes.

Each decoder has a single-word function returning a :class:`DecodeOutcome`
and a picklable class with ``decode_batch(Y) -> X_hat`` on ``(B, n)`` uint8
arrays for the simulation harness.  Soft values at exactly 1/2 decode to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .algebra import BitVector
from .code import BchCode, LinearCode, codeword_table
from .errors import LengthMismatch, NotBchCode
from .rational_map import check_epsilon
from .taylor import TruncatedMap

# relative gap below which an ML decision is re-derived in exact arithmetic
TIE_TOLERANCE = 1e-9
# cap on the number of float entries in a per-sub-batch work matrix
WORK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class DecodeOutcome:
    decoded: BitVector
    soft: np.ndarray
    method: str
    failed: bool = False


def _as_rows(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.uint8)
    return Y[None, :] if Y.ndim == 1 else Y


def _sub_batches(B: int, width: int):
    step = max(1, WORK_ELEMENTS // max(width, 1))
    for s in range(0, B, step):
        yield slice(s, min(B, s + step))


# ---------------------------------------------------------------------------
# exact ML
# ---------------------------------------------------------------------------

def ml_soft_batch(code: LinearCode, Y, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """``(f(u0), decisions)`` for each row of ``Y``.

    ``F_x(u0) = (1-eps)^n r^d(x, y)`` with ``r = eps / (1 - eps)``, so the
    codeword weights are taken as ``r^(d - d_min)``: a log-domain shift that
    keeps the largest weight at 1 for any length.  Decisions whose two
    marginals agree to within :data:`TIE_TOLERANCE` are re-derived exactly.
    """
    check_epsilon(epsilon)
    Y = _as_rows(Y)
    if Y.shape[1] != code.n:
        raise LengthMismatch(f"word length {Y.shape[1]} != n = {code.n}")
    X = codeword_table(code)
    Xf = X.astype(np.float32)
    wx = X.sum(axis=1, dtype=np.int64)
    r = epsilon / (1.0 - epsilon)
    soft = np.empty(Y.shape)
    dec = np.empty(Y.shape, dtype=np.uint8)
    for sl in _sub_batches(Y.shape[0], X.shape[0]):
        Yb = Y[sl]
        wy = Yb.sum(axis=1, dtype=np.int64)
        D = wy[:, None] + wx[None, :] - 2 * (Yb.astype(np.float32) @ Xf.T).astype(np.int64)
        W = r ** (D - D.min(axis=1, keepdims=True)).astype(np.float64)
        den = W.sum(axis=1)
        num1 = W @ X.astype(np.float64)
        gap = 2.0 * num1 - den[:, None]
        soft[sl] = num1 / den[:, None]
        dec[sl] = gap >= 0.0
        for b, i in zip(*np.nonzero(np.abs(gap) <= TIE_TOLERANCE * den[:, None])):
            dec[sl.start + b, i] = _exact_decision(X, D[b], i, epsilon)
    return soft, dec


def _exact_decision(X: np.ndarray, d: np.ndarray, i: int, epsilon: float) -> int:
    """Compare the two marginals of bit ``i`` in rational arithmetic."""
    r = Fraction(epsilon) / (1 - Fraction(epsilon))
    ones = np.bincount(d[X[:, i] == 1], minlength=X.shape[1] + 1)
    zeros = np.bincount(d[X[:, i] == 0], minlength=X.shape[1] + 1)
    diff = sum((int(a) - int(b)) * r ** dist for dist, (a, b) in enumerate(zip(ones, zeros)))
    return int(diff >= 0)


def ml_decode(code: LinearCode, y: BitVector, epsilon: float) -> DecodeOutcome:
    """Bitwise ML decision ``x_i = 1`` iff ``f_i(u0) >= 1/2``."""
    soft, dec = ml_soft_batch(code, y.to_array(), epsilon)
    return DecodeOutcome(BitVector.from_bits(dec[0]), soft[0], "ml")


# ---------------------------------------------------------------------------
# approximate ML
# ---------------------------------------------------------------------------

class ParityForm:
    """A truncated map specialised to points ``u0``.

    At ``u0`` every centred coordinate is ``v_j = c s_j`` with
    ``c = 1/2 - eps`` and ``s_j = 2 y_j - 1``, so a term of order ``m`` on
    coordinate ``i`` evaluates to ``coef c^m (-1)^|O| (-1)^(y.O)`` where ``O``
    is the set of indices of odd multiplicity.  Writing ``y.O = y_i + y.A``
    with ``A = O xor {i}`` lets coordinates share the parity columns ``A``
    (for clean maps ``A`` is a dual codeword).  Then
    ``f~_i - 1/2 = (-1)^y_i sum_m c^m Z_m`` with exact sums ``Z_m``.
    """

    def __init__(self, tm: TruncatedMap):
        n = tm.n
        per_order: dict[int, dict[int, dict[int, float]]] = {}
        for t in tm.terms:
            odd = 0
            for j in t.index:
                odd ^= 1 << (j - 1)
            aug = odd ^ (1 << (t.coord - 1))
            sign = -1.0 if bin(odd).count("1") % 2 else 1.0
            row = per_order.setdefault(t.order, {}).setdefault(aug, {})
            row[t.coord - 1] = row.get(t.coord - 1, 0.0) + sign * t.coef
        self.n = n
        self.order = tm.order
        # one (order, parity columns, weights) block per monomial order present
        self.blocks = []
        for m in sorted(per_order):
            masks = [a for a, row in per_order[m].items() if any(row.values())]
            if not masks:
                continue
            aug = np.zeros((n, len(masks)), dtype=np.float32)
            W = np.zeros((len(masks), n))
            for a, mask in enumerate(masks):
                for j in range(n):
                    if mask >> j & 1:
                        aug[j, a] = 1.0
                for i, w in per_order[m][mask].items():
                    W[a, i] = w
            # float32 sums are exact for integer weights with small column totals
            exact32 = np.all(W == np.round(W)) and np.abs(W).sum(axis=0).max() < 2 ** 24
            self.blocks.append((m, aug, W.astype(np.float32 if exact32 else np.float64)))

    @property
    def width(self) -> int:
        return max((aug.shape[1] for _, aug, _ in self.blocks), default=1)

    def evaluate(self, Y: np.ndarray, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
        """``(soft, decisions)``; a value is a tie only when every ``Z_m`` is 0."""
        Y = _as_rows(Y)
        c = 0.5 - epsilon
        soft = np.empty(Y.shape)
        dec = np.empty(Y.shape, dtype=np.uint8)
        for sl in _sub_batches(Y.shape[0], self.width):
            Yb = Y[sl]
            Yf = Yb.astype(np.float32)
            val = np.zeros(Yb.shape)
            for m, aug, W in self.blocks:
                # parity signs 1 - 2 (P mod 2) = 1 - 2 P + 4 floor(P / 2), in place;
                # the counts are small integers, so every step is exact
                P = Yf @ aug
                half = P * np.float32(0.5)
                np.floor(half, out=half)
                half *= np.float32(4.0)
                P *= np.float32(-2.0)
                P += half
                P += np.float32(1.0)
                val += (P.astype(W.dtype, copy=False) @ W).astype(np.float64) * c ** m
            val = np.where(Yb == 1, -val, val)
            soft[sl] = 0.5 + val
            dec[sl] = val >= 0.0
        return soft, dec


def parity_form(tm: TruncatedMap) -> ParityForm:
    form = tm.__dict__.get("_parity_form")
    if form is None:
        form = ParityForm(tm)
        tm.__dict__["_parity_form"] = form
    return form


def approx_ml_decode(tm: TruncatedMap, y: BitVector, epsilon: float) -> DecodeOutcome:
    """Threshold ``f~(u0)`` at 1/2 (no clamping)."""
    check_epsilon(epsilon)
    if y.length != tm.n:
        raise LengthMismatch(f"word length {y.length} != n = {tm.n}")
    soft, dec = parity_form(tm).evaluate(y.to_array(), epsilon)
    return DecodeOutcome(BitVector.from_bits(dec[0]), soft[0], f"approx:{tm.order}")


# ---------------------------------------------------------------------------
# Berlekamp-Massey
# ---------------------------------------------------------------------------

def _require_bch(code) -> BchCode:
    if not isinstance(code, BchCode):
        raise NotBchCode(f"{getattr(code, 'name', code)!r} does not carry BCH structure")
    return code


def _berlekamp_massey(gf, S: list[int]) -> list[int]:
    """Error-locator polynomial (low-order first) for syndromes ``S_1..S_2t``."""
    C = [1]
    Bp = [1]
    L, m, b = 0, 1, 1
    for r in range(len(S)):
        d = S[r]
        for i in range(1, L + 1):
            if i < len(C):
                d ^= gf.mul(C[i], S[r - i])
        if d == 0:
            m += 1
            continue
        coef = gf.div(d, b)
        shifted = [0] * m + [gf.mul(coef, x) for x in Bp]
        new = [a ^ s for a, s in zip(C + [0] * (len(shifted) - len(C)),
                                     shifted + [0] * (len(C) - len(shifted)))]
        if 2 * L <= r:
            Bp, L, b, m = C, r + 1 - L, d, 1
        else:
            m += 1
        C = new
    while len(C) > 1 and C[-1] == 0:
        C.pop()
    return C


def bm_decode(code: BchCode, y: BitVector) -> DecodeOutcome:
    """Syndromes, Berlekamp-Massey, Chien search, flip.

    When the locator degree exceeds ``t`` or differs from its number of roots,
    ``y`` is returned unchanged with ``failed=True``.
    """
    code = _require_bch(code)
    if y.length != code.n:
        raise LengthMismatch(f"word length {y.length} != n = {code.n}")
    gf = code.field
    n, t = code.n, code.t
    support = y.support()
    S = []
    for j in range(1, 2 * t + 1):
        s = 0
        for pos in support:
            s ^= gf.alpha_pow(j * pos)
        S.append(s)
    soft = y.to_array().astype(np.float64)
    if not any(S):
        return DecodeOutcome(y, soft, "bm")
    C = _berlekamp_massey(gf, S)
    L = len(C) - 1
    roots = [pos for pos in range(n) if gf.poly_eval(C, gf.alpha_pow(-pos)) == 0]
    if L > t or len(roots) != L:
        return DecodeOutcome(y, soft, "bm", failed=True)
    x = y
    for pos in roots:
        x = x.flip(pos)
    return DecodeOutcome(x, x.to_array().astype(np.float64), "bm")


def bm_decode_batch(code: BchCode, Y) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`bm_decode`; returns ``(decoded, failed)``."""
    code = _require_bch(code)
    Y = _as_rows(Y)
    gf = code.field
    n, t = code.n, code.t
    B = Y.shape[0]
    two_t = 2 * t
    pos = np.arange(n)
    # powers[j - 1, p] = alpha^(j p)
    powers = gf.exp[(np.arange(1, two_t + 1)[:, None] * pos[None, :]) % gf.order]
    S = np.zeros((B, two_t), dtype=np.int64)
    for j in range(two_t):
        S[:, j] = np.bitwise_xor.reduce(np.where(Y == 1, powers[j][None, :], 0), axis=1)
    width = two_t + 2
    C = np.zeros((B, width), dtype=np.int64)
    C[:, 0] = 1
    Bp = C.copy()
    L = np.zeros(B, dtype=np.int64)
    m = np.ones(B, dtype=np.int64)
    b = np.ones(B, dtype=np.int64)
    rows = np.arange(B)[:, None]
    cols = np.arange(width)[None, :]
    for r in range(two_t):
        # discrepancy d = sum_{i=0..r} C_i S_{r-i}; C_i = 0 beyond deg C
        idx = r - np.arange(r + 1)
        d = np.bitwise_xor.reduce(gf.mul_array(C[:, :r + 1], S[:, idx]), axis=1)
        nz = d != 0
        coef = gf.mul_array(d, gf.inv_array(np.where(nz, b, 1)))
        src = cols - m[:, None]
        shifted = np.where(src >= 0, Bp[rows, np.clip(src, 0, width - 1)], 0)
        new = C ^ gf.mul_array(coef[:, None], shifted)
        grow = nz & (2 * L <= r)
        Bp = np.where(grow[:, None], C, Bp)
        b = np.where(grow, d, b)
        L = np.where(grow, r + 1 - L, L)
        m = np.where(grow, 1, m + 1)
        C = np.where(nz[:, None], new, C)
    # Chien search: Lambda(alpha^-p) for every position p
    inv_pos = gf.exp[(-pos) % gf.order]
    acc = np.zeros((B, n), dtype=np.int64)
    for i in range(width - 1, -1, -1):
        acc = gf.mul_array(acc, inv_pos[None, :]) ^ C[:, i:i + 1]
    is_root = acc == 0
    deg = np.where(C != 0, cols, 0).max(axis=1)
    failed = (deg > t) | (is_root.sum(axis=1) != deg)
    out = Y ^ np.where(failed[:, None], 0, is_root).astype(np.uint8)
    return out, failed


# ---------------------------------------------------------------------------
# helpers and batch decoder objects
# ---------------------------------------------------------------------------

def bit_errors(x: BitVector, xh: BitVector) -> int:
    """Hamming distance between two words of equal length."""
    if x.length != xh.length:
        raise LengthMismatch(f"lengths {x.length} and {xh.length} differ")
    return (x ^ xh).weight()


class HardDecisionDecoder:
    tag = "identity"

    def decode_batch(self, Y: np.ndarray) -> np.ndarray:
        return _as_rows(Y).copy()


class MLDecoder:
    def __init__(self, code: LinearCode, epsilon: float):
        check_epsilon(epsilon)
        self.code = code
        self.epsilon = epsilon
        self.tag = "ml"

    def decode_batch(self, Y: np.ndarray) -> np.ndarray:
        return ml_soft_batch(self.code, Y, self.epsilon)[1]


class ApproxDecoder:
    def __init__(self, tm: TruncatedMap, epsilon: float, tag: str | None = None):
        check_epsilon(epsilon)
        self.tm = tm
        self.epsilon = epsilon
        self.tag = tag or f"approx:{tm.order}"

    @cached_property
    def form(self) -> ParityForm:
        return parity_form(self.tm)

    def decode_batch(self, Y: np.ndarray) -> np.ndarray:
        return self.form.evaluate(Y, self.epsilon)[1]

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("form", None)
        return state


class BMDecoder:
    def __init__(self, code: BchCode):
        self.code = _require_bch(code)
        self.tag = "bm"

    def decode_batch(self, Y: np.ndarray) -> np.ndarray:
        return bm_decode_batch(self.code, Y)[0]
