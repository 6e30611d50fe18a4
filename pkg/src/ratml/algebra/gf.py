"""Arithmetic in GF(2^m), 2 <= m <= 16, via log/antilog tables."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DivisionByZero

# Default primitive polynomials (bit i = coefficient of x^i).
PRIMITIVE_POLYNOMIALS = {
    2: 0b111,                 # x^2 + x + 1
    3: 0b1011,                # x^3 + x + 1
    4: 0b10011,               # x^4 + x + 1
    5: 0b100101,              # x^5 + x^2 + 1
    6: 0b1000011,             # x^6 + x + 1
    7: 0b10001001,            # x^7 + x^3 + 1
    8: 0b100011101,           # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,          # x^9 + x^4 + 1
    10: 0b10000001001,        # x^10 + x^3 + 1
    11: 0b100000000101,       # x^11 + x^2 + 1
    12: 0b1000001010011,      # x^12 + x^6 + x^4 + x + 1
    13: 0b10000000011011,     # x^13 + x^4 + x^3 + x + 1
    14: 0b100010001000011,    # x^14 + x^10 + x^6 + x + 1
    15: 0b1000000000000011,   # x^15 + x + 1
    16: 0b10001000000001011,  # x^16 + x^12 + x^3 + x + 1
}


class GF2m:
    """The field GF(2^m) defined by a primitive polynomial.

    Elements are plain ints in ``[0, 2^m)``; ``alpha`` is the residue of x.
    """

    def __init__(self, m: int, poly: int | None = None):
        if not 2 <= m <= 16:
            raise ValueError("m must be in [2, 16]")
        self.m = m
        self.poly = PRIMITIVE_POLYNOMIALS[m] if poly is None else poly
        if self.poly.bit_length() != m + 1:
            raise ValueError("polynomial degree must equal m")
        self.order = (1 << m) - 1
        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.full(1 << m, -1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            if log[x] != -1:
                raise ValueError("polynomial is not primitive")
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> m:
                x ^= self.poly
        exp[self.order:] = exp[:self.order]
        self.exp = exp
        self.log = log
        self._exp = exp.tolist()
        self._log = log.tolist()

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def alpha(self) -> int:
        return 2

    def __eq__(self, other):
        return isinstance(other, GF2m) and (self.m, self.poly) == (other.m, other.poly)

    def __hash__(self):
        return hash((self.m, self.poly))

    def __repr__(self):
        return f"GF2m(m={self.m}, poly={self.poly:#x})"

    def element(self, value: int) -> "GFElement":
        return GFElement(self, value)

    # int-level operations, used in hot loops
    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("0 has no inverse")
        return self._exp[(self.order - self._log[a]) % self.order]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise DivisionByZero("0 has no inverse")
            return 0
        return self._exp[(self._log[a] * e) % self.order]

    def alpha_pow(self, e: int) -> int:
        return self._exp[e % self.order]

    def poly_eval(self, coeffs, x: int) -> int:
        """Evaluate ``sum(coeffs[i] * x^i)`` by Horner's rule."""
        acc = 0
        for c in reversed(coeffs):
            acc = self.mul(acc, x) ^ c
        return acc

    # vectorised multiply on int arrays
    def mul_array(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        nz = (a != 0) & (b != 0)
        la = self.log[a]
        lb = self.log[b]
        return np.where(nz, self.exp[np.where(nz, la + lb, 0)], 0)

    def inv_array(self, a):
        """Elementwise inverse; zeros map to zero."""
        a = np.asarray(a)
        nz = a != 0
        return np.where(nz, self.exp[(self.order - self.log[a]) % self.order], 0)

    def minimal_polynomial(self, beta: int) -> int:
        """Minimal polynomial of ``beta`` over F2 as a bitmask (bit i = x^i)."""
        return _minimal_polynomial(self, beta)


@lru_cache(maxsize=None)
def _minimal_polynomial(field: GF2m, beta: int) -> int:
    conj = []
    c = beta
    while c not in conj:
        conj.append(c)
        c = field.mul(c, c)
    # product of (x - c) over the conjugates, coefficients in GF(2^m)
    coeffs = [1]
    for root in conj:
        nxt = [0] * (len(coeffs) + 1)
        for i, a in enumerate(coeffs):
            nxt[i + 1] ^= a
            nxt[i] ^= field.mul(a, root)
        coeffs = nxt
    mask = 0
    for i, a in enumerate(coeffs):
        if a not in (0, 1):
            raise ArithmeticError("minimal polynomial has coefficients outside F2")
        if a:
            mask |= 1 << i
    return mask


@lru_cache(maxsize=None)
def default_field(m: int) -> GF2m:
    return GF2m(m)


@dataclass(frozen=True)
class GFElement:
    """A field element bound to its field, with operator overloading."""

    field: GF2m
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.size:
            raise ValueError("value outside the field")

    def _check(self, other: "GFElement") -> None:
        if self.field != other.field:
            raise ValueError("elements belong to different fields")

    def __add__(self, other: "GFElement") -> "GFElement":
        self._check(other)
        return GFElement(self.field, self.value ^ other.value)

    __sub__ = __add__

    def __mul__(self, other: "GFElement") -> "GFElement":
        self._check(other)
        return GFElement(self.field, self.field.mul(self.value, other.value))

    def __truediv__(self, other: "GFElement") -> "GFElement":
        self._check(other)
        return GFElement(self.field, self.field.div(self.value, other.value))

    def __pow__(self, e: int) -> "GFElement":
        return GFElement(self.field, self.field.pow(self.value, e))

    def inverse(self) -> "GFElement":
        return GFElement(self.field, self.field.inv(self.value))

    def __int__(self) -> int:
        return self.value


def gf_mul(a: GFElement, b: GFElement) -> GFElement:
    return a * b


def gf_inv(a: GFElement) -> GFElement:
    return a.inverse()


def gf_pow(a: GFElement, e: int) -> GFElement:
    return a ** e


def minimal_polynomial(beta: GFElement) -> int:
    """Monic minimal polynomial of ``beta`` over F2 (bitmask, bit i = x^i)."""
    return beta.field.minimal_polynomial(beta.value)


def poly_mul(a: int, b: int) -> int:
    """Product of two F2[x] polynomials given as bitmasks."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, m: int) -> int:
    """Remainder of ``a`` modulo ``m`` in F2[x]."""
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a
