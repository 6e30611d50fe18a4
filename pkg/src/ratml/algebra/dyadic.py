"""Exact numbers of the form ``numerator * 2**exponent``."""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering

from ..errors import DivisionByZero


@total_ordering
class DyadicRational:
    """An exact dyadic rational in canonical form.

    The numerator is odd, or the value is zero with ``numerator == exponent == 0``.
    Sums, differences and products never round.  Division is allowed when the
    quotient is itself dyadic (the divisor's odd part divides the numerator).
    """

    __slots__ = ("numerator", "exponent")

    def __init__(self, numerator: int = 0, exponent: int = 0):
        numerator = int(numerator)
        exponent = int(exponent)
        if numerator == 0:
            exponent = 0
        else:
            tz = (numerator & -numerator).bit_length() - 1
            numerator >>= tz
            exponent += tz
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicRational is immutable")

    @classmethod
    def coerce(cls, x) -> "DyadicRational":
        if isinstance(x, DyadicRational):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        if isinstance(x, (Fraction, float)):
            f = Fraction(x)
            d = f.denominator
            if d & (d - 1):
                raise ValueError(f"{x} is not dyadic")
            return cls(f.numerator, -(d.bit_length() - 1))
        raise TypeError(f"cannot coerce {type(x).__name__} to DyadicRational")

    @classmethod
    def pow2(cls, e: int, sign: int = 1) -> "DyadicRational":
        return cls(sign, e)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        try:
            o = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        e = min(self.exponent, o.exponent)
        return DyadicRational((self.numerator << (self.exponent - e))
                              + (o.numerator << (o.exponent - e)), e)

    __radd__ = __add__

    def __neg__(self):
        return DyadicRational(-self.numerator, self.exponent)

    def __sub__(self, other):
        try:
            return self + (-DyadicRational.coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        return DyadicRational(self.numerator * o.numerator, self.exponent + o.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        if o.numerator == 0:
            raise DivisionByZero("division by zero")
        q, r = divmod(self.numerator, o.numerator)
        if r:
            raise ValueError(f"{self} / {o} is not dyadic")
        return DyadicRational(q, self.exponent - o.exponent)

    def __rtruediv__(self, other):
        return DyadicRational.coerce(other) / self

    def __pow__(self, e: int):
        if e < 0:
            if abs(self.numerator) != 1:
                raise ValueError("negative power of a non-unit is not dyadic")
            return DyadicRational(self.numerator ** (-e), -self.exponent * -e)
        return DyadicRational(self.numerator ** e, self.exponent * e)

    # -- comparison / conversion -------------------------------------------
    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.numerator << self.exponent)
        return Fraction(self.numerator, 1 << -self.exponent)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __eq__(self, other):
        try:
            o = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.numerator == o.numerator and self.exponent == o.exponent

    def __lt__(self, other):
        return self.to_fraction() < DyadicRational.coerce(other).to_fraction()

    def __hash__(self):
        return hash(self.to_fraction())

    def __bool__(self):
        return self.numerator != 0

    def __repr__(self):
        return f"DyadicRational({self.numerator}, {self.exponent})"

    def __str__(self):
        if self.exponent >= 0:
            return str(self.numerator << self.exponent)
        return f"{self.numerator}/2^{-self.exponent}"
