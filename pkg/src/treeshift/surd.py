"""Exact numbers of the form c * sqrt(q) with c, q rational.

Shift matrices have entries sqrt(w) with w a rational squared weight.  Every
product or sum the oracle forms is again a single surd, because entries
that get added always share the same radicand up to a rational square.
Adding incommensurable surds raises instead of silently rounding.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


class Surd:
    __slots__ = ("c", "q")

    def __init__(self, c=0, q=1):
        if type(c) is not Fraction:
            c = Fraction(c)
        if type(q) is not Fraction:
            q = Fraction(q)
        if q < 0:
            raise ValueError("negative radicand")
        if c == 0 or q == 0:
            c, q = Fraction(0), Fraction(1)
        elif q != 1:
            r = rational_sqrt(q)
            if r is not None:
                c, q = c * r, Fraction(1)
        self.c = c
        self.q = q

    @classmethod
    def sqrt(cls, q) -> "Surd":
        return cls(1, q)

    def __bool__(self) -> bool:
        return self.c != 0

    @property
    def is_rational(self) -> bool:
        return self.q == 1

    def to_fraction(self) -> Fraction:
        if self.q != 1:
            raise ValueError(f"{self} is irrational")
        return self.c

    def square(self) -> Fraction:
        return self.c * self.c * self.q

    def sign(self) -> int:
        return (self.c > 0) - (self.c < 0)

    def __float__(self) -> float:
        return float(self.c) * float(self.q) ** 0.5

    @staticmethod
    def _coerce(x) -> "Surd":
        return x if isinstance(x, Surd) else Surd(x)

    def __add__(self, other) -> "Surd":
        other = self._coerce(other)
        if not other.c:
            return self
        if not self.c:
            return other
        r = rational_sqrt(other.q / self.q)
        if r is None:
            raise ArithmeticError(f"cannot add incommensurable surds {self} and {other}")
        return Surd(self.c + other.c * r, self.q)

    __radd__ = __add__

    def __neg__(self) -> "Surd":
        return Surd(-self.c, self.q)

    def __sub__(self, other) -> "Surd":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Surd":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Surd":
        other = self._coerce(other)
        if not self.c or not other.c:
            return ZERO
        return Surd(self.c * other.c, self.q * other.q)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Surd":
        other = self._coerce(other)
        if not other.c:
            raise ZeroDivisionError("surd division by zero")
        return Surd(self.c / other.c, self.q / other.q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Surd, Fraction, int)):
            return NotImplemented
        other = self._coerce(other)
        if self.q == other.q:
            return self.c == other.c
        return self.sign() == other.sign() and self.square() == other.square()

    def __hash__(self) -> int:
        return hash((self.sign(), self.square()))

    def __repr__(self) -> str:
        if self.q == 1:
            return f"Surd({self.c})"
        return f"Surd({self.c}*sqrt({self.q}))"

    def __str__(self) -> str:
        if self.q == 1:
            return str(self.c)
        return f"{self.c}*sqrt({self.q})"


ZERO = Surd(0)
ONE = Surd(1)
