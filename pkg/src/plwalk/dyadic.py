"""Exact arithmetic on dyadic rationals n / 2**k.

A value is kept in canonical form: the numerator is odd, except for zero
which is stored as (0, 0).  With that normalization the stored exponent is
exactly the base-2 logarithm of the 2-adic norm, so valuation queries are
free.  All arithmetic is closed and exact; floats appear only on explicit
conversion for display.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["Dyadic", "NEG_INF", "ZERO", "ONE"]

#: sentinel returned by :meth:`Dyadic.two_adic_log_norm` for zero, chosen so
#: that 2.0**NEG_INF == 0.0 matches the convention |0|_2 = 0.
NEG_INF = float("-inf")


def _canon(num: int, exp: int) -> tuple[int, int]:
    """Strip factors of 2 from ``num`` so the pair is canonical."""
    if num == 0:
        return 0, 0
    tz = (num & -num).bit_length() - 1
    if tz:
        return num >> tz, exp - tz
    return num, exp


class Dyadic:
    """An element of Z[1/2], value ``num / 2**exp`` with ``num`` odd."""

    __slots__ = ("num", "exp")

    def __init__(self, num: int, exp: int = 0):
        num, exp = _canon(num, exp)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def _raw(cls, num: int, exp: int) -> "Dyadic":
        """Wrap an already-canonical pair without re-normalizing."""
        d = object.__new__(cls)
        object.__setattr__(d, "num", num)
        object.__setattr__(d, "exp", exp)
        return d

    @classmethod
    def from_fraction(cls, q) -> "Dyadic":
        q = Fraction(q)
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, den.bit_length() - 1)

    def as_fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.num, 1 << self.exp)
        return Fraction(self.num << -self.exp)

    def __float__(self) -> float:
        return self.num * 2.0 ** -self.exp

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "Dyadic":
        if isinstance(other, int):
            other = Dyadic(other)
        e = self.exp if self.exp >= other.exp else other.exp
        n = (self.num << (e - self.exp)) + (other.num << (e - other.exp))
        return Dyadic(n, e)

    __radd__ = __add__

    def __sub__(self, other) -> "Dyadic":
        if isinstance(other, int):
            other = Dyadic(other)
        e = self.exp if self.exp >= other.exp else other.exp
        n = (self.num << (e - self.exp)) - (other.num << (e - other.exp))
        return Dyadic(n, e)

    def __rsub__(self, other) -> "Dyadic":
        return Dyadic(other) - self

    def __neg__(self) -> "Dyadic":
        return Dyadic._raw(-self.num, self.exp)

    def mul_pow2(self, m: int) -> "Dyadic":
        """Exact multiplication by 2**m."""
        if self.num == 0:
            return self
        return Dyadic._raw(self.num, self.exp - m)

    # -- order --------------------------------------------------------------

    def _cmp(self, other) -> int:
        if isinstance(other, int):
            other = Dyadic(other)
        e = self.exp if self.exp >= other.exp else other.exp
        a = self.num << (e - self.exp)
        b = other.num << (e - other.exp)
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.num == other.num and self.exp == other.exp
        if isinstance(other, int):
            return self.exp <= 0 and self.num << -self.exp == other
        return NotImplemented

    def __hash__(self):
        return hash(self.as_fraction())

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- queries ------------------------------------------------------------

    def two_adic_log_norm(self):
        """log2 of the 2-adic norm; ``NEG_INF`` for zero (|0|_2 = 0)."""
        if self.num == 0:
            return NEG_INF
        return self.exp

    def is_integer(self) -> bool:
        return self.exp <= 0

    def floor(self) -> int:
        if self.exp <= 0:
            return self.num << -self.exp
        return self.num >> self.exp

    def ceil(self) -> int:
        return -((-self).floor())

    def sign(self) -> int:
        return (self.num > 0) - (self.num < 0)

    def frac(self) -> "Dyadic":
        """Fractional part, in [0, 1)."""
        return self - self.floor()

    # -- text ---------------------------------------------------------------

    def __str__(self) -> str:
        if self.exp <= 0:
            return str(self.num << -self.exp)
        return f"{self.num}/2^{self.exp}"

    def __repr__(self) -> str:
        return f"Dyadic({self})"

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Inverse of :meth:`__str__`; also accepts plain 'p/q' fractions."""
        text = text.strip()
        if "/2^" in text:
            p, k = text.split("/2^")
            return cls(int(p), int(k))
        if "/" in text:
            return cls.from_fraction(Fraction(text))
        return cls(int(text))


ZERO = Dyadic(0)
ONE = Dyadic(1)
