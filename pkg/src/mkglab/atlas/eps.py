"""Rationals extended by a single positive infinitesimal ``eps``."""
from __future__ import annotations

import re
from fractions import Fraction
from functools import total_ordering
from typing import Union

__all__ = ["EpsRational", "EPS", "as_eps", "fmt_fraction"]

Number = Union[int, Fraction, "EpsRational"]

_EPS_SUFFIX = re.compile(r"(?P<sign>[+-]?)(?P<count>\d*)\s*(?:ε|eps)$")


@total_ordering
class EpsRational:
    """``q + m*eps`` with exact rational ``q`` and integer ``m``.

    Ordering is lexicographic in ``(q, m)``: ``eps`` is smaller than every
    positive rational and larger than zero.
    """

    __slots__ = ("q", "m")

    def __init__(self, q: int | Fraction | str = 0, m: int = 0):
        self.q = Fraction(q)
        self.m = int(m)

    @classmethod
    def parse(cls, text: str) -> EpsRational:
        """Parse ``p/q``, decimals, and an optional ``+m eps`` tail (``ε`` or ``eps``)."""
        s = text.strip().replace(" ", "")
        if not s:
            raise ValueError("empty exponent literal")
        m = 0
        hit = _EPS_SUFFIX.search(s)
        if hit:
            count = int(hit["count"]) if hit["count"] else 1
            m = -count if hit["sign"] == "-" else count
            s = s[: hit.start()]
            if s and not hit["sign"]:
                raise ValueError(f"cannot parse exponent literal {text!r}")
        try:
            q = Fraction(s) if s else Fraction(0)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse exponent literal {text!r}") from None
        return cls(q, m)

    def __add__(self, other: Number) -> EpsRational:
        o = as_eps(other)
        return EpsRational(self.q + o.q, self.m + o.m)

    __radd__ = __add__

    def __neg__(self) -> EpsRational:
        return EpsRational(-self.q, -self.m)

    def __sub__(self, other: Number) -> EpsRational:
        o = as_eps(other)
        return EpsRational(self.q - o.q, self.m - o.m)

    def __rsub__(self, other: Number) -> EpsRational:
        return as_eps(other) - self

    def __mul__(self, c: int | Fraction) -> EpsRational:
        if isinstance(c, EpsRational):
            raise TypeError("product of two eps-rationals is not defined")
        c = Fraction(c)
        mc = self.m * c
        if mc.denominator != 1:
            raise ValueError("eps coefficient must stay integral")
        return EpsRational(self.q * c, int(mc))

    __rmul__ = __mul__

    def _key(self) -> tuple[Fraction, int]:
        return (self.q, self.m)

    def __eq__(self, other) -> bool:
        try:
            return self._key() == as_eps(other)._key()
        except TypeError:
            return NotImplemented

    def __lt__(self, other) -> bool:
        return self._key() < as_eps(other)._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def is_zero(self) -> bool:
        return self.q == 0 and self.m == 0

    def sign(self) -> int:
        return (self > 0) - (self < 0)

    def __str__(self) -> str:
        out = str(self.q)
        if self.m:
            out += f"{self.m:+d}ε"
        return out

    def __repr__(self) -> str:
        return f"EpsRational({self})"


EPS = EpsRational(0, 1)


def as_eps(x: Number | str) -> EpsRational:
    if isinstance(x, EpsRational):
        return x
    if isinstance(x, str):
        return EpsRational.parse(x)
    if isinstance(x, (int, Fraction)):
        return EpsRational(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact exponent")


def fmt_fraction(q: Fraction) -> str:
    """``p/q`` with an explicit denominator."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
