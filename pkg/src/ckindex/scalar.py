"""Exact Gaussian-rational scalars.

Coefficients of algebra elements live in Q(i).  Plain ``int`` and
``Fraction`` values are accepted anywhere a scalar is expected and compare
equal to the corresponding real scalar.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Union

ScalarLike = Union["GaussianRational", int, Fraction]


class GaussianRational:
    """An element ``re + im*i`` of Q(i) with ``Fraction`` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: int | Fraction = 0, im: int | Fraction = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value: ScalarLike) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction, Rational)):
            return cls(Fraction(value))
        if isinstance(value, str):
            return parse_scalar(value)
        raise TypeError(f"cannot use {value!r} as an exact scalar")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return GaussianRational(self.re * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by zero scalar")
        if not o.im:
            return GaussianRational(self.re / o.re, self.im / o.re)
        den = o.re * o.re + o.im * o.im
        num = self * o.conjugate()
        return GaussianRational(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** -k)
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # comparisons ----------------------------------------------------------
    def __eq__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self) -> bool:
        return not self.im

    def real_value(self) -> Fraction:
        """The real part, refusing when the imaginary part is nonzero."""
        if self.im:
            raise ValueError(f"{self} is not real")
        return self.re

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        return float(self.real_value())

    # text -------------------------------------------------------------------
    def __str__(self):
        if not self.im:
            return _frac(self.re)
        if not self.re:
            return _frac(self.im) + "i"
        sign = "+" if self.im > 0 else "-"
        return f"{_frac(self.re)}{sign}{_frac(abs(self.im))}i"

    def __repr__(self):
        return f"GaussianRational({self})"


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _maybe(value) -> GaussianRational | None:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    return None


_RAT = r"[+-]?\d+(?:/\d+)?"
_SCALAR_RE = re.compile(
    rf"^\s*(?:(?P<re>{_RAT})(?:(?P<im>[+-]\d+(?:/\d+)?|[+-])i)?|(?P<pim>{_RAT}|[+-]?)i)\s*$"
)


def parse_scalar(text: str) -> GaussianRational:
    """Parse ``"3/4"``, ``"-2"``, ``"1/2-3/4i"``, ``"i"`` or ``"-5/2i"``."""
    m = _SCALAR_RE.match(text)
    if not m:
        raise ValueError(f"not an exact scalar: {text!r}")
    if m.group("pim") is not None:
        return GaussianRational(0, _unit(m.group("pim")))
    re_part = Fraction(m.group("re"))
    im_text = m.group("im")
    return GaussianRational(re_part, _unit(im_text) if im_text is not None else 0)


def _unit(text: str) -> Fraction:
    if text in ("", "+"):
        return Fraction(1)
    if text == "-":
        return Fraction(-1)
    return Fraction(text)


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)
