#!/usr/bin/env python3
"""
Gaussian Rational Module

Exact complex numbers with rational real and imaginary parts. Every exact
stage of ptscan (operator algebra, parser, characteristic polynomial) works
over this field, so no rounding ever happens before root finding.
"""

import re
from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union['GaussianRational', Fraction, int]

_RATIONAL_RE = re.compile(r'^\s*[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?(\s*/\s*\d+)?\s*$')


def parse_rational(text: str) -> Fraction:
    """
    Parse an exact rational from user text.

    Accepts integers, fractions and decimal literals ("3", "-3/4", "0.5",
    "1e-3"). Decimals are converted exactly, never through a binary float.

    Args:
        text: Text to parse

    Returns:
        Exact Fraction

    Raises:
        ValueError: If the text is not a finite rational literal
    """
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational number: {text!r}")
    try:
        return Fraction(text.replace(' ', ''))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational number: {text!r}") from e


def format_rational(value: Fraction) -> str:
    """Format a Fraction decimal-free: '3', '-3/4'."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class GaussianRational:
    """
    Immutable complex number whose parts are exact Fractions.
    """

    __slots__ = ('_real', '_imag')

    def __init__(self, real: Union[Fraction, int, str] = 0, imag: Union[Fraction, int, str] = 0):
        object.__setattr__(self, '_real', Fraction(real))
        object.__setattr__(self, '_imag', Fraction(imag))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __reduce__(self):
        return (GaussianRational, (self._real, self._imag))

    @classmethod
    def coerce(cls, value: Scalar) -> 'GaussianRational':
        """Convert an int, Fraction or GaussianRational to a GaussianRational."""
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Rational)):
            return cls(Fraction(value), 0)
        raise TypeError(f"cannot convert {type(value).__name__} to GaussianRational")

    @property
    def real(self) -> Fraction:
        return self._real

    @property
    def imag(self) -> Fraction:
        return self._imag

    @property
    def is_real(self) -> bool:
        return self._imag == 0

    def conjugate(self) -> 'GaussianRational':
        return GaussianRational(self._real, -self._imag)

    def __bool__(self) -> bool:
        return self._real != 0 or self._imag != 0

    def __complex__(self) -> complex:
        return complex(float(self._real), float(self._imag))

    def __hash__(self) -> int:
        if self._imag == 0:
            return hash(self._real)
        return hash((self._real, self._imag))

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussianRational):
            return self._real == other._real and self._imag == other._imag
        if isinstance(other, (int, Rational)):
            return self._imag == 0 and self._real == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __neg__(self) -> 'GaussianRational':
        return GaussianRational(-self._real, -self._imag)

    def __pos__(self) -> 'GaussianRational':
        return self

    def __add__(self, other: Scalar) -> 'GaussianRational':
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self._real + other._real, self._imag + other._imag)

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> 'GaussianRational':
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self._real - other._real, self._imag - other._imag)

    def __rsub__(self, other: Scalar) -> 'GaussianRational':
        return (-self) + other

    def __mul__(self, other: Scalar) -> 'GaussianRational':
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, c, d = self._real, self._imag, other._real, other._imag
        if b == 0 and d == 0:
            return GaussianRational(a * c, 0)
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> 'GaussianRational':
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        c, d = other._real, other._imag
        norm = c * c + d * d
        if norm == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        a, b = self._real, self._imag
        return GaussianRational((a * c + b * d) / norm, (b * c - a * d) / norm)

    def __rtruediv__(self, other: Scalar) -> 'GaussianRational':
        return GaussianRational.coerce(other) / self

    def __pow__(self, exponent: int) -> 'GaussianRational':
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return ONE / (self ** -exponent)
        result = ONE
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __repr__(self) -> str:
        return f"GaussianRational({format_rational(self._real)!r}, {format_rational(self._imag)!r})"

    def __str__(self) -> str:
        re_part, im_part = self._real, self._imag
        if im_part == 0:
            return format_rational(re_part)
        if abs(im_part) == 1:
            im_text = 'i' if im_part > 0 else '-i'
        else:
            im_text = f"{format_rational(im_part)}i"
        if re_part == 0:
            return im_text
        sign = '' if im_text.startswith('-') else '+'
        return f"{format_rational(re_part)}{sign}{im_text}"


ZERO = GaussianRational(0, 0)
ONE = GaussianRational(1, 0)
I = GaussianRational(0, 1)
