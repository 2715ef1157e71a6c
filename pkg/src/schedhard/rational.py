"""Exact rational parsing and formatting.

Rationals travel through JSON and the command line as ``"num/den"``
strings (decimals are accepted on input and converted exactly).
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from .errors import ParameterError


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, ``"p/q"`` and decimal strings to a Fraction.

    Floats are refused: a float has already lost the exact value.
    """
    if isinstance(value, bool):
        raise ParameterError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"not a rational: {value!r}") from exc
    raise ParameterError(f"not a rational (floats are not accepted): {value!r}")


def format_fraction(value) -> str:
    q = as_fraction(value)
    return f"{q.numerator}/{q.denominator}"


def ceil_fraction(value) -> int:
    q = as_fraction(value)
    return -((-q.numerator) // q.denominator)
