"""Exact rational scalars and the floating helpers used by the oracles.

Every value in the exact pipeline is a :class:`fractions.Fraction`, which is
already normalized (coprime, positive denominator).  ``Decimal`` values only
appear in oracle comparisons and rendering.
"""

from __future__ import annotations

import decimal
import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import integrate

ExactScalar = Fraction
Decimal = decimal.Decimal

#: working precision for Decimal conversions (significant digits)
DECIMAL_PRECISION = 40
#: default ceiling for :func:`factorial`
FACTORIAL_BOUND = 64

_CONTEXT = decimal.Context(prec=DECIMAL_PRECISION, rounding=decimal.ROUND_HALF_EVEN)
_LITERAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")

Number = Union[int, Fraction, Decimal, float]


class FactorialBoundError(ValueError):
    pass


def exact(value: int | str | Rational) -> Fraction:
    """Coerce an int, Fraction or rational literal (``p/q`` or ``p``) to a Fraction."""
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def parse_rational(text: str) -> Fraction:
    m = _LITERAL.match(text)
    if m is None:
        raise ValueError(f"invalid rational literal {text!r} (expected p/q or p)")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(x: Fraction) -> str:
    """``p/q`` form, or plain ``p`` for integers."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def arith(x: Fraction, y: Fraction, op: str) -> Fraction:
    x, y = Fraction(x), Fraction(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        if y == 0:
            raise ZeroDivisionError("division by zero")
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def pow_int(base: int, e: int) -> Fraction:
    """Exact ``base**e``; negative exponents give ``1/base**|e|``."""
    if base < 1:
        raise ValueError(f"base must be >= 1, got {base}")
    if e >= 0:
        return Fraction(base**e)
    return Fraction(1, base**-e)


def factorial(n: int, bound: int = FACTORIAL_BOUND) -> int:
    if n < 0:
        raise ValueError(f"factorial of negative number {n}")
    if n > bound:
        raise FactorialBoundError(f"factorial argument {n} exceeds bound {bound}")
    return math.factorial(n)


def to_decimal(x: Number) -> Decimal:
    if isinstance(x, Fraction):
        return _CONTEXT.divide(Decimal(x.numerator), Decimal(x.denominator))
    if isinstance(x, float):
        return Decimal(repr(float(x)))
    return _CONTEXT.plus(Decimal(x))


def render_decimal(x: Fraction, digits: int) -> str:
    """Fixed-point rendering with ``digits`` places after the point, round-half-even.

    The rounding is done on the exact rational, so no binary or decimal
    intermediate can shift a tie.
    """
    if not 1 <= digits <= 50:
        raise ValueError(f"digits must be in 1..50, got {digits}")
    x = Fraction(x)
    scaled = round(x * 10**digits)  # Fraction.__round__ is half-even
    sign = "-" if scaled < 0 else ""
    body = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{body[:-digits]}.{body[-digits:]}"


def trapezoid(samples: Sequence[Number], h: Number) -> Number:
    """Composite trapezoid rule over uniformly spaced samples.

    Works for any numeric type that supports ``+`` and ``*``; passing
    Fractions yields the exact trapezoid sum.
    """
    if len(samples) < 2:
        raise ValueError("trapezoid needs at least two samples")
    if h <= 0:
        raise ValueError("spacing must be positive")
    total = sum(samples[1:-1], start=type(samples[0])(0))
    if isinstance(samples[0], Fraction) or isinstance(h, Fraction):
        half = Fraction(1, 2)
    elif isinstance(samples[0], Decimal):
        half = Decimal("0.5")
    else:
        half = 0.5
    return h * (total + half * (samples[0] + samples[-1]))


def cumulative_quadrature(values: np.ndarray, h: float, rule: str = "simpson") -> np.ndarray:
    """Running integral from the first node, one value per node (starting at 0)."""
    if rule == "simpson":
        return integrate.cumulative_simpson(values, dx=h, initial=0.0)
    if rule == "trapezoid":
        return integrate.cumulative_trapezoid(values, dx=h, initial=0.0)
    raise ValueError(f"unknown quadrature rule {rule!r}")


def definite_quadrature(values: np.ndarray, h: float, rule: str = "simpson") -> float:
    if rule == "simpson":
        return float(integrate.simpson(values, dx=h))
    if rule == "trapezoid":
        return float(np.trapezoid(values, dx=h))
    raise ValueError(f"unknown quadrature rule {rule!r}")


def max_abs(values: Iterable[Fraction]) -> Fraction:
    return max((abs(v) for v in values), default=Fraction(0))
