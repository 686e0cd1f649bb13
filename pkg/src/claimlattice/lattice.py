"""The 10001-point match-strength lattice.

Scores live in ``0..10000``; one unit is a basis point of the unit interval.
Meet is ``min`` and join is ``max``.
"""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Union

from .errors import EmptyInput, OutOfRange, ParseError

SCALE = 10000

_DECIMAL_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class BasisPoints(int):
    """An integer score in ``0..10000``. Construction outside the range fails."""

    __slots__ = ()

    def __new__(cls, value: int) -> "BasisPoints":
        if isinstance(value, bool) or not isinstance(value, int):
            raise OutOfRange(f"basis points must be an integer, got {value!r}")
        if value < 0 or value > SCALE:
            raise OutOfRange(f"basis points out of range: {value}")
        return super().__new__(cls, value)

    def __repr__(self) -> str:
        return f"BasisPoints({int(self)})"

    def as_fraction(self) -> Fraction:
        return Fraction(int(self), SCALE)

    def display(self) -> str:
        return format_bp(self)


BOTTOM = BasisPoints(0)
TOP = BasisPoints(SCALE)

Exact = Union[str, Fraction, int, Decimal]


def to_fraction(x: Exact) -> Fraction:
    """Parse an exact decimal. Binary floats are refused."""
    if isinstance(x, bool) or isinstance(x, float):
        raise ParseError(f"binary floats are not accepted: {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise ParseError(f"non-finite decimal: {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not _DECIMAL_RE.match(s):
            raise ParseError(f"malformed decimal: {x!r}")
        try:
            return Fraction(Decimal(s))
        except InvalidOperation as exc:  # pragma: no cover - regex guards this
            raise ParseError(f"malformed decimal: {x!r}") from exc
    raise ParseError(f"unsupported score type: {type(x).__name__}")


def round_half_up(q: Fraction) -> int:
    """Nearest integer, ties away from zero for non-negative input."""
    if q < 0:
        return -round_half_up(-q)
    return int((q * 2 + 1) // 2)


def discretize(x: Exact) -> BasisPoints:
    """Map an exact score in ``[0, 1]`` to the nearest basis point, half up."""
    q = to_fraction(x)
    if q < 0 or q > 1:
        raise OutOfRange(f"score outside [0, 1]: {x!r}")
    return BasisPoints(round_half_up(q * SCALE))


def meet(a: int, b: int) -> BasisPoints:
    return BasisPoints(min(a, b))


def join(a: int, b: int) -> BasisPoints:
    return BasisPoints(max(a, b))


def meet_all(xs: Iterable[int]) -> BasisPoints:
    """Infimum of a non-empty collection. Callers pass ``TOP`` for the empty case."""
    items = list(xs)
    if not items:
        raise EmptyInput("meet_all of an empty collection")
    out = items[0]
    for x in items[1:]:
        out = min(out, x)
    return BasisPoints(out)


def join_all(xs: Iterable[int]) -> BasisPoints:
    items = list(xs)
    if not items:
        raise EmptyInput("join_all of an empty collection")
    return BasisPoints(max(items))


def format_bp(value: int) -> str:
    """Render as value/100 with two decimals, e.g. 8230 -> '82.30'."""
    v = int(value)
    return f"{v // 100}.{v % 100:02d}"
