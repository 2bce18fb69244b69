"""Scalar cell values and the one rule set for comparing and combining them.

A cell is an int, a float, a str, or None for a missing entry.  Every layer
that touches cell data (predicate evaluation, similarity, key detection,
content hashing) imports these helpers, so 1 and 1.0 cannot be equal in one
place and distinct in another.
"""

from __future__ import annotations

import math
import operator
from fractions import Fraction
from typing import Union

Value = Union[int, float, str, None]

COMPARISON_OPS = (">=", ">", "<=", "<", "=", "!=")
ARITHMETIC_OPS = ("+", "-", "*", "/")

_CMP = {
    ">=": operator.ge,
    ">": operator.gt,
    "<=": operator.le,
    "<": operator.lt,
    "=": operator.eq,
    "!=": operator.ne,
}


def is_number(v: Value) -> bool:
    # bool is an int subclass but never a legal cell value
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def compare(a: Value, op: str, b: Value) -> bool:
    """Three-valued-logic collapse: any comparison touching a missing value
    or mixing numbers with text is false, ``!=`` included."""
    fn = _CMP[op]
    if a is None or b is None:
        return False
    if is_number(a) and is_number(b):
        return fn(a, b)
    if isinstance(a, str) and isinstance(b, str):
        return fn(a, b)
    return False


def arith(a: Value, op: str, b: Value) -> Value:
    """Combine two cells; ``+`` concatenates text.  Anything undefined
    (missing operand, mixed types, division by zero, overflow) yields None
    rather than raising."""
    if op not in _ARITH:
        raise ValueError(f"unknown arithmetic operator {op!r}")
    if a is None or b is None:
        return None
    if isinstance(a, str) and isinstance(b, str):
        return a + b if op == "+" else None
    if not (is_number(a) and is_number(b)):
        return None
    try:
        if op == "/":
            if b == 0:
                return None
            out = a / b
        else:
            out = _ARITH[op](a, b)
    except OverflowError:
        # huge-int true division or int/float mixing past float range
        return None
    if isinstance(out, float) and not math.isfinite(out):
        return None
    return out


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}


def sort_key(v: Value) -> tuple:
    """Total order over cells: missing, then numbers, then text.

    Numbers order by exact rational value so int/float twins sort together.
    """
    if v is None:
        return (0,)
    if is_number(v):
        return (1, Fraction(v))
    return (2, v)


def canonical_token(v: Value) -> str:
    """Stable text form used in content hashes; equal cells share a token."""
    if v is None:
        return "n"
    if is_number(v):
        return "d" + str(Fraction(v))
    return "t" + v
