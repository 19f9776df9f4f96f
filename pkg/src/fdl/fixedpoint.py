"""Fixed-point helpers.

Every time, energy, money and quantity value is held as an integer count of
tenths. Parsing accepts at most one significant decimal digit so arithmetic
stays exact.
"""

from __future__ import annotations

import re

_NUMBER = re.compile(r"\s*(\d+)(?:\.(\d*))?\s*\Z")
_QUANTITY = re.compile(r"\s*(\d+(?:\.\d*)?)\s*(t)?\s*\Z", re.IGNORECASE)


def parse_tenths(text: str) -> int:
    """Parse a non-negative decimal such as ``"2833.5"`` into tenths (28335)."""
    m = _NUMBER.match(text)
    if m is None:
        raise ValueError(f"not a non-negative decimal: {text!r}")
    whole, frac = m.group(1), m.group(2) or ""
    if frac[1:].strip("0"):
        raise ValueError(f"more than one decimal digit: {text!r}")
    return int(whole) * 10 + (int(frac[0]) if frac else 0)


def format_tenths(value: int) -> str:
    if value < 0:
        raise ValueError("fixed-point values are non-negative")
    return f"{value // 10}.{value % 10}"


def parse_quantity(text: str) -> int:
    """Parse an amount in tonnes (``"5t"``, ``"5 t"``, ``"4.5"``) into tenths of a tonne."""
    m = _QUANTITY.match(text)
    if m is None:
        raise ValueError(f"not a quantity: {text!r}")
    return parse_tenths(m.group(1))


def format_quantity(value: int) -> str:
    return format_tenths(value) + "t"


def split_exact(total: int, parts: int) -> list[int]:
    """Split ``total`` into ``parts`` integer shares; the remainder goes to the last share."""
    if parts <= 0:
        raise ValueError("parts must be positive")
    share = total // parts
    shares = [share] * parts
    shares[-1] += total - share * parts
    return shares
