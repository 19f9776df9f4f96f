from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdl.fixedpoint import format_quantity, format_tenths, parse_quantity, parse_tenths, split_exact


@pytest.mark.parametrize(
    "text,value",
    [("2833.5", 28335), ("550", 5500), ("0", 0), ("28.1", 281), ("1000.0", 10000), (" 12.50 ", 125), ("7.", 70)],
)
def test_parse_tenths(text, value):
    assert parse_tenths(text) == value


@pytest.mark.parametrize("text", ["", "-1", "1.25", "abc", "1e3", "1,5"])
def test_parse_tenths_rejects(text):
    with pytest.raises(ValueError):
        parse_tenths(text)


@given(st.integers(min_value=0, max_value=10**12))
def test_format_parse_round_trip(value):
    assert parse_tenths(format_tenths(value)) == value


def test_printing_is_byte_identical_for_canonical_text():
    for text in ("2833.5", "0.0", "192.1", "5866.7"):
        assert format_tenths(parse_tenths(text)) == text


@pytest.mark.parametrize("text,value", [("5t", 50), ("5 t", 50), ("4.5", 45), ("12T", 120)])
def test_quantities(text, value):
    assert parse_quantity(text) == value
    assert parse_quantity(format_quantity(value)) == value


def test_split_exact_examples():
    assert split_exact(100, 3) == [33, 33, 34]
    assert split_exact(55050, 10) == [5505] * 10


@given(st.integers(min_value=0, max_value=10**9), st.integers(min_value=1, max_value=50))
def test_split_exact_preserves_total(total, parts):
    shares = split_exact(total, parts)
    assert len(shares) == parts
    assert sum(shares) == total
    assert max(shares[:-1] or [shares[-1]]) <= shares[-1]
