from __future__ import annotations

import pytest

from fdl.fixtures.generate import listing_path
from fdl.parser import parse_file


@pytest.fixture(scope="session")
def listing():
    """Parse a bundled listing fixture by file name; returns (model, diagnostics)."""
    cache = {}

    def load(name: str):
        if name not in cache:
            cache[name] = parse_file(str(listing_path(name)))
        return cache[name]

    return load
