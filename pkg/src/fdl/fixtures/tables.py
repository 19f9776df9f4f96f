"""Reference cost tables of the two reference scenarios, in tenths."""

from __future__ import annotations

from dataclasses import dataclass

from fdl.fixedpoint import parse_tenths


@dataclass(frozen=True)
class PartCost:
    """One row of the WEDM part cost table.

    ``device`` is the machine named by the size and mode columns, so size
    "Small" with mode 1 is the machine "Small 1".
    """

    part: int
    device: str
    cutting_time: int
    wire: int
    machine: int
    total: int


def _row(part: int, device: str, *values: str) -> PartCost:
    time, wire, machine, total = (parse_tenths(v) for v in values)
    return PartCost(part, device, time, wire, machine, total)


# Rows as printed. The last two rows print the machine cost in the total
# column, so wire + machine != total for them.
PART_COSTS: tuple[PartCost, ...] = (
    _row(1, "Small 1", "2833.5", "28.1", "164.0", "192.1"),
    _row(1, "Small 2", "2956.2", "28.1", "140.3", "168.4"),
    _row(1, "Small 3", "3042.1", "28.1", "147.8", "175.9"),
    _row(1, "Small 4", "3174.1", "30.2", "136.8", "167.0"),
    _row(1, "Medium 1", "2033.5", "30.2", "242.9", "273.1"),
    _row(1, "Large 4", "1974.1", "53.7", "408.4", "462.1"),
    _row(20, "Large 1", "5341.3", "335.2", "5866.7", "6201.9"),
    _row(20, "Large 2", "5505.1", "383.1", "8381.0", "8764.1"),
    _row(20, "Large 3", "5191.7", "482.1", "5673.8", "5673.8"),
    _row(20, "Large 4", "4106.6", "648.3", "4754.9", "4754.9"),
)


@dataclass(frozen=True)
class P15Option:
    device: str
    processing_time: int
    energy: int
    monetary: int


# Part 15 is listed with process-level totals per compatible machine.
P15_OPTIONS: tuple[P15Option, ...] = (
    P15Option("Large 1", 55050, 1200, 46510),
    P15Option("Large 2", 53410, 1200, 65730),
    P15Option("Large 3", 74210, 1200, 35660),
    P15Option("Large 4", 62050, 1200, 42550),
)
P15_CUTS = 10

# Unavailability windows in tenths of a minute, and machines switched off.
WEDM_WINDOWS: dict[str, tuple[tuple[int, int], ...]] = {
    "Small 1": ((500, 1000), (2500, 3000)),
    "Small 2": ((0, 200),),
    "Small 3": ((250, 300),),
}
WEDM_UNAVAILABLE = frozenset({"Small 3"})

# Setup list: (source, destination, device, time, energy, money).
WEDM_SETUPS: tuple[tuple[str, str, str, int, int, int], ...] = tuple(
    ("P1", "P2", device, 100, 100, 10000)
    for device in (
        "Small 4", "Medium 1", "Small 3", "Medium 2", "Small 2", "Small 1",
        "Large 3", "Large 4", "Medium 3", "Large 1", "Medium 4", "Large 2",
    )
)


@dataclass(frozen=True)
class Recipe:
    """Batch size (tenths of a tonne) and recipe time (tenths of a minute) on one line group."""

    paint: str
    group: str
    lines: tuple[str, ...]
    batch: int
    recipe_time: int


_GROUPS = (
    ("A", ("P1", "P2", "P3", "P4", "P5")),
    ("B", ("P6", "P7")),
    ("C", ("P8", "P9")),
)


def _recipes(paint: str, batches: tuple[int, int, int], minutes: tuple[int, int, int]) -> list[Recipe]:
    return [
        Recipe(paint, g, lines, b * 10, t * 10)
        for (g, lines), b, t in zip(_GROUPS, batches, minutes)
    ]


RECIPES: tuple[Recipe, ...] = tuple(
    _recipes("Std White", (5, 10, 10), (60, 45, 30))
    + _recipes("Super White", (6, 12, 12), (90, 60, 45))
    + _recipes("Std Blue", (4, 8, 8), (100, 80, 60))
    + _recipes("Std Green", (4, 8, 8), (120, 90, 60))
)
