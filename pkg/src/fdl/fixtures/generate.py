"""Generators for the two reference factories.

The discrete factory has twelve WEDM machines (Small, Medium and Large, four
of each) and twenty parts. Costs come from the reference part table where a
row exists and from part 15's own listing; every other (part, machine) pair
is synthesized from a seeded generator so the output is stable:

* parts 1-7 fit every machine, 8-14 the Medium and Large ones, 15-20 only
  the Large ones;
* a part's base cutting time is drawn once, then scaled per size (Small 1.4,
  Medium 1.0, Large 0.95) and per machine (+4 % for each step 1..4);
* wire cost scales with size, machine cost with time at a per-size rate;
  the monetary cost of an option is wire + machine;
* the number of cuts is drawn from 1..10 (part 15 has 10).

The process factory is a paint plant of nine lines P1..P9. Silos, mixers and
tanks are shared as follows: Silo 1 feeds P1-P2, Silo 2 P3-P5, Silo 3 P6-P7,
Silo 4 P8-P9; Mixer k serves line Pk; Tank 1 collects P1-P5, Tank 2 P6-P7 and
Tank 3 P8-P9. Each paint is one process with one process type per line
group. A batch runs three tasks: fill (Silo and Mixer, 15 min), mix (Mixer,
the recipe time in Standard mode, x1.5 in Economy, x0.5 in Power) and
discharge (Mixer and Tank, 10 min).
"""

from __future__ import annotations

import random
from pathlib import Path

from fdl.expand import expand_cuts
from fdl.fixtures.tables import (
    P15_CUTS,
    P15_OPTIONS,
    PART_COSTS,
    RECIPES,
    WEDM_SETUPS,
    WEDM_UNAVAILABLE,
    WEDM_WINDOWS,
)
from fdl.model import (
    AllenOperator,
    FactoryModel,
    ObjectiveKind,
    RawAllocation,
    RawCompatibleDevice,
    RawDevice,
    RawLine,
    RawModel,
    RawOption,
    RawProcess,
    RawProcessType,
    RawRelation,
    RawSetup,
    RawSubprocess,
    resolve,
)
from fdl.serialize import serialize_fdl

SIZES = ("Small", "Medium", "Large")
WEDM_DEVICES = tuple(f"{size} {i}" for size in SIZES for i in range(1, 5))
PARTS = 20
SEED = 15

_SIZE_TIME = {"Small": 1.4, "Medium": 1.0, "Large": 0.95}
_SIZE_WIRE = {"Small": 1.0, "Medium": 1.1, "Large": 1.9}
# machine cost per minute of cutting
_SIZE_RATE = {"Small": 0.05, "Medium": 0.12, "Large": 0.2}

MODES = ("Economy", "Standard", "Power")
MODE_FACTOR = {"Economy": 1.5, "Standard": 1.0, "Power": 0.5}
FILL_TIME = 150
DISCHARGE_TIME = 100
PAINT_LINES = tuple(f"P{i}" for i in range(1, 10))
SILO_OF = {1: 1, 2: 1, 3: 2, 4: 2, 5: 2, 6: 3, 7: 3, 8: 4, 9: 4}
TANK_OF = {1: 1, 2: 1, 3: 1, 4: 1, 5: 1, 6: 2, 7: 2, 8: 3, 9: 3}


def part_devices(part: int) -> tuple[str, ...]:
    if part <= 7:
        sizes = SIZES
    elif part <= 14:
        sizes = SIZES[1:]
    else:
        sizes = SIZES[2:]
    return tuple(d for d in WEDM_DEVICES if d.split()[0] in sizes)


def discrete_model() -> FactoryModel:
    rng = random.Random(SEED)
    known = {(row.part, row.device): row for row in PART_COSTS}
    p15 = {o.device: o for o in P15_OPTIONS}

    devices = []
    for name in WEDM_DEVICES:
        windows = [(s, e, None) for s, e in WEDM_WINDOWS.get(name, ())]
        devices.append(RawDevice(name, available=name not in WEDM_UNAVAILABLE, windows=windows))

    processes: list[RawProcess] = []
    relations: list[RawRelation] = []
    for part in range(1, PARTS + 1):
        base = rng.uniform(1500.0, 4000.0)
        wire = rng.uniform(20.0, 300.0)
        cuts = rng.randint(1, 10)
        if part == 15:
            cuts = P15_CUTS
        compatible = []
        for dev in part_devices(part):
            if (part, dev) in known:
                row = known[(part, dev)]
                compatible.append(RawCompatibleDevice(dev, None, row.cutting_time, None, row.total))
            elif part == 15:
                o = p15[dev]
                compatible.append(RawCompatibleDevice(dev, None, o.processing_time, o.energy, o.monetary))
            else:
                size, index = dev.split()
                minutes = base * _SIZE_TIME[size] * (1 + 0.04 * (int(index) - 1))
                money = wire * _SIZE_WIRE[size] + minutes * _SIZE_RATE[size]
                compatible.append(RawCompatibleDevice(dev, None, round(minutes * 10), None, round(money * 10)))
        proc = RawProcess(f"P{part}", priority=part, cuts=cuts, compatible_devices=compatible)
        proc, rels = expand_cuts(proc)
        processes.append(proc)
        relations.extend(rels)

    setups = [RawSetup(*entry) for entry in WEDM_SETUPS]
    raw = RawModel(
        objectives=[(ObjectiveKind.MAKESPAN, None), (ObjectiveKind.MONETARY, None)],
        devices=devices,
        processes=processes,
        relations=relations,
        setups=setups,
    )
    return resolve(raw)


def _paint_devices() -> list[RawDevice]:
    modes = [(m, None) for m in MODES]
    names = (
        [f"Silo {i}" for i in range(1, 5)]
        + [f"Mixer {i}" for i in range(1, 10)]
        + [f"Tank {i}" for i in range(1, 4)]
    )
    return [RawDevice(n, modes=list(modes)) for n in names]


def _paint_lines() -> list[RawLine]:
    lines = []
    for i in range(1, 10):
        stations = [(0, f"Silo {SILO_OF[i]}", None), (1, f"Mixer {i}", None), (2, f"Tank {TANK_OF[i]}", None)]
        lines.append(RawLine(f"P{i}", stations))
    return lines


def _batch_tasks(type_name: str, lines: tuple[str, ...], recipe_time: int) -> list[RawSubprocess]:
    fill, mix, discharge = [], [], []
    for line in lines:
        i = int(line[1:])
        silo, mixer, tank = f"Silo {SILO_OF[i]}", f"Mixer {i}", f"Tank {TANK_OF[i]}"
        fill.append(RawOption([RawAllocation(silo, "Standard"), RawAllocation(mixer, "Standard")], FILL_TIME))
        for mode in MODES:
            mix.append(RawOption([RawAllocation(mixer, mode)], round(recipe_time * MODE_FACTOR[mode])))
        discharge.append(
            RawOption([RawAllocation(mixer, "Standard"), RawAllocation(tank, "Standard")], DISCHARGE_TIME)
        )
    return [
        RawSubprocess(f"{type_name} Task {k}", options, process_type=type_name)
        for k, options in enumerate((fill, mix, discharge), start=1)
    ]


def process_model() -> FactoryModel:
    processes = []
    relations = []
    paints = list(dict.fromkeys(r.paint for r in RECIPES))
    for priority, paint in enumerate(paints, start=1):
        types, subs = [], []
        for recipe in (r for r in RECIPES if r.paint == paint):
            type_name = f"{paint} {recipe.group}"
            types.append(RawProcessType(type_name, recipe.batch, [(line, None) for line in recipe.lines]))
            tasks = _batch_tasks(type_name, recipe.lines, recipe.recipe_time)
            subs.extend(tasks)
            relations.extend(
                RawRelation(a.name, b.name, AllenOperator.M) for a, b in zip(tasks, tasks[1:])
            )
        processes.append(RawProcess(paint, priority=priority, process_types=types, subprocesses=subs))
    raw = RawModel(
        objectives=[(ObjectiveKind.MAKESPAN, None)],
        devices=_paint_devices(),
        lines=_paint_lines(),
        processes=processes,
        relations=relations,
    )
    return resolve(raw)


GENERATORS = {"discrete": discrete_model, "process": process_model}
FILENAMES = {"discrete": "wedm.fdl", "process": "paint.fdl"}


def write_fixture(kind: str, out_dir: str | Path) -> Path:
    """Write the ``kind`` factory as FDL into ``out_dir`` and return the file path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / FILENAMES[kind]
    path.write_bytes(serialize_fdl(GENERATORS[kind]()))
    return path


def listing_path(name: str) -> Path:
    """Path of a bundled listing fixture such as ``"template.fdl"``."""
    return Path(__file__).with_name(name)


LISTINGS = ("template.fdl", "wedm_devices.fdl", "wedm_p15.fdl", "wedm_setups.fdl", "paint_lines.fdl")

