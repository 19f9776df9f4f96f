"""Shorthand expansion: automatic cut generation and bulk-order decomposition."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from fdl.errors import AlreadyExpanded, IncompatibleLine, NoCompatibleDevices
from fdl.fixedpoint import split_exact
from fdl.model import (
    AllenOperator,
    FactoryModel,
    RawAllocation,
    RawOption,
    RawProcess,
    RawProcessType,
    RawRelation,
    RawSetup,
    RawSubprocess,
    resolve,
    to_raw,
)


def cut_name(process: str, i: int) -> str:
    return f"{process} cut {i}"


def expand_cuts(process: RawProcess) -> tuple[RawProcess, list[RawRelation]]:
    """Generate one subprocess per cut from the process-level compatible devices.

    Each cut gets one option per compatible device whose time and costs are
    the process totals split evenly in tenths, with the remainder on the last
    cut. Consecutive cuts are linked by M relations, which are returned
    alongside the expanded process.
    """
    if process.subprocesses:
        raise AlreadyExpanded(f"process {process.name!r} already lists its subprocesses")
    if not process.compatible_devices:
        raise NoCompatibleDevices(f"process {process.name!r} has cuts but no compatible devices")
    n = process.cuts or 0
    if n <= 0:
        raise ValueError(f"process {process.name!r} has no cuts to expand")

    def shares(total: int | None) -> list[int | None]:
        return [None] * n if total is None else list(split_exact(total, n))

    columns = [
        (c, shares(c.processing_time), shares(c.energy), shares(c.monetary))
        for c in process.compatible_devices
    ]
    subprocesses = []
    for i in range(n):
        options = [
            RawOption([RawAllocation(c.device, c.mode, c.loc)], t[i], e[i], m[i], c.loc)
            for c, t, e, m in columns
        ]
        subprocesses.append(RawSubprocess(cut_name(process.name, i + 1), options, loc=process.loc))
    relations = [
        RawRelation(subprocesses[i].name, subprocesses[i + 1].name, AllenOperator.M, process.loc)
        for i in range(n - 1)
    ]
    return dataclasses.replace(process, subprocesses=subprocesses), relations


@dataclass
class SubOrder:
    index: int
    # tenths of a tonne actually produced by this repetition
    amount: int
    process: RawProcess
    relations: list[RawRelation]


def expand_order(model: FactoryModel, process: str, amount: int, line: str) -> list[SubOrder]:
    """Split a bulk order of ``amount`` tenths of a tonne into full-batch sub-orders on ``line``.

    The batch size comes from the process type compatible with ``line``. The
    last sub-order may produce less than a full batch but keeps full-batch
    processing times.
    """
    proc_idx = model.process_index[process]
    proc = model.processes[proc_idx]
    line_idx = model.line_index.get(line)
    ptype = next((t for t in proc.process_types if line_idx in t.lines), None)
    if line_idx is None or ptype is None:
        raise IncompatibleLine(f"production line {line!r} is not compatible with {process!r}")
    if amount <= 0:
        raise ValueError("order amount must be positive")

    raw_proc = to_raw(model).processes[proc_idx]
    raw_type = raw_proc.process_types[proc.process_types.index(ptype)]
    members = ptype.subprocesses or tuple(range(len(proc.subprocesses)))
    chain = [raw_proc.subprocesses[i] for i in members]
    chain_names = {sp.name for sp in chain}
    relations = [
        r for r in to_raw(model).relations
        if r.source in chain_names and r.destination in chain_names
    ]

    count = math.ceil(amount / ptype.amount)
    orders = []
    for k in range(1, count + 1):
        suffix = f"#{k}"
        clone = RawProcess(
            name=proc.name + suffix,
            priority=proc.priority,
            # keep every line of the type: option devices may sit on any of them
            process_types=[RawProcessType(ptype.name + suffix, ptype.amount, list(raw_type.lines))],
            subprocesses=[
                dataclasses.replace(sp, name=sp.name + suffix, process_type=ptype.name + suffix)
                for sp in chain
            ],
        )
        rels = [RawRelation(r.source + suffix, r.destination + suffix, r.operator) for r in relations]
        produced = min(ptype.amount, amount - (k - 1) * ptype.amount)
        orders.append(SubOrder(k, produced, clone, rels))
    return orders


def apply_order(model: FactoryModel, process: str, amount: int, line: str) -> FactoryModel:
    """Replace ``process`` in the model by the sub-orders fulfilling ``amount`` on ``line``."""
    orders = expand_order(model, process, amount, line)
    raw = to_raw(model)
    idx = model.process_index[process]
    old = raw.processes[idx]
    old_names = {sp.name for sp in old.subprocesses}
    raw.processes[idx:idx + 1] = [o.process for o in orders]
    raw.relations = [
        r for r in raw.relations if r.source not in old_names and r.destination not in old_names
    ] + [r for o in orders for r in o.relations]

    def renamed(name: str) -> list[str]:
        if name == process:
            return [o.process.name for o in orders]
        if name in old_names:
            return [f"{name}#{o.index}" for o in orders]
        return [name]

    setups = []
    for s in raw.setups:
        for src in renamed(s.source):
            for dst in renamed(s.destination):
                setups.append(dataclasses.replace(s, source=src, destination=dst))
    raw.setups = _dedupe_setups(setups)
    return resolve(raw)


def _dedupe_setups(setups: list[RawSetup]) -> list[RawSetup]:
    seen = set()
    out = []
    for s in setups:
        key = (s.source, s.destination, s.device)
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out
