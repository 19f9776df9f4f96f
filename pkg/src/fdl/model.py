"""Factory model types and reference resolution.

The parser produces a *raw* model (``RawModel``) that refers to everything by
name and carries source locations. ``resolve`` validates it and returns an
immutable ``FactoryModel`` in which every reference is an index into the
owning collection. All times and costs are integer tenths (see
``fdl.fixedpoint``).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

from fdl.errors import Location, MismatchedObjectives, ModelError, ResolutionError

DEFAULT_MODE = "default"


class ObjectiveKind(Enum):
    MAKESPAN = "makespan"
    ENERGY = "energy"
    MONETARY = "monetary"

    @classmethod
    def parse(cls, text: str) -> ObjectiveKind:
        key = text.strip().lower()
        key = _OBJECTIVE_ALIASES.get(key, key)
        return cls(key)


_OBJECTIVE_ALIASES = {
    "energyconsumption": "energy",
    "monetarycost": "monetary",
    "cost": "monetary",
}


class AllenOperator(Enum):
    LT = "LT"
    S = "S"
    F = "F"
    EQ = "EQ"
    O = "O"  # noqa: E741
    M = "M"
    D = "D"

    @classmethod
    def parse(cls, text: str) -> AllenOperator:
        return cls(text.strip().upper())


class SetupScope(Enum):
    PROCESS = "process"
    SUBPROCESS = "subprocess"


# --- resolved types -------------------------------------------------------


@dataclass(frozen=True)
class OperatingMode:
    name: str


@dataclass(frozen=True)
class ProcessingDevice:
    name: str
    available: bool = True
    unavailable: tuple[tuple[int, int], ...] = ()
    modes: tuple[OperatingMode, ...] = (OperatingMode(DEFAULT_MODE),)

    def mode_index(self, name: str) -> int:
        for i, mode in enumerate(self.modes):
            if mode.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class ProductionLine:
    name: str
    stations: tuple[int, ...]


@dataclass(frozen=True)
class Allocation:
    device: int
    mode: int


@dataclass(frozen=True)
class DeviceOption:
    allocations: tuple[Allocation, ...]
    processing_time: int | None = None
    energy: int | None = None
    monetary: int | None = None

    @property
    def duration(self) -> int:
        return self.processing_time or 0

    @property
    def devices(self) -> tuple[int, ...]:
        return tuple(a.device for a in self.allocations)


@dataclass(frozen=True)
class Subprocess:
    name: str
    options: tuple[DeviceOption, ...]


@dataclass(frozen=True)
class ProcessType:
    name: str
    amount: int
    lines: tuple[int, ...]
    # local indices into the owning process's subprocesses
    subprocesses: tuple[int, ...] = ()


@dataclass(frozen=True)
class CompatibleDevice:
    device: int
    mode: int
    processing_time: int | None = None
    energy: int | None = None
    monetary: int | None = None


@dataclass(frozen=True)
class ProductionProcess:
    name: str
    subprocesses: tuple[Subprocess, ...] = ()
    priority: int | None = None
    cuts: int | None = None
    process_types: tuple[ProcessType, ...] = ()
    compatible_devices: tuple[CompatibleDevice, ...] = ()


@dataclass(frozen=True)
class SubprocessRelation:
    source: int
    destination: int
    operator: AllenOperator


@dataclass(frozen=True)
class SetupRef:
    scope: SetupScope
    index: int


@dataclass(frozen=True)
class SequenceDependentSetup:
    source: SetupRef
    destination: SetupRef
    device: int
    extra_time: int | None = None
    extra_energy: int | None = None
    extra_monetary: int | None = None


@dataclass(frozen=True)
class FactoryModel:
    objectives: tuple[ObjectiveKind, ...]
    devices: tuple[ProcessingDevice, ...] = ()
    lines: tuple[ProductionLine, ...] = ()
    processes: tuple[ProductionProcess, ...] = ()
    relations: tuple[SubprocessRelation, ...] = ()
    setups: tuple[SequenceDependentSetup, ...] = ()

    @cached_property
    def subprocesses(self) -> tuple[Subprocess, ...]:
        """All subprocesses in global order (process order, then document order)."""
        return tuple(sp for p in self.processes for sp in p.subprocesses)

    @cached_property
    def owner(self) -> tuple[int, ...]:
        """Process index of every subprocess."""
        return tuple(pi for pi, p in enumerate(self.processes) for _ in p.subprocesses)

    @cached_property
    def first_subprocess(self) -> tuple[int, ...]:
        """Global index of each process's first subprocess."""
        out, n = [], 0
        for p in self.processes:
            out.append(n)
            n += len(p.subprocesses)
        return tuple(out)

    @cached_property
    def subprocess_index(self) -> dict[str, int]:
        return {sp.name: i for i, sp in enumerate(self.subprocesses)}

    @cached_property
    def device_index(self) -> dict[str, int]:
        return {d.name: i for i, d in enumerate(self.devices)}

    @cached_property
    def process_index(self) -> dict[str, int]:
        return {p.name: i for i, p in enumerate(self.processes)}

    @cached_property
    def line_index(self) -> dict[str, int]:
        return {line.name: i for i, line in enumerate(self.lines)}

    @cached_property
    def chains(self) -> ChainStructure:
        structure, errors = chain_structure(len(self.subprocesses), self.relations)
        if errors:
            raise ResolutionError(
                [ModelError(code, self._relation_message(code, i)) for code, i in errors]
            )
        return structure

    @cached_property
    def setup_table(self) -> dict[tuple[int, int, int], int]:
        """Map ``(predecessor, successor, device)`` to the index of the governing setup.

        Process-level entries apply to every subprocess pair of the two
        processes; more specific (subprocess-level) entries take precedence.
        """
        members = [
            range(start, start + len(p.subprocesses))
            for start, p in zip(self.first_subprocess, self.processes)
        ]

        def expand(ref: SetupRef) -> Iterable[int]:
            if ref.scope is SetupScope.SUBPROCESS:
                return (ref.index,)
            return members[ref.index]

        def specificity(k: int) -> tuple[bool, bool]:
            s = self.setups[k]
            return (s.source.scope is SetupScope.SUBPROCESS,
                    s.destination.scope is SetupScope.SUBPROCESS)

        table: dict[tuple[int, int, int], int] = {}
        for k in sorted(range(len(self.setups)), key=specificity):
            s = self.setups[k]
            for u in expand(s.source):
                for v in expand(s.destination):
                    table[(u, v, s.device)] = k
        return table

    def _relation_message(self, code: str, index: int) -> str:
        sp = self.subprocesses[index].name
        proc = self.processes[self.owner[index]].name
        if code == "CyclicRelation":
            return f"relations of process {proc!r} form a cycle (at {sp!r})"
        return f"subprocess {sp!r} of process {proc!r} has more than one M neighbour"


@dataclass(frozen=True)
class ChainStructure:
    """M-relation chains plus the LT precedence between them."""

    chains: tuple[tuple[int, ...], ...]
    chain_of: tuple[int, ...]
    position: tuple[int, ...]
    # LT edges as (source subprocess, destination subprocess)
    precedences: tuple[tuple[int, int], ...]
    # per subprocess: sources of LT relations ending at it
    lt_preds: tuple[tuple[int, ...], ...]
    # per chain: chains that must wait for it, and how many chains it waits for
    successors: tuple[tuple[int, ...], ...]
    indegree: tuple[int, ...]


def chain_structure(
    n: int, relations: Sequence[SubprocessRelation]
) -> tuple[ChainStructure | None, list[tuple[str, int]]]:
    """Group subprocesses into M-chains and check the chain graph is acyclic.

    Returns the structure and a list of ``(code, subprocess)`` problems.
    """
    errors: list[tuple[str, int]] = []
    succ: dict[int, int] = {}
    pred: dict[int, int] = {}
    for r in relations:
        if r.operator is not AllenOperator.M:
            continue
        if succ.get(r.source, r.destination) != r.destination:
            errors.append(("BranchingChain", r.source))
        if pred.get(r.destination, r.source) != r.source:
            errors.append(("BranchingChain", r.destination))
        succ[r.source] = r.destination
        pred[r.destination] = r.source
    if errors:
        return None, errors

    chain_of = [-1] * n
    position = [0] * n
    chains: list[tuple[int, ...]] = []
    for head in range(n):
        if head in pred:
            continue
        members = [head]
        while members[-1] in succ:
            members.append(succ[members[-1]])
        for pos, s in enumerate(members):
            chain_of[s] = len(chains)
            position[s] = pos
        chains.append(tuple(members))
    for s in range(n):
        if chain_of[s] < 0:
            # every node on an M-cycle has a predecessor, so no head reached it
            return None, [("CyclicRelation", s)]

    precedences = []
    edges: dict[int, set[int]] = defaultdict(set)
    for r in relations:
        if r.operator is not AllenOperator.LT:
            continue
        a, b = chain_of[r.source], chain_of[r.destination]
        if a == b:
            if position[r.destination] <= position[r.source]:
                return None, [("CyclicRelation", r.source)]
        else:
            edges[a].add(b)
        precedences.append((r.source, r.destination))

    indegree = [0] * len(chains)
    for a in edges:
        for b in edges[a]:
            indegree[b] += 1
    initial = tuple(indegree)
    ready = [c for c in range(len(chains)) if indegree[c] == 0]
    seen = 0
    while ready:
        c = ready.pop()
        seen += 1
        for b in edges.get(c, ()):
            indegree[b] -= 1
            if indegree[b] == 0:
                ready.append(b)
    if seen != len(chains):
        stuck = next(c for c in range(len(chains)) if indegree[c] > 0)
        return None, [("CyclicRelation", chains[stuck][0])]

    lt_preds: list[list[int]] = [[] for _ in range(n)]
    for a, b in precedences:
        lt_preds[b].append(a)
    return ChainStructure(
        chains=tuple(chains),
        chain_of=tuple(chain_of),
        position=tuple(position),
        precedences=tuple(precedences),
        lt_preds=tuple(tuple(p) for p in lt_preds),
        successors=tuple(tuple(sorted(edges.get(c, ()))) for c in range(len(chains))),
        indegree=initial,
    ), []


def dominates(a: Sequence[int], b: Sequence[int]) -> bool:
    """Pareto dominance for minimisation: ``a`` is no worse everywhere and better somewhere."""
    if len(a) != len(b):
        raise MismatchedObjectives(f"objective vectors differ in length ({len(a)} vs {len(b)})")
    better = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            better = True
    return better


# --- raw (unresolved) types ------------------------------------------------


@dataclass
class RawAllocation:
    device: str
    mode: str | None = None
    loc: Location = None


@dataclass
class RawOption:
    allocations: list[RawAllocation]
    processing_time: int | None = None
    energy: int | None = None
    monetary: int | None = None
    loc: Location = None


@dataclass
class RawSubprocess:
    name: str
    options: list[RawOption] = field(default_factory=list)
    process_type: str | None = None
    loc: Location = None


@dataclass
class RawProcessType:
    name: str
    amount: int
    lines: list[tuple[str, Location]] = field(default_factory=list)
    loc: Location = None


@dataclass
class RawCompatibleDevice:
    device: str
    mode: str | None = None
    processing_time: int | None = None
    energy: int | None = None
    monetary: int | None = None
    loc: Location = None


@dataclass
class RawProcess:
    name: str
    priority: int | None = None
    cuts: int | None = None
    process_types: list[RawProcessType] = field(default_factory=list)
    compatible_devices: list[RawCompatibleDevice] = field(default_factory=list)
    subprocesses: list[RawSubprocess] = field(default_factory=list)
    loc: Location = None


@dataclass
class RawDevice:
    name: str
    available: bool = True
    windows: list[tuple[int, int, Location]] = field(default_factory=list)
    # None when the document has no modes element
    modes: list[tuple[str, Location]] | None = None
    loc: Location = None


@dataclass
class RawLine:
    name: str
    stations: list[tuple[int, str, Location]] = field(default_factory=list)
    loc: Location = None


@dataclass
class RawRelation:
    source: str
    destination: str
    operator: AllenOperator
    loc: Location = None


@dataclass
class RawSetup:
    source: str
    destination: str
    device: str
    extra_time: int | None = None
    extra_energy: int | None = None
    extra_monetary: int | None = None
    loc: Location = None


@dataclass
class RawModel:
    objectives: list[tuple[ObjectiveKind, Location]] = field(default_factory=list)
    devices: list[RawDevice] = field(default_factory=list)
    lines: list[RawLine] = field(default_factory=list)
    processes: list[RawProcess] = field(default_factory=list)
    relations: list[RawRelation] = field(default_factory=list)
    setups: list[RawSetup] = field(default_factory=list)


# --- resolution -------------------------------------------------------------


def merge_windows(windows: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Sort half-open windows and merge any that overlap or touch."""
    merged: list[list[int]] = []
    for start, end in sorted(windows):
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return tuple((s, e) for s, e in merged)


def resolve(raw: RawModel | FactoryModel, warnings: list[ModelError] | None = None) -> FactoryModel:
    """Validate ``raw`` and replace every name reference by an index.

    Raises ``ResolutionError`` carrying every problem found. Resolving an
    already resolved model round-trips it through ``to_raw`` and returns an
    equal model.
    """
    if isinstance(raw, FactoryModel):
        raw = to_raw(raw)
    return _Resolver(raw, warnings if warnings is not None else []).run()


class _Resolver:
    def __init__(self, raw: RawModel, warnings: list[ModelError]):
        self.raw = raw
        self.errors: list[ModelError] = []
        self.warnings = warnings

    def error(self, code: str, message: str, loc: Location) -> None:
        self.errors.append(ModelError(code, message, loc))

    def run(self) -> FactoryModel:
        objectives = self._objectives()
        devices = self._devices()
        self.device_index = {d.name: i for i, d in enumerate(devices)}
        self.devices = devices
        lines = self._lines()
        self.line_index = {line.name: i for i, line in enumerate(lines)}
        self.lines = lines
        processes = self._processes()
        relations = self._relations(processes)
        setups = self._setups(processes)
        if self.errors:
            raise ResolutionError(self.errors)
        model = FactoryModel(objectives, devices, lines, processes, relations, setups)
        structure, problems = chain_structure(len(model.subprocesses), relations)
        if problems:
            raise ResolutionError(
                [ModelError(code, model._relation_message(code, i)) for code, i in problems]
            )
        model.__dict__["chains"] = structure
        return model

    def _objectives(self) -> tuple[ObjectiveKind, ...]:
        out: list[ObjectiveKind] = []
        for kind, loc in self.raw.objectives:
            if kind in out:
                self.error("DuplicateName", f"objective {kind.value!r} listed twice", loc)
            else:
                out.append(kind)
        if not out:
            self.error("NoObjectives", "the model declares no objectives", None)
        return tuple(out)

    def _devices(self) -> tuple[ProcessingDevice, ...]:
        out = []
        seen: set[str] = set()
        for d in self.raw.devices:
            if d.name in seen:
                self.error("DuplicateName", f"processing device {d.name!r} declared twice", d.loc)
            seen.add(d.name)
            if d.modes is None:
                modes: tuple[OperatingMode, ...] = (OperatingMode(DEFAULT_MODE),)
            else:
                if not d.modes:
                    self.error("EmptyModes", f"processing device {d.name!r} has no modes", d.loc)
                names: list[str] = []
                for name, loc in d.modes:
                    if name in names:
                        self.error("DuplicateName", f"mode {name!r} declared twice on {d.name!r}", loc)
                    else:
                        names.append(name)
                modes = tuple(OperatingMode(n) for n in names)
            for start, end, loc in d.windows:
                if start >= end:
                    self.error("BadWindow", f"unavailable window {start},{end} on {d.name!r} is empty", loc)
            windows = merge_windows((s, e) for s, e, _ in d.windows if s < e)
            out.append(ProcessingDevice(d.name, d.available, windows, modes))
        return tuple(out)

    def _device_ref(self, name: str, loc: Location, where: str) -> int | None:
        idx = self.device_index.get(name)
        if idx is None:
            self.error("DanglingReference", f"{where} refers to unknown processing device {name!r}", loc)
        return idx

    def _mode_ref(self, device: int, mode: str | None, loc: Location) -> int | None:
        dev = self.devices[device]
        if mode is None:
            if len(dev.modes) == 1:
                return 0
            try:
                return dev.mode_index(DEFAULT_MODE)
            except KeyError:
                self.error("AmbiguousMode", f"no mode given for {dev.name!r}, which has several", loc)
                return None
        try:
            return dev.mode_index(mode)
        except KeyError:
            self.error("DanglingReference", f"device {dev.name!r} has no mode {mode!r}", loc)
            return None

    def _lines(self) -> tuple[ProductionLine, ...]:
        out = []
        seen: set[str] = set()
        for line in self.raw.lines:
            if line.name in seen:
                self.error("DuplicateName", f"production line {line.name!r} declared twice", line.loc)
            seen.add(line.name)
            stations = sorted(line.stations, key=lambda s: s[0])
            orders = [o for o, _, _ in stations]
            if orders and (orders[0] not in (0, 1) or orders != list(range(orders[0], orders[0] + len(orders)))):
                self.error(
                    "NonConsecutiveOrder",
                    f"production line {line.name!r} has order values {orders}, expected consecutive from 0 or 1",
                    line.loc,
                )
            refs = []
            for _, name, loc in stations:
                idx = self._device_ref(name, loc, f"production line {line.name!r}")
                if idx is not None:
                    if idx in refs:
                        self.error("NonLinearLine", f"device {name!r} appears twice in line {line.name!r}", loc)
                    refs.append(idx)
            out.append(ProductionLine(line.name, tuple(refs)))
        return tuple(out)

    def _option(self, opt: RawOption, where: str) -> DeviceOption | None:
        allocations = []
        used: set[int] = set()
        ok = True
        for a in opt.allocations:
            dev = self._device_ref(a.device, a.loc, where)
            if dev is None:
                ok = False
                continue
            if dev in used:
                self.error("DuplicateDevice", f"{where} allocates {a.device!r} twice in one option", a.loc)
                ok = False
            used.add(dev)
            mode = self._mode_ref(dev, a.mode, a.loc)
            if mode is None:
                ok = False
                continue
            allocations.append(Allocation(dev, mode))
        if not opt.allocations:
            self.error("EmptyOption", f"{where} has an option without devices", opt.loc)
            ok = False
        if opt.processing_time is None and opt.energy is None and opt.monetary is None:
            self.error("MissingCost", f"{where}: option needs processingTime, energyConsumption or monetaryCost", opt.loc)
            ok = False
        if not ok:
            return None
        return DeviceOption(tuple(allocations), opt.processing_time, opt.energy, opt.monetary)

    def _processes(self) -> tuple[ProductionProcess, ...]:
        out = []
        seen: set[str] = set()
        sp_seen: set[str] = set()
        for p in self.raw.processes:
            if p.name in seen:
                self.error("DuplicateName", f"production process {p.name!r} declared twice", p.loc)
            seen.add(p.name)

            type_names = [t.name for t in p.process_types]
            # subprocesses nested in a process type come first, in type order
            ordered = [sp for t in type_names for sp in p.subprocesses if sp.process_type == t]
            ordered += [sp for sp in p.subprocesses if sp.process_type not in type_names]

            subprocesses = []
            for sp in ordered:
                if sp.name in sp_seen:
                    self.error("DuplicateName", f"subprocess {sp.name!r} declared twice", sp.loc)
                sp_seen.add(sp.name)
                if not sp.options:
                    self.error("NoOptions", f"subprocess {sp.name!r} has no processing devices", sp.loc)
                options = [self._option(o, f"subprocess {sp.name!r}") for o in sp.options]
                subprocesses.append(Subprocess(sp.name, tuple(o for o in options if o is not None)))

            types = []
            allowed: set[int] = set()
            for t in p.process_types:
                if t.amount <= 0:
                    self.error("BadNumber", f"process type {t.name!r} must produce a positive amount", t.loc)
                lines = []
                for name, loc in t.lines:
                    idx = self.line_index.get(name)
                    if idx is None:
                        self.error("DanglingReference", f"process type {t.name!r} refers to unknown production line {name!r}", loc)
                    else:
                        lines.append(idx)
                        allowed.update(self.lines[idx].stations)
                members = tuple(i for i, sp in enumerate(ordered) if sp.process_type == t.name)
                types.append(ProcessType(t.name, t.amount, tuple(lines), members))
            if any(t.lines for t in p.process_types):
                for sp, resolved in zip(ordered, subprocesses):
                    for opt in resolved.options:
                        for a in opt.allocations:
                            if a.device not in allowed:
                                self.error(
                                    "IncompatibleDevice",
                                    f"subprocess {sp.name!r} allocates {self.devices[a.device].name!r}, "
                                    f"which is on none of the compatible production lines",
                                    sp.loc,
                                )

            compat = []
            for c in p.compatible_devices:
                dev = self._device_ref(c.device, c.loc, f"production process {p.name!r}")
                if dev is None:
                    continue
                mode = self._mode_ref(dev, c.mode, c.loc)
                if mode is None:
                    continue
                compat.append(CompatibleDevice(dev, mode, c.processing_time, c.energy, c.monetary))

            out.append(
                ProductionProcess(
                    name=p.name,
                    subprocesses=tuple(subprocesses),
                    priority=p.priority,
                    cuts=p.cuts,
                    process_types=tuple(types),
                    compatible_devices=tuple(compat),
                )
            )
        return tuple(out)

    def _relations(self, processes: tuple[ProductionProcess, ...]) -> tuple[SubprocessRelation, ...]:
        index = {sp.name: i for i, sp in enumerate(s for p in processes for s in p.subprocesses)}
        out = []
        for r in self.raw.relations:
            src = index.get(r.source)
            dst = index.get(r.destination)
            if src is None:
                self.error("DanglingReference", f"relation source {r.source!r} is not a subprocess", r.loc)
            if dst is None:
                self.error("DanglingReference", f"relation destination {r.destination!r} is not a subprocess", r.loc)
            if src is None or dst is None:
                continue
            if src == dst:
                self.error("SelfRelation", f"relation relates {r.source!r} to itself", r.loc)
                continue
            out.append(SubprocessRelation(src, dst, r.operator))
        order = list(AllenOperator)
        out.sort(key=lambda r: (r.source, r.destination, order.index(r.operator)))
        return tuple(out)

    def _setups(self, processes: tuple[ProductionProcess, ...]) -> tuple[SequenceDependentSetup, ...]:
        sp_index = {sp.name: i for i, sp in enumerate(s for p in processes for s in p.subprocesses)}
        proc_index = {p.name: i for i, p in enumerate(processes)}

        def ref(name: str, loc: Location, role: str) -> SetupRef | None:
            if name in sp_index:
                if name in proc_index:
                    self.warnings.append(
                        ModelError("AmbiguousReference", f"setup {role} {name!r} names both a process and a subprocess; using the subprocess", loc)
                    )
                return SetupRef(SetupScope.SUBPROCESS, sp_index[name])
            if name in proc_index:
                return SetupRef(SetupScope.PROCESS, proc_index[name])
            self.error("DanglingReference", f"setup {role} {name!r} is neither a process nor a subprocess", loc)
            return None

        out = []
        seen: set[tuple[SetupRef, SetupRef, int]] = set()
        for s in self.raw.setups:
            src = ref(s.source, s.loc, "source")
            dst = ref(s.destination, s.loc, "destination")
            dev = self._device_ref(s.device, s.loc, "sequence-dependent setup")
            if src is None or dst is None or dev is None:
                continue
            key = (src, dst, dev)
            if key in seen:
                self.error("DuplicateName", f"setup {s.source!r} -> {s.destination!r} on {s.device!r} declared twice", s.loc)
                continue
            seen.add(key)
            out.append(SequenceDependentSetup(src, dst, dev, s.extra_time, s.extra_energy, s.extra_monetary))
        return tuple(out)


def to_raw(model: FactoryModel) -> RawModel:
    """Turn a resolved model back into its name-based form (without locations)."""
    dev = model.devices
    subs = model.subprocesses

    def alloc(a: Allocation) -> RawAllocation:
        return RawAllocation(dev[a.device].name, dev[a.device].modes[a.mode].name)

    processes = []
    for p in model.processes:
        membership = {}
        for t in p.process_types:
            for i in t.subprocesses:
                membership[i] = t.name
        processes.append(
            RawProcess(
                name=p.name,
                priority=p.priority,
                cuts=p.cuts,
                process_types=[
                    RawProcessType(t.name, t.amount, [(model.lines[i].name, None) for i in t.lines])
                    for t in p.process_types
                ],
                compatible_devices=[
                    RawCompatibleDevice(dev[c.device].name, dev[c.device].modes[c.mode].name,
                                        c.processing_time, c.energy, c.monetary)
                    for c in p.compatible_devices
                ],
                subprocesses=[
                    RawSubprocess(
                        sp.name,
                        [RawOption([alloc(a) for a in o.allocations], o.processing_time, o.energy, o.monetary)
                         for o in sp.options],
                        membership.get(i),
                    )
                    for i, sp in enumerate(p.subprocesses)
                ],
            )
        )

    def setup_name(ref: SetupRef) -> str:
        if ref.scope is SetupScope.SUBPROCESS:
            return subs[ref.index].name
        return model.processes[ref.index].name

    return RawModel(
        objectives=[(k, None) for k in model.objectives],
        devices=[
            RawDevice(d.name, d.available, [(s, e, None) for s, e in d.unavailable],
                      [(m.name, None) for m in d.modes])
            for d in model.devices
        ],
        lines=[
            RawLine(line.name, [(i, dev[d].name, None) for i, d in enumerate(line.stations)])
            for line in model.lines
        ],
        processes=processes,
        relations=[RawRelation(subs[r.source].name, subs[r.destination].name, r.operator) for r in model.relations],
        setups=[
            RawSetup(setup_name(s.source), setup_name(s.destination), dev[s.device].name,
                     s.extra_time, s.extra_energy, s.extra_monetary)
            for s in model.setups
        ],
    )
