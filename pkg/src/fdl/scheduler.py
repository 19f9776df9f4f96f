"""Deterministic list scheduling of a genome onto device timelines.

Subprocesses linked by M relations form *chains* that run back to back with
no gap (no-wait). Chains are dispatched one at a time, highest-priority head
first among those whose LT predecessors are placed, each at its earliest
feasible start after everything already on its devices. A chain is shifted
right as a whole to dodge unavailable windows; a single-subprocess chain is
instead split around windows (suspend and resume).

A sequence-dependent setup is inserted on a device directly before a
subprocess whenever the device's previous occupant and the subprocess match a
setup entry. Setups are never applied between members of the same chain,
because M leaves no room for them.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

from fdl.errors import CyclicRelation, InvalidGenome, ResolutionError, Unscheduled
from fdl.fixedpoint import format_tenths
from fdl.model import AllenOperator, FactoryModel, ObjectiveKind, SubprocessRelation, merge_windows


class SegmentKind(Enum):
    EXECUTION = "execution"
    SETUP = "setup"
    SUSPENSION = "suspension"


@dataclass(frozen=True)
class Segment:
    kind: SegmentKind
    device: int
    start: int
    end: int
    subprocess: int
    # the previous occupant, for setup segments
    predecessor: int | None = None


@dataclass(frozen=True)
class Genome:
    """Option index and unique priority (lower runs first) per subprocess."""

    options: tuple[int, ...]
    priorities: tuple[int, ...]

    def validate(self, cardinalities: Sequence[int]) -> None:
        n = len(cardinalities)
        if len(self.options) != n or len(self.priorities) != n:
            raise InvalidGenome(f"genome must have {n} option choices and {n} priorities")
        for i, (choice, card) in enumerate(zip(self.options, cardinalities)):
            if not 0 <= choice < card:
                raise InvalidGenome(f"option {choice} out of range for subprocess {i} ({card} options)")
        if sorted(self.priorities) != list(range(n)):
            raise InvalidGenome("priorities must be a permutation of 0..N-1")


@dataclass(frozen=True)
class ObjectiveVector:
    kinds: tuple[ObjectiveKind, ...]
    values: tuple[int, ...]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def get(self, kind: ObjectiveKind) -> int:
        return self.values[self.kinds.index(kind)]

    def formatted(self) -> dict[str, str]:
        return {k.value: format_tenths(v) for k, v in zip(self.kinds, self.values)}


@dataclass(frozen=True)
class SetupEvent:
    predecessor: int
    successor: int
    device: int
    setup: int


@dataclass
class Schedule:
    genome: Genome
    per_device: tuple[tuple[Segment, ...], ...]
    # (start, end) per subprocess, None when it could not be scheduled
    intervals: tuple[tuple[int, int] | None, ...]
    setups: tuple[SetupEvent, ...]
    violations: list[tuple[SubprocessRelation | None, str]] = field(default_factory=list)
    objectives: ObjectiveVector | None = None

    @property
    def feasible(self) -> bool:
        return not self.violations

    def segments_of(self, subprocess: int) -> list[Segment]:
        return [s for segs in self.per_device for s in segs if s.subprocess == subprocess]


def build_task_chains(model: FactoryModel) -> tuple[tuple[int, ...], ...]:
    """Ordered M-chains of subprocess indices (chains of one included)."""
    try:
        return model.chains.chains
    except ResolutionError as exc:
        raise CyclicRelation(str(exc)) from None


def check_allen(relation: SubprocessRelation, schedule: Schedule) -> bool:
    a = schedule.intervals[relation.source]
    b = schedule.intervals[relation.destination]
    if a is None:
        raise Unscheduled(f"subprocess {relation.source} was not scheduled")
    if b is None:
        raise Unscheduled(f"subprocess {relation.destination} was not scheduled")
    return allen_holds(relation.operator, a, b)


def allen_holds(op: AllenOperator, a: tuple[int, int], b: tuple[int, int]) -> bool:
    (s1, e1), (s2, e2) = a, b
    if op is AllenOperator.LT:
        return e1 < s2
    if op is AllenOperator.M:
        return e1 == s2
    if op is AllenOperator.O:
        return s1 < s2 < e1 < e2
    if op is AllenOperator.S:
        return s1 == s2 and e1 < e2
    if op is AllenOperator.D:
        return s2 < s1 and e1 < e2
    if op is AllenOperator.F:
        return e1 == e2 and s2 < s1
    return s1 == s2 and e1 == e2


def simulate(model: FactoryModel, genome: Genome) -> Schedule:
    """Build the schedule ``genome`` induces on ``model``; a pure function."""
    subs = model.subprocesses
    genome.validate([len(sp.options) for sp in subs])
    return _Simulation(model, genome).run()


class _Simulation:
    def __init__(self, model: FactoryModel, genome: Genome):
        self.model = model
        self.genome = genome
        subs = model.subprocesses
        self.opts = [sp.options[c] for sp, c in zip(subs, genome.options)]
        self.structure = model.chains
        nd = len(model.devices)
        self.windows = [d.unavailable for d in model.devices]
        self.free = [0] * nd
        self.last = [-1] * nd
        self.segments: list[list[Segment]] = [[] for _ in range(nd)]
        self.start: list[int | None] = [None] * len(subs)
        self.end: list[int | None] = [None] * len(subs)
        self.setup_events: list[SetupEvent] = []
        self.violations: list[tuple[SubprocessRelation | None, str]] = []
        self.table = model.setup_table

    def run(self) -> Schedule:
        st = self.structure
        prio = self.genome.priorities
        indegree = list(st.indegree)
        heap = [(prio[chain[0]], c) for c, chain in enumerate(st.chains) if indegree[c] == 0]
        heapq.heapify(heap)
        while heap:
            _, c = heapq.heappop(heap)
            self.place(c)
            for succ in st.successors[c]:
                indegree[succ] -= 1
                if indegree[succ] == 0:
                    heapq.heappush(heap, (prio[st.chains[succ][0]], succ))
        return self.finish()

    def setup_for(self, device: int, subprocess: int) -> int | None:
        prev = self.last[device]
        if prev < 0 or self.structure.chain_of[prev] == self.structure.chain_of[subprocess]:
            return None
        return self.table.get((prev, subprocess, device))

    def release(self, members: Sequence[int], offsets: Sequence[int]) -> int:
        t = 0
        for m, off in zip(members, offsets):
            for p in self.structure.lt_preds[m]:
                e = self.end[p]
                if e is not None:
                    t = max(t, e + 1 - off)
        return t

    def place(self, c: int) -> None:
        members = self.structure.chains[c]
        devices = self.model.devices
        blocked = [
            m for m in members
            if any(not devices[a.device].available for a in self.opts[m].allocations)
        ]
        if blocked:
            names = self.model.subprocesses
            for m in members:
                self.violations.append((None, f"{names[m].name!r} not scheduled: its chain uses an unavailable device"))
            return
        if len(members) == 1:
            self.place_single(members[0])
        else:
            self.place_chain(members)

    def place_chain(self, members: Sequence[int]) -> None:
        offsets, off = [], 0
        for m in members:
            offsets.append(off)
            off += self.opts[m].duration
        t = self.release(members, offsets)

        # (device, setup index, relative setup start, relative start, relative end, member)
        needs: list[tuple[int, int | None, int, int, int, int]] = []
        seen: set[int] = set()
        setups = self.model.setups
        for m, off in zip(members, offsets):
            p = self.opts[m].duration
            for a in self.opts[m].allocations:
                d = a.device
                k = None
                lo = off
                if d not in seen:
                    seen.add(d)
                    k = self.setup_for(d, m)
                    if k is not None:
                        lo = off - (setups[k].extra_time or 0)
                    t = max(t, self.free[d] - lo, -lo)
                needs.append((d, k, lo, off, off + p, m))

        t = self._dodge(t, [(d, lo, hi) for d, _, lo, _, hi, _ in needs])

        for m, off in zip(members, offsets):
            self.start[m] = t + off
            self.end[m] = t + off + self.opts[m].duration
        for d, k, lo, off, hi, m in needs:
            if k is not None:
                self._record_setup(d, k, m, t + lo, t + off)
            if hi > off:
                self.segments[d].append(Segment(SegmentKind.EXECUTION, d, t + off, t + hi, m))
            self.free[d] = max(self.free[d], t + hi)
            self.last[d] = m

    def _dodge(self, t: int, spans: Sequence[tuple[int, int, int]]) -> int:
        """Smallest start >= t at which no relative span hits a window of its device."""
        windows = self.windows
        moved = True
        while moved:
            moved = False
            for d, lo, hi in spans:
                if hi <= lo:
                    continue
                for ws, we in windows[d]:
                    if ws >= t + hi:
                        break
                    if we > t + lo:
                        t = we - lo
                        moved = True
        return t

    def place_single(self, m: int) -> None:
        opt = self.opts[m]
        p = opt.duration
        setups = self.model.setups
        pending = []
        t = self.release((m,), (0,))
        for a in opt.allocations:
            d = a.device
            k = self.setup_for(d, m)
            s = (setups[k].extra_time or 0) if k is not None else 0
            pending.append((d, k, s))
            t = max(t, self.free[d] + s, s)

        windows = self.windows
        moved = True
        while moved:
            moved = False
            for d, _, s in pending:
                for ws, we in windows[d]:
                    if ws > t:
                        break
                    if p > 0 and ws <= t < we:
                        t = we
                        moved = True
                    elif s and ws < t and we > t - s:
                        t = we + s
                        moved = True

        union = merge_windows(w for d, _, _ in pending for w in windows[d])
        cursor, remaining = t, p
        pieces = []
        for ws, we in union:
            if remaining == 0:
                break
            if we <= cursor:
                continue
            if ws >= cursor + remaining:
                break
            pieces.append((cursor, ws))
            remaining -= ws - cursor
            cursor = we
        if remaining:
            pieces.append((cursor, cursor + remaining))
        end = pieces[-1][1] if pieces else t

        self.start[m], self.end[m] = t, end
        for d, k, s in pending:
            if k is not None:
                self._record_setup(d, k, m, t - s, t)
            for a, b in pieces:
                self.segments[d].append(Segment(SegmentKind.EXECUTION, d, a, b, m))
            for ws, we in windows[d]:
                if ws >= t and we <= end and ws < end:
                    self.segments[d].append(Segment(SegmentKind.SUSPENSION, d, ws, we, m))
            self.free[d] = max(self.free[d], end)
            self.last[d] = m

    def _record_setup(self, d: int, k: int, m: int, start: int, end: int) -> None:
        prev = self.last[d]
        self.setup_events.append(SetupEvent(prev, m, d, k))
        if end > start:
            self.segments[d].append(Segment(SegmentKind.SETUP, d, start, end, m, prev))

    def finish(self) -> Schedule:
        model = self.model
        intervals = tuple(
            None if s is None else (s, e) for s, e in zip(self.start, self.end)
        )
        names = model.subprocesses
        for r in model.relations:
            a, b = intervals[r.source], intervals[r.destination]
            if a is None or b is None:
                self.violations.append((r, "relation involves an unscheduled subprocess"))
            elif not allen_holds(r.operator, a, b):
                self.violations.append(
                    (r, f"{names[r.source].name!r} {r.operator.value} {names[r.destination].name!r} does not hold")
                )
        order = {SegmentKind.SETUP: 0, SegmentKind.EXECUTION: 1, SegmentKind.SUSPENSION: 2}
        schedule = Schedule(
            genome=self.genome,
            per_device=tuple(
                tuple(sorted(segs, key=lambda s: (s.start, order[s.kind]))) for segs in self.segments
            ),
            intervals=intervals,
            setups=tuple(self.setup_events),
            violations=self.violations,
        )
        schedule.objectives = compute_objectives(schedule, model)
        return schedule


def compute_objectives(schedule: Schedule, model: FactoryModel) -> ObjectiveVector:
    """Objective vector of ``schedule``, ordered as ``model.objectives``.

    Makespan is the latest end of any execution or setup segment, measured
    from time 0. Energy and monetary cost sum the chosen options of every
    scheduled subprocess plus the extras of every triggered setup.
    """
    makespan = max(
        (s.end for segs in schedule.per_device for s in segs if s.kind is not SegmentKind.SUSPENSION),
        default=0,
    )
    energy = monetary = 0
    for sp, choice, interval in zip(model.subprocesses, schedule.genome.options, schedule.intervals):
        if interval is not None:
            opt = sp.options[choice]
            energy += opt.energy or 0
            monetary += opt.monetary or 0
    for ev in schedule.setups:
        setup = model.setups[ev.setup]
        energy += setup.extra_energy or 0
        monetary += setup.extra_monetary or 0
    values = {
        ObjectiveKind.MAKESPAN: makespan,
        ObjectiveKind.ENERGY: energy,
        ObjectiveKind.MONETARY: monetary,
    }
    return ObjectiveVector(model.objectives, tuple(values[k] for k in model.objectives))
