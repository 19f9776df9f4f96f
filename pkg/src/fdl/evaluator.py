"""Decision space and fitness evaluation derived from a factory model.

``configure`` turns a resolved model into the search problem: how many
subprocesses there are, how many options each has, and which objectives to
minimise, plus a callable mapping a genome to its evaluation. ``brute_force``
enumerates small problems exhaustively and serves as the optimizer's oracle.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from fdl.errors import MismatchedObjectives, NoObjectives, TooLarge
from fdl.model import FactoryModel, ObjectiveKind, dominates
from fdl.scheduler import Genome, ObjectiveVector, simulate


@dataclass(frozen=True)
class DecisionSpace:
    cardinalities: tuple[int, ...]
    kinds: tuple[ObjectiveKind, ...]

    @property
    def n(self) -> int:
        return len(self.cardinalities)

    def validate(self, genome: Genome) -> None:
        genome.validate(self.cardinalities)

    def size(self) -> int:
        """Number of distinct genomes: every option combination times every permutation."""
        return math.prod(self.cardinalities) * math.factorial(self.n)


@dataclass(frozen=True)
class Evaluation:
    objectives: ObjectiveVector
    feasible: bool
    violation_count: int

    @property
    def values(self) -> tuple[int, ...]:
        return self.objectives.values


def constrained_dominates(a: Evaluation, b: Evaluation) -> bool:
    """Feasible beats infeasible, fewer violations beats more, then Pareto dominance."""
    if a.feasible != b.feasible:
        return a.feasible
    if a.violation_count != b.violation_count:
        return a.violation_count < b.violation_count
    if len(a.values) != len(b.values):
        raise MismatchedObjectives("evaluations have different objective counts")
    return dominates(a.values, b.values)


class Evaluator:
    """Genome to Evaluation through the scheduler. Pure and picklable."""

    def __init__(self, model: FactoryModel):
        self.model = model

    def __call__(self, genome: Genome) -> Evaluation:
        schedule = simulate(self.model, genome)
        return Evaluation(schedule.objectives, schedule.feasible, len(schedule.violations))


def configure(model: FactoryModel) -> tuple[DecisionSpace, Evaluator]:
    if not model.objectives:
        raise NoObjectives("the model declares no objectives")
    space = DecisionSpace(tuple(len(sp.options) for sp in model.subprocesses), model.objectives)
    return space, Evaluator(model)


def worker_count() -> int:
    """Evaluation workers allowed by FDL_THREADS (unset or 0 means one per CPU)."""
    raw = os.environ.get("FDL_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


_worker_evaluator: Evaluator | None = None


def _init_worker(model: FactoryModel) -> None:
    global _worker_evaluator
    _worker_evaluator = Evaluator(model)


def _evaluate_in_worker(genome: Genome) -> Evaluation:
    assert _worker_evaluator is not None
    return _worker_evaluator(genome)


def make_pool(model: FactoryModel, workers: int) -> ProcessPoolExecutor:
    """A process pool whose workers each hold an evaluator for ``model``."""
    return ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(model,))


def evaluate_many(
    evaluator: Evaluator,
    genomes: Sequence[Genome],
    workers: int | None = None,
    pool: ProcessPoolExecutor | None = None,
) -> list[Evaluation]:
    """Evaluate ``genomes`` in order, fanning out to processes when allowed.

    Results are returned in input order, so they never depend on the worker
    count. A caller evaluating many batches can pass a ``pool`` from
    ``make_pool`` to avoid starting processes per batch.
    """
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(genomes) < 2 * workers:
        return [evaluator(g) for g in genomes]
    chunk = max(1, len(genomes) // (workers * 4))
    if pool is not None:
        return list(pool.map(_evaluate_in_worker, genomes, chunksize=chunk))
    with make_pool(evaluator.model, workers) as own:
        return list(own.map(_evaluate_in_worker, genomes, chunksize=chunk))


@dataclass
class ParetoFront:
    """Mutually non-dominated (genome, evaluation) pairs, one per objective vector."""

    entries: list[tuple[Genome, Evaluation]] = field(default_factory=list)

    def vectors(self) -> set[tuple[int, ...]]:
        return {e.values for _, e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def offer(self, genome: Genome, evaluation: Evaluation) -> bool:
        """Insert unless dominated or already present; drop entries it dominates."""
        for _, other in self.entries:
            if other.values == evaluation.values and other.feasible == evaluation.feasible:
                if other.violation_count <= evaluation.violation_count:
                    return False
            if constrained_dominates(other, evaluation):
                return False
        self.entries = [
            (g, e) for g, e in self.entries
            if not constrained_dominates(evaluation, e) and e.values != evaluation.values
        ]
        self.entries.append((genome, evaluation))
        return True

    def sorted(self) -> ParetoFront:
        return ParetoFront(sorted(self.entries, key=lambda ge: (not ge[1].feasible, ge[1].violation_count, ge[1].values)))


def pareto_front(pairs: Iterable[tuple[Genome, Evaluation]]) -> ParetoFront:
    front = ParetoFront()
    for genome, evaluation in pairs:
        front.offer(genome, evaluation)
    return front.sorted()


def head_order_key(model: FactoryModel, genome: Genome) -> tuple:
    """Everything the schedule depends on: options and the relative order of chain heads."""
    heads = [chain[0] for chain in model.chains.chains]
    heads.sort(key=lambda h: genome.priorities[h])
    return genome.options, tuple(heads)


def brute_force(model: FactoryModel, cap: int = 10_000) -> ParetoFront:
    """Exact front by enumerating every genome; refuses spaces larger than ``cap``."""
    space, evaluator = configure(model)
    if space.size() > cap:
        raise TooLarge(f"decision space has {space.size()} genomes, cap is {cap}")
    seen: set = set()
    pairs = []
    n = space.n
    for options in itertools.product(*(range(c) for c in space.cardinalities)):
        for perm in itertools.permutations(range(n)):
            genome = Genome(options, perm)
            key = head_order_key(model, genome)
            if key in seen:
                continue
            seen.add(key)
            pairs.append((genome, evaluator(genome)))
    return pareto_front(pairs)
