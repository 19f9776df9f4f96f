"""Seeded NSGA-II search over genomes.

An individual is the per-subprocess option choice plus a priority
permutation, kept internally as the list of subprocesses in dispatch order
so order crossover and adjacent swaps stay closed over permutations. Every
evaluation also feeds an external archive of non-dominated results, which is
what ``optimize`` returns.

All random draws for a generation happen before its offspring are
evaluated, so the outcome does not depend on how many workers evaluate.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from fdl.evaluator import (
    Evaluation,
    Evaluator,
    ParetoFront,
    configure,
    constrained_dominates,
    evaluate_many,
    head_order_key,
    make_pool,
    worker_count,
)
from fdl.model import FactoryModel, dominates
from fdl.fixedpoint import format_tenths
from fdl.scheduler import Genome


@dataclass(frozen=True)
class GaParams:
    population_size: int = 50
    generations: int = 100
    crossover_rate: float = 0.9
    # None means 1/N for N subprocesses
    mutation_rate: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2 or self.population_size % 2:
            raise ValueError("population size must be even and at least 2")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover rate must lie in [0, 1]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation rate must lie in [0, 1]")


def _dominance(items: Sequence) -> Callable[[int, int], bool]:
    if items and isinstance(items[0], Evaluation):
        return lambda i, j: constrained_dominates(items[i], items[j])
    vectors = [tuple(v) for v in items]
    return lambda i, j: dominates(vectors[i], vectors[j])


def nondominated_sort(items: Sequence) -> list[list[int]]:
    """Indices of ``items`` grouped into successive non-dominated fronts.

    Items are either Evaluations (constrained dominance) or plain vectors.
    """
    n = len(items)
    dom = _dominance(items)
    beats: list[list[int]] = [[] for _ in range(n)]
    beaten_by = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dom(i, j):
                beats[i].append(j)
                beaten_by[j] += 1
            elif dom(j, i):
                beats[j].append(i)
                beaten_by[i] += 1
    fronts = []
    current = [i for i in range(n) if beaten_by[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in beats[i]:
                beaten_by[j] -= 1
                if beaten_by[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
    return fronts


def crowding_distance(vectors: Sequence[Sequence[int]]) -> list[float]:
    n = len(vectors)
    if n <= 2:
        return [math.inf] * n
    dist = [0.0] * n
    for k in range(len(vectors[0])):
        order = sorted(range(n), key=lambda i: vectors[i][k])
        lo, hi = vectors[order[0]][k], vectors[order[-1]][k]
        dist[order[0]] = dist[order[-1]] = math.inf
        if hi == lo:
            continue
        for a, b, c in zip(order, order[1:], order[2:]):
            dist[b] += (vectors[c][k] - vectors[a][k]) / (hi - lo)
    return dist


def hypervolume(points: Sequence[Sequence[float]], reference: Sequence[float]) -> float:
    """Exact volume dominated by ``points`` and bounded by ``reference`` (minimisation)."""
    pts = [tuple(p) for p in points if all(x < r for x, r in zip(p, reference))]
    return _hv(sorted(set(pts)), tuple(reference))


def _hv(points: list[tuple[float, ...]], ref: tuple[float, ...]) -> float:
    if not points:
        return 0.0
    if len(ref) == 1:
        return ref[0] - min(p[0] for p in points)
    # slice along the last objective
    points = sorted(points, key=lambda p: p[-1])
    volume = 0.0
    for i, p in enumerate(points):
        upper = points[i + 1][-1] if i + 1 < len(points) else ref[-1]
        if upper > p[-1]:
            volume += _hv([q[:-1] for q in points[: i + 1]], ref[:-1]) * (upper - p[-1])
    return volume


@dataclass
class GenerationReport:
    generation: int
    population: list[tuple[Genome, Evaluation]]
    archive: ParetoFront
    reference: tuple[float, ...]

    def hypervolume(self) -> float:
        return hypervolume([e.values for _, e in self.archive.entries if e.feasible], self.reference)


class _Search:
    def __init__(self, model: FactoryModel, params: GaParams, evaluator: Evaluator, workers: int | None):
        self.model = model
        self.params = params
        self.evaluator = evaluator
        self.workers = workers
        self.rng = random.Random(params.seed)
        self.cards = [len(sp.options) for sp in model.subprocesses]
        self.n = len(self.cards)
        self.mutation = params.mutation_rate if params.mutation_rate is not None else 1.0 / max(1, self.n)
        self.pool = None
        self.cache: dict[tuple, Evaluation] = {}
        self.archive = ParetoFront()

    def genome(self, options: Sequence[int], order: Sequence[int]) -> Genome:
        priorities = [0] * self.n
        for rank, sp in enumerate(order):
            priorities[sp] = rank
        return Genome(tuple(options), tuple(priorities))

    def greedy(self) -> tuple[list[int], list[int]]:
        model = self.model
        subs = model.subprocesses
        options = [
            min(range(len(sp.options)), key=lambda i, sp=sp: (sp.options[i].duration, i)) for sp in subs
        ]

        def urgency(i: int) -> tuple:
            p = model.processes[model.owner[i]].priority
            return (p is None, p if p is not None else 0, model.owner[i], i)

        return options, sorted(range(self.n), key=urgency)

    def random_individual(self) -> tuple[list[int], list[int]]:
        options = [self.rng.randrange(c) for c in self.cards]
        order = list(range(self.n))
        self.rng.shuffle(order)
        return options, order

    def key(self, ind: tuple[list[int], list[int]]) -> tuple:
        return head_order_key(self.model, self.genome(*ind))

    def evaluate(self, individuals: list[tuple[list[int], list[int]]]) -> list[tuple[Genome, Evaluation]]:
        genomes = [self.genome(*ind) for ind in individuals]
        keys = [head_order_key(self.model, g) for g in genomes]
        todo: dict[tuple, Genome] = {}
        for k, g in zip(keys, genomes):
            if k not in self.cache and k not in todo:
                todo[k] = g
        results = evaluate_many(self.evaluator, list(todo.values()), self.workers, self.pool)
        for (k, g), ev in zip(todo.items(), results):
            self.cache[k] = ev
            self.archive.offer(g, ev)
        return [(g, self.cache[k]) for g, k in zip(genomes, keys)]

    def tournament(self, rank: list[int], crowd: list[float]) -> int:
        a = self.rng.randrange(len(rank))
        b = self.rng.randrange(len(rank))
        if (rank[a], -crowd[a]) <= (rank[b], -crowd[b]):
            return a
        return b

    def crossover(self, p1, p2):
        rng = self.rng
        o1, o2 = list(p1[0]), list(p2[0])
        for i in range(self.n):
            if rng.random() < 0.5:
                o1[i], o2[i] = o2[i], o1[i]
        return (o1, self._ox(p1[1], p2[1])), (o2, self._ox(p2[1], p1[1]))

    def _ox(self, a: list[int], b: list[int]) -> list[int]:
        """Order crossover: keep a slice of ``a``, fill the rest in ``b``'s order."""
        n = self.n
        if n < 2:
            return list(a)
        i, j = sorted(self.rng.sample(range(n + 1), 2))
        kept = set(a[i:j])
        rest = [x for x in b if x not in kept]
        return rest[:i] + a[i:j] + rest[i:]

    def mutate(self, ind):
        rng = self.rng
        options, order = list(ind[0]), list(ind[1])
        for i in range(self.n):
            if self.cards[i] > 1 and rng.random() < self.mutation:
                choice = rng.randrange(self.cards[i] - 1)
                options[i] = choice + (choice >= options[i])
        for k in range(self.n - 1):
            if rng.random() < self.mutation:
                order[k], order[k + 1] = order[k + 1], order[k]
        return options, order

    def ranks(self, evals: list[Evaluation]) -> tuple[list[int], list[float], list[list[int]]]:
        fronts = nondominated_sort(evals)
        rank = [0] * len(evals)
        crowd = [0.0] * len(evals)
        for r, front in enumerate(fronts):
            dist = crowding_distance([evals[i].values for i in front])
            for i, d in zip(front, dist):
                rank[i] = r
                crowd[i] = d
        return rank, crowd, fronts

    def run(self, on_generation: Callable[[GenerationReport], None] | None) -> ParetoFront:
        size = self.params.population_size
        population = [self.greedy()] + [self.random_individual() for _ in range(size - 1)]
        evaluated = self.evaluate(population)
        reference = tuple(
            1.1 * max(e.values[k] for _, e in evaluated) for k in range(len(self.model.objectives))
        )
        if on_generation:
            on_generation(GenerationReport(0, evaluated, self.archive.sorted(), reference))

        for gen in range(1, self.params.generations + 1):
            evals = [e for _, e in evaluated]
            rank, crowd, _ = self.ranks(evals)
            seen = {self.key(ind) for ind in population}
            offspring: list = []
            while len(offspring) < size:
                p1 = population[self.tournament(rank, crowd)]
                p2 = population[self.tournament(rank, crowd)]
                if self.rng.random() < self.params.crossover_rate:
                    c1, c2 = self.crossover(p1, p2)
                else:
                    c1, c2 = (list(p1[0]), list(p1[1])), (list(p2[0]), list(p2[1]))
                for child in (c1, c2):
                    child = self.mutate(child)
                    # a few extra mutations to avoid re-evaluating a known genome
                    for _ in range(3):
                        if self.key(child) not in seen and self.key(child) not in self.cache:
                            break
                        child = self.mutate(child)
                    seen.add(self.key(child))
                    offspring.append(child)

            combined = population + offspring[:size]
            combined_eval = evaluated + self.evaluate(offspring[:size])
            rank, crowd, fronts = self.ranks([e for _, e in combined_eval])
            chosen: list[int] = []
            for front in fronts:
                if len(chosen) + len(front) <= size:
                    chosen.extend(front)
                else:
                    by_crowd = sorted(front, key=lambda i: (-crowd[i], i))
                    chosen.extend(by_crowd[: size - len(chosen)])
                    break
            population = [combined[i] for i in chosen]
            evaluated = [combined_eval[i] for i in chosen]
            if on_generation:
                on_generation(GenerationReport(gen, evaluated, self.archive.sorted(), reference))
        return self.archive.sorted()


def optimize(
    model: FactoryModel,
    params: GaParams | None = None,
    on_generation: Callable[[GenerationReport], None] | None = None,
    workers: int | None = None,
) -> ParetoFront:
    """Run NSGA-II on ``model`` and return the archive of non-dominated results.

    ``workers`` overrides FDL_THREADS for evaluation fan-out; the result is
    the same for any value.
    """
    params = params or GaParams()
    _, evaluator = configure(model)
    workers = worker_count() if workers is None else workers
    search = _Search(model, params, evaluator, workers)
    if workers <= 1:
        return search.run(on_generation)
    with make_pool(model, workers) as pool:
        search.pool = pool
        return search.run(on_generation)


def _front_rows(front: ParetoFront, model: FactoryModel) -> tuple[list[str], list[list[str]]]:
    header = [k.value for k in model.objectives] + ["feasible", "violations", "options", "priorities"]
    rows = []
    for genome, ev in front.entries:
        rows.append(
            [format_tenths(v) for v in ev.values]
            + [
                "1" if ev.feasible else "0",
                str(ev.violation_count),
                " ".join(map(str, genome.options)),
                " ".join(map(str, genome.priorities)),
            ]
        )
    return header, rows


def front_to_csv(front: ParetoFront, model: FactoryModel) -> str:
    header, rows = _front_rows(front, model)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def front_to_json(front: ParetoFront, model: FactoryModel) -> str:
    entries = []
    for genome, ev in front.entries:
        entries.append({
            "objectives": ev.objectives.formatted(),
            "feasible": ev.feasible,
            "violations": ev.violation_count,
            "genome": {"options": list(genome.options), "priorities": list(genome.priorities)},
        })
    return json.dumps({"objectives": [k.value for k in model.objectives], "front": entries}, indent=2) + "\n"
