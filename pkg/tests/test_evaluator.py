from __future__ import annotations

import dataclasses
import itertools
import pickle
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import build
from randmodels import random_genome, random_model
from fdl.errors import MismatchedObjectives, NoObjectives, TooLarge
from fdl.evaluator import (
    DecisionSpace,
    Evaluation,
    ParetoFront,
    brute_force,
    configure,
    constrained_dominates,
    evaluate_many,
    head_order_key,
    pareto_front,
    worker_count,
)
from fdl.model import ObjectiveKind
from fdl.scheduler import Genome, ObjectiveVector

MAKESPAN, ENERGY, MONETARY = ObjectiveKind.MAKESPAN, ObjectiveKind.ENERGY, ObjectiveKind.MONETARY


def ev(*values: int, feasible: bool = True, violations: int = 0) -> Evaluation:
    kinds = (MAKESPAN, ENERGY, MONETARY)[: len(values)]
    return Evaluation(ObjectiveVector(kinds, values), feasible, violations)


def test_two_objectives(listing):
    model, _ = listing("wedm_devices.fdl")
    space, _ = configure(model)
    assert space.kinds == (MAKESPAN, MONETARY)


def test_three_objectives(listing):
    model, _ = listing("template.fdl")
    space, evaluator = configure(model)
    assert len(space.kinds) == 3
    genome = Genome((0,) * space.n, tuple(range(space.n)))
    assert len(evaluator(genome).values) == 3


def test_single_p15_cut_space(listing):
    model, _ = listing("wedm_p15.fdl")
    space, _ = configure(model)
    assert space.cardinalities == (4, 4, 4)
    first = model.subprocesses[0]
    devices = [model.devices[opt.devices[0]].name for opt in first.options]
    single = build([("P15", "cut", [(d, opt.processing_time) for d, opt in zip(devices, first.options)])],
                   devices=devices)
    space, _ = configure(single)
    assert space.n == 1
    assert space.cardinalities == (4,)
    assert space.size() == 4


def test_no_objectives():
    model = dataclasses.replace(build([("p", "a", [("A", 1)])]), objectives=())
    with pytest.raises(NoObjectives):
        configure(model)


def test_space_validates_genomes():
    space = DecisionSpace((2, 3), (MAKESPAN,))
    space.validate(Genome((1, 2), (1, 0)))
    assert space.size() == 2 * 3 * 2


# --- constrained dominance ---------------------------------------------------


def test_feasible_beats_infeasible_regardless_of_values():
    assert constrained_dominates(ev(100, 100), ev(1, 1, feasible=False, violations=1))
    assert not constrained_dominates(ev(1, 1, feasible=False, violations=1), ev(100, 100))


def test_fewer_violations_win_among_infeasible():
    assert constrained_dominates(ev(9, 9, feasible=False, violations=1), ev(1, 1, feasible=False, violations=2))


def test_pareto_among_feasible():
    assert constrained_dominates(ev(1, 2), ev(2, 2))
    assert not constrained_dominates(ev(1, 2), ev(2, 1))
    assert not constrained_dominates(ev(1, 1), ev(1, 1))


def test_mismatched_lengths():
    with pytest.raises(MismatchedObjectives):
        constrained_dominates(ev(1, 2), ev(1, 2, 3))


def test_front_keeps_one_entry_per_vector():
    g = Genome((0,), (0,))
    front = pareto_front([(g, ev(1, 2)), (g, ev(1, 2)), (g, ev(2, 1)), (g, ev(3, 3))])
    assert sorted(front.vectors()) == [(1, 2), (2, 1)]


# --- brute force -------------------------------------------------------------


def test_single_option_front():
    model = build([("p", "a", [("A", 10, 1, 1)])])
    front = brute_force(model)
    assert front.vectors() == {(10, 1, 1)}


def test_shared_device_makespan_is_order_independent():
    model = build([("p", "a", [("A", 100)]), ("q", "b", [("A", 200)])], objectives=(MAKESPAN,))
    _, evaluator = configure(model)
    for prio in itertools.permutations(range(2)):
        assert evaluator(Genome((0, 0), prio)).values == (300,)
    assert brute_force(model).vectors() == {(300,)}


def test_two_incomparable_options():
    model = build([("p", "a", [("A", 10, 0, 5), ("A", 5, 0, 10)])], objectives=(MAKESPAN, MONETARY))
    assert brute_force(model).vectors() == {(10, 5), (5, 10)}


def test_too_large():
    jobs = [(f"p{i}", f"s{i}", [("A", 10), ("A", 20)]) for i in range(5)]
    model = build(jobs)
    with pytest.raises(TooLarge):
        brute_force(model, cap=1000)
    assert len(brute_force(model, cap=2**5 * 120)) >= 1


def naive_front(model) -> set[tuple[int, ...]]:
    """Every genome evaluated, then the non-dominated vectors among the best feasibility class."""
    space, evaluator = configure(model)
    evals = [
        evaluator(Genome(options, perm))
        for options in itertools.product(*(range(c) for c in space.cardinalities))
        for perm in itertools.permutations(range(space.n))
    ]
    best = min((not e.feasible, e.violation_count) for e in evals)
    pool = {e.values for e in evals if (not e.feasible, e.violation_count) == best}
    return {v for v in pool if not any(w != v and all(x <= y for x, y in zip(w, v)) for w in pool)}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_brute_force_matches_naive_enumeration(seed):
    rng = random.Random(seed)
    model = random_model(rng, max_processes=3, max_subprocesses=2, max_devices=2, max_options=2)
    space, _ = configure(model)
    if space.size() > 2000:
        return
    assert brute_force(model).vectors() == naive_front(model)


def test_head_order_key_ignores_non_head_priorities(listing):
    model, _ = listing("wedm_setups.fdl")
    n = len(model.subprocesses)
    a = Genome((0,) * n, tuple(range(n)))
    # swap the priorities of the two non-head members of the first chain
    prio = list(range(n))
    prio[1], prio[2] = prio[2], prio[1]
    b = Genome((0,) * n, tuple(prio))
    assert head_order_key(model, a) == head_order_key(model, b)
    assert configure(model)[1](a) == configure(model)[1](b)


# --- evaluator properties ----------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_evaluation_is_pure(seed):
    rng = random.Random(seed)
    model = random_model(rng)
    _, evaluator = configure(model)
    genome = random_genome(rng, model)
    assert evaluator(genome) == evaluator(genome)
    assert pickle.loads(pickle.dumps(evaluator))(genome) == evaluator(genome)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_objective_projection(seed):
    rng = random.Random(seed)
    model = random_model(rng)
    genome = random_genome(rng, model)
    full = dataclasses.replace(model, objectives=(MAKESPAN, ENERGY, MONETARY))
    values = dict(zip(full.objectives, configure(full)[1](genome).values))
    for kinds in [(MAKESPAN,), (MONETARY,), (MAKESPAN, MONETARY), (MONETARY, MAKESPAN)]:
        sub = dataclasses.replace(model, objectives=kinds)
        assert configure(sub)[1](genome).values == tuple(values[k] for k in kinds)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("FDL_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("FDL_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.delenv("FDL_THREADS")
    assert worker_count() >= 1
    monkeypatch.setenv("FDL_THREADS", "lots")
    assert worker_count() >= 1


def test_parallel_evaluation_matches_serial(listing):
    model, _ = listing("wedm_setups.fdl")
    _, evaluator = configure(model)
    rng = random.Random(9)
    genomes = [random_genome(rng, model) for _ in range(40)]
    serial = evaluate_many(evaluator, genomes, workers=1)
    assert evaluate_many(evaluator, genomes, workers=2) == serial
    assert serial == [evaluator(g) for g in genomes]


def test_offer_drops_dominated_entries():
    front = ParetoFront()
    g = Genome((), ())
    assert front.offer(g, ev(5, 5))
    assert not front.offer(g, ev(6, 6))
    assert front.offer(g, ev(4, 4))
    assert front.vectors() == {(4, 4)}
    assert not front.offer(g, ev(1, 1, feasible=False, violations=1))
