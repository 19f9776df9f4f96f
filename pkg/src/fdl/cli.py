"""Command-line entry point: ``fdl validate|schedule|optimize|fixtures``.

Exit codes: 0 success, 1 a problem with the model or genome, 2 I/O or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from fdl.errors import FdlError, InvalidGenome
from fdl.evaluator import configure
from fdl.export import gantt_svg, schedule_to_csv, schedule_to_json
from fdl.fixtures.generate import write_fixture
from fdl.model import FactoryModel
from fdl.optimizer import GaParams, front_to_csv, front_to_json, optimize
from fdl.parser import FdlParseError, parse_file, print_diagnostics
from fdl.scheduler import Genome, simulate

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


def _load(path: str):
    try:
        model, warnings = parse_file(path)
    except FdlParseError as exc:
        print_diagnostics(exc.diagnostics, path)
        raise
    print_diagnostics(warnings, path)
    return model


def load_genome(data: object, model: FactoryModel) -> Genome:
    """Build a genome from ``{"options": ..., "priorities": ...}``.

    Each field is a list in subprocess order or an object keyed by subprocess
    name. Missing priorities default to document order.
    """
    if not isinstance(data, dict):
        raise InvalidGenome("genome must be a JSON object")
    names = [sp.name for sp in model.subprocesses]

    def field(key: str, default: list[int] | None) -> list[int]:
        value = data.get(key)
        if value is None:
            if default is None:
                raise InvalidGenome(f"genome lacks {key!r}")
            return default
        if isinstance(value, dict):
            unknown = set(value) - set(names)
            if unknown:
                raise InvalidGenome(f"unknown subprocesses in {key!r}: {sorted(unknown)}")
            missing = [n for n in names if n not in value]
            if missing:
                raise InvalidGenome(f"{key!r} lacks subprocesses: {missing}")
            value = [value[n] for n in names]
        if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise InvalidGenome(f"{key!r} must be a list of integers")
        return value

    options = field("options", [0] * len(names) if not names else None)
    priorities = field("priorities", list(range(len(names))))
    genome = Genome(tuple(options), tuple(priorities))
    genome.validate([len(sp.options) for sp in model.subprocesses])
    return genome


def _print_objectives(formatted: dict[str, str]) -> None:
    for name, value in formatted.items():
        print(f"{name}: {value}")


def cmd_validate(args: argparse.Namespace) -> int:
    model = _load(args.file)
    print(f"{args.file}: ok ({len(model.processes)} processes, {len(model.subprocesses)} subprocesses, "
          f"{len(model.devices)} devices)")
    return EXIT_OK


def cmd_schedule(args: argparse.Namespace) -> int:
    model = _load(args.file)
    with open(args.genome, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidGenome(f"genome file is not valid JSON: {exc}") from None
    schedule = simulate(model, load_genome(data, model))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "schedule.json").write_text(schedule_to_json(schedule, model), encoding="utf-8")
    (out / "schedule.csv").write_text(schedule_to_csv(schedule, model), encoding="utf-8")
    if args.svg:
        (out / "schedule.svg").write_text(gantt_svg(schedule, model), encoding="utf-8")
    _print_objectives(schedule.objectives.formatted())
    print(f"feasible: {'yes' if schedule.feasible else 'no'}")
    for _, message in schedule.violations:
        print(f"violation: {message}", file=sys.stderr)
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    model = _load(args.file)
    configure(model)
    params = GaParams(population_size=args.pop, generations=args.gen, seed=args.seed)
    front = optimize(model, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "front.csv").write_text(front_to_csv(front, model), encoding="utf-8")
    (out / "front.json").write_text(front_to_json(front, model), encoding="utf-8")
    schedules = out / "schedules"
    schedules.mkdir(exist_ok=True)
    for k, (genome, _) in enumerate(front.entries, start=1):
        schedule = simulate(model, genome)
        (schedules / f"entry_{k:03d}.json").write_text(schedule_to_json(schedule, model), encoding="utf-8")
        (schedules / f"entry_{k:03d}.csv").write_text(schedule_to_csv(schedule, model), encoding="utf-8")
    print(f"front: {len(front)} entries")
    for _, ev in front.entries:
        print("  " + "  ".join(f"{k}={v}" for k, v in ev.objectives.formatted().items())
              + ("" if ev.feasible else f"  (infeasible, {ev.violation_count} violations)"))
    return EXIT_OK


def cmd_fixtures(args: argparse.Namespace) -> int:
    path = write_fixture(args.kind, args.out)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdl", description="Factory Description Language toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and check a document")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("schedule", help="build the schedule of one genome")
    p.add_argument("file")
    p.add_argument("--genome", required=True, help="JSON file with options and priorities")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--svg", action="store_true", help="also write a Gantt chart")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("optimize", help="search for Pareto-optimal plans")
    p.add_argument("file")
    p.add_argument("--pop", type=int, default=50)
    p.add_argument("--gen", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("fixtures", help="write a reference factory")
    p.add_argument("--kind", required=True, choices=["discrete", "process"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FdlParseError:
        return EXIT_DOMAIN
    except ValueError as exc:
        # invalid parameters such as an odd population size
        print(f"fdl: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN if isinstance(exc, FdlError) else EXIT_IO
    except FdlError as exc:
        print(f"fdl: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"fdl: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
