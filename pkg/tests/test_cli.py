from __future__ import annotations

import csv
import json

import pytest

from fdl.cli import load_genome, main
from fdl.errors import InvalidGenome
from fdl.fixtures.generate import listing_path
from fdl.parser import parse_file

EMPTY = """<fdl>
<objectives><objective name="makespan"/></objectives>
<processingDevices><processingDevice name="A"/></processingDevices>
<productionProcesses/>
</fdl>
"""


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_genome(tmp_path, data) -> str:
    path = tmp_path / "genome.json"
    path.write_text(json.dumps(data))
    return str(path)


# --- validate ----------------------------------------------------------------


def test_validate_template(capsys):
    code, out, _ = run(capsys, "validate", str(listing_path("template.fdl")))
    assert code == 0
    assert "ok" in out


def test_validate_missing_line_name(tmp_path, capsys):
    text = listing_path("template.fdl").read_text().replace('<productionLine name="ProductionLine1">',
                                                            "<productionLine>")
    path = tmp_path / "broken.fdl"
    path.write_text(text)
    code, _, err = run(capsys, "validate", str(path))
    assert code == 1
    assert "MissingAttribute" in err


def test_validate_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "validate", str(tmp_path / "nope.fdl"))
    assert code == 2
    assert err


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


# --- schedule ----------------------------------------------------------------


def test_schedule_p15_on_large_1(tmp_path, capsys):
    genome = write_genome(tmp_path, {"options": [0, 0, 0]})
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "schedule", str(listing_path("wedm_p15.fdl")), "--genome", genome,
                       "--out", str(out_dir), "--svg")
    assert code == 0
    assert "makespan: 1650.0" in out.splitlines()
    assert "monetary: 1395.0" in out.splitlines()
    doc = json.loads((out_dir / "schedule.json").read_text())
    rects = (out_dir / "schedule.svg").read_text().count("<rect ")
    assert rects == len(doc["segments"]) == 3
    rows = list(csv.reader((out_dir / "schedule.csv").open()))
    assert rows[1] == ["Large 1", "execution", "P15 cut 1", "0.0", "550.0"]


def test_schedule_with_named_genome(tmp_path, capsys):
    genome = write_genome(tmp_path, {
        "options": {"P15 cut 1": 1, "P15 cut 2": 1, "P15 cut 3": 1},
        "priorities": {"P15 cut 1": 2, "P15 cut 2": 1, "P15 cut 3": 0},
    })
    code, out, _ = run(capsys, "schedule", str(listing_path("wedm_p15.fdl")), "--genome", genome,
                       "--out", str(tmp_path))
    assert code == 0
    assert "makespan: 1602.0" in out.splitlines()


def test_schedule_empty_model(tmp_path, capsys):
    model = tmp_path / "empty.fdl"
    model.write_text(EMPTY)
    genome = write_genome(tmp_path, {"options": [], "priorities": []})
    code, out, _ = run(capsys, "schedule", str(model), "--genome", genome, "--out", str(tmp_path))
    assert code == 0
    assert "makespan: 0.0" in out.splitlines()
    assert json.loads((tmp_path / "schedule.json").read_text())["segments"] == []
    assert (tmp_path / "schedule.csv").read_text() == "device,kind,name,start,end\n"


@pytest.mark.parametrize("data", [
    {"options": [4, 0, 0]},
    {"options": [0, 0]},
    {"options": [0, 0, 0], "priorities": [0, 0, 1]},
    {"options": {"P15 cut 9": 0}},
    [0, 0, 0],
])
def test_schedule_bad_genome(tmp_path, capsys, data):
    genome = write_genome(tmp_path, data)
    code, _, err = run(capsys, "schedule", str(listing_path("wedm_p15.fdl")), "--genome", genome,
                       "--out", str(tmp_path))
    assert code == 1
    assert "error" in err


def test_schedule_genome_not_json(tmp_path, capsys):
    path = tmp_path / "genome.json"
    path.write_text("{nope")
    code, _, _ = run(capsys, "schedule", str(listing_path("wedm_p15.fdl")), "--genome", str(path))
    assert code == 1


def test_load_genome_defaults_priorities(listing):
    model, _ = listing("wedm_p15.fdl")
    genome = load_genome({"options": [3, 2, 1]}, model)
    assert genome.priorities == (0, 1, 2)
    with pytest.raises(InvalidGenome):
        load_genome({"options": [True, 0, 0]}, model)


# --- optimize ----------------------------------------------------------------


def test_optimize_writes_front_and_schedules(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FDL_THREADS", "1")
    out_dir = tmp_path / "run"
    code, out, _ = run(capsys, "optimize", str(listing_path("wedm_setups.fdl")), "--pop", "10",
                       "--gen", "3", "--seed", "42", "--out", str(out_dir))
    assert code == 0
    rows = list(csv.reader((out_dir / "front.csv").open()))
    assert rows[0][:2] == ["makespan", "monetary"]
    entries = len(rows) - 1
    assert entries >= 1
    assert len(json.loads((out_dir / "front.json").read_text())["front"]) == entries
    assert len(list((out_dir / "schedules").glob("entry_*.json"))) == entries
    assert f"front: {entries} entries" in out


def test_optimize_is_repeatable(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FDL_THREADS", "1")
    fronts = []
    for name in ("a", "b"):
        run(capsys, "optimize", str(listing_path("wedm_setups.fdl")), "--pop", "10", "--gen", "3",
            "--seed", "42", "--out", str(tmp_path / name))
        fronts.append((tmp_path / name / "front.csv").read_bytes())
    assert fronts[0] == fronts[1]


def test_optimize_odd_population(tmp_path, capsys):
    code, _, err = run(capsys, "optimize", str(listing_path("wedm_p15.fdl")), "--pop", "5",
                       "--out", str(tmp_path))
    assert code == 2
    assert "even" in err


# --- fixtures ----------------------------------------------------------------


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    assert main(["fixtures", "--kind", "discrete", "--out", str(out)]) == 0
    assert main(["fixtures", "--kind", "process", "--out", str(out)]) == 0
    return {name: parse_file(str(out / name))[0] for name in ("wedm.fdl", "paint.fdl")}, out


def test_generated_fixtures_validate(generated, capsys):
    _, out = generated
    for name in ("wedm.fdl", "paint.fdl"):
        code, _, _ = run(capsys, "validate", str(out / name))
        assert code == 0


def test_discrete_fixture_part_one(generated):
    model = generated[0]["wedm.fdl"]
    assert len(model.devices) == 12
    assert len(model.processes) == 20
    assert len(model.setups) == 12
    (cut,) = model.processes[0].subprocesses
    small_1 = model.device_index["Small 1"]
    opt = next(o for o in cut.options if o.devices == (small_1,))
    assert (opt.processing_time, opt.monetary) == (28335, 1921)
    assert model.devices[small_1].unavailable == ((500, 1000), (2500, 3000))


def _task_2(model, paint: str, line: str):
    proc = model.processes[model.process_index[paint]]
    ptype = next(t for t in proc.process_types if model.line_index[line] in t.lines)
    task = next(proc.subprocesses[i] for i in ptype.subprocesses if "Task 2" in proc.subprocesses[i].name)
    return ptype, task


@pytest.mark.parametrize("paint,lines,amount,minutes", [
    ("Std Blue", ("P6", "P7"), 80, 80),
    ("Super White", ("P8", "P9"), 120, 45),
    ("Std White", ("P1", "P5"), 50, 60),
])
def test_process_fixture_recipes(generated, paint, lines, amount, minutes):
    model = generated[0]["paint.fdl"]
    for line in lines:
        ptype, task = _task_2(model, paint, line)
        assert ptype.amount == amount
        standard = [o for o in task.options
                    if model.devices[o.allocations[0].device].modes[o.allocations[0].mode].name == "Standard"]
        assert {o.processing_time for o in standard} == {minutes * 10}


def test_process_fixture_shape(generated):
    model = generated[0]["paint.fdl"]
    assert len(model.lines) == 9
    assert [p.name for p in model.processes] == ["Std White", "Super White", "Std Blue", "Std Green"]
    for device in model.devices:
        assert [m.name for m in device.modes] == ["Economy", "Standard", "Power"]


def test_fixtures_bad_kind(tmp_path):
    with pytest.raises(SystemExit):
        main(["fixtures", "--kind", "chemical", "--out", str(tmp_path)])
