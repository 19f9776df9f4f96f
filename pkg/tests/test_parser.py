from __future__ import annotations

import re
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdl.fixtures.generate import LISTINGS, listing_path
from fdl.model import AllenOperator, ObjectiveKind, SetupScope
from fdl.parser import (
    DialectProfile,
    FdlParseError,
    Severity,
    detect_dialect,
    parse_fdl,
    print_diagnostics,
    read_tree,
)

HEADER = "<fdl><objectives><objective name='makespan'/></objectives>"


def doc(body: str) -> str:
    return HEADER + body + "</fdl>"


def errors_of(text: str) -> list:
    with pytest.raises(FdlParseError) as info:
        parse_fdl(text)
    errs = [d for d in info.value.diagnostics if d.severity is Severity.ERROR]
    assert errs
    return errs


def test_template_listing(listing):
    model, diags = listing("template.fdl")
    assert not [d for d in diags if d.severity is Severity.ERROR]
    assert model.objectives == (ObjectiveKind.MAKESPAN, ObjectiveKind.ENERGY, ObjectiveKind.MONETARY)
    device1 = model.devices[model.device_index["device1"]]
    assert [m.name for m in device1.modes] == ["mode1", "mode2", "mode3"]
    line = model.lines[0]
    assert [model.devices[d].name for d in line.stations] == ["device1", "device2", "device3"]
    task = model.subprocesses[model.subprocess_index["production1Task1"]]
    assert [o.processing_time for o in task.options] == [125, 80]
    assert len(model.relations) == 4
    assert all(r.operator is AllenOperator.M for r in model.relations)
    (setup,) = model.setups
    assert setup.source.scope is SetupScope.SUBPROCESS
    assert (setup.extra_time, setup.extra_energy, setup.extra_monetary) == (30, 15, 250)


def test_device_listing(listing):
    model, diags = listing("wedm_devices.fdl")
    assert diags == []
    assert model.objectives == (ObjectiveKind.MAKESPAN, ObjectiveKind.MONETARY)
    by_name = {d.name: d for d in model.devices}
    assert by_name["Small 1"].unavailable == ((500, 1000), (2500, 3000))
    assert by_name["Small 2"].unavailable == ((0, 200),)
    assert by_name["Small 3"].available is False
    assert by_name["Small 1"].available is True


def test_p15_listing(listing):
    model, diags = listing("wedm_p15.fdl")
    assert [d.code for d in diags] == ["CutCountMismatch"]
    assert [sp.name for sp in model.subprocesses] == ["P15 cut 1", "P15 cut 2", "P15 cut 3"]
    for sp in model.subprocesses:
        assert len(sp.options) == 4
    large1 = model.subprocesses[0].options[0]
    assert (large1.processing_time, large1.energy, large1.monetary) == (5500, 120, 4650)
    p15 = model.processes[0]
    assert p15.priority == 15 and p15.cuts == 10
    assert [c.processing_time for c in p15.compatible_devices] == [55050, 53410, 74210, 62050]


def test_setup_listing(listing):
    model, _ = listing("wedm_setups.fdl")
    assert len(model.setups) == 12
    assert {model.processes[s.source.index].name for s in model.setups} == {"P1"}
    assert {model.processes[s.destination.index].name for s in model.setups} == {"P2"}
    assert {s.extra_monetary for s in model.setups} == {10000}
    assert len({s.device for s in model.setups}) == 12
    chains = model.chains.chains
    names = [[model.subprocesses[i].name for i in c] for c in chains]
    assert ["P1 cut 0", "P1 cut 1", "P1 cut 2"] in names


def test_paint_listing(listing):
    model, diags = listing("paint_lines.fdl")
    assert {d.code for d in diags} == {"ModeAlias"}
    assert all(d.severity is Severity.WARNING for d in diags)
    assert [line.name for line in model.lines] == ["ProductionLine 1", "ProductionLine 2", "ProductionLine 3"]
    (ptype,) = model.processes[0].process_types
    assert ptype.amount == 50 and len(ptype.lines) == 3
    task1 = model.subprocesses[model.subprocess_index["Std Weiss A Task 1"]]
    assert [len(o.allocations) for o in task1.options] == [2, 2, 2]
    mixer = model.devices[model.device_index["Mixer 1"]]
    modes = [mixer.modes[o.allocations[1].mode].name for o in task1.options]
    assert modes == ["Economy", "Standard", "Power"]
    task3 = model.subprocesses[model.subprocess_index["Std Weiss A Task 3"]]
    assert mixer.modes[task3.options[2].allocations[0].mode].name == "Power"


@pytest.mark.parametrize("name", LISTINGS)
def test_listings_have_no_errors(listing, name):
    _, diags = listing(name)
    assert all(d.severity is Severity.WARNING for d in diags)


def test_case_variants_and_misspellings():
    text = doc(
        "<processingDevices><processingDevice name='M'/></processingDevices>"
        "<productionProcesses><productionProcess name='P' cuts='2'>"
        "<comptiableDevices><comptiableDevice name='M' processingTime='10' montary='4'/></comptiableDevices>"
        "</productionProcess>"
        "<productionProcess name='Q'><SUBPROCESSES><subProcess name='q'>"
        "<subProcessProcessingDevice name='M' processingTime='1.5' energy='2'/>"
        "</subProcess></SUBPROCESSES></productionProcess></productionProcesses>"
    )
    model, diags = parse_fdl(text)
    assert diags == []
    assert [sp.name for sp in model.subprocesses] == ["P cut 1", "P cut 2", "q"]
    assert model.subprocesses[0].options[0].monetary == 20
    assert model.subprocesses[2].options[0].processing_time == 15
    assert model.subprocesses[2].options[0].energy == 20


def test_cut_expansion_relations():
    text = doc(
        "<processingDevices><processingDevice name='M'/></processingDevices>"
        "<productionProcesses><productionProcess name='P' cuts='3'>"
        "<compatibleDevices><compatibleDevice name='M' processingTime='10'/></compatibleDevices>"
        "</productionProcess></productionProcesses>"
    )
    model, _ = parse_fdl(text)
    assert [o.options[0].processing_time for o in model.subprocesses] == [33, 33, 34]
    assert [(r.source, r.destination, r.operator) for r in model.relations] == [
        (0, 1, AllenOperator.M), (1, 2, AllenOperator.M)]


def test_line_order_starting_at_one_or_zero():
    devices = "<processingDevices><processingDevice name='a'/><processingDevice name='b'/></processingDevices>"
    for base in (0, 1):
        text = doc(
            devices + "<productionLines><productionLine name='L'><productionLineProcessingDevices>"
            f"<productionLineProcessingDevice order='{base + 1}' name='b'/>"
            f"<productionLineProcessingDevice order='{base}' name='a'/>"
            "</productionLineProcessingDevices></productionLine></productionLines>"
        )
        model, _ = parse_fdl(text)
        assert model.lines[0].stations == (0, 1)


def test_window_attribute_form():
    text = doc(
        "<processingDevices><processingDevice name='a'><unavailableTimes>"
        "<unavailableTime start='5' end='7.5'/></unavailableTimes></processingDevice></processingDevices>"
    )
    model, _ = parse_fdl(text)
    assert model.devices[0].unavailable == ((50, 75),)


def test_production_line_without_name():
    text = doc(
        "<processingDevices><processingDevice name='a'/></processingDevices>"
        "<productionLines><productionLine><productionLineProcessingDevices>"
        "<productionLineProcessingDevice order='0' name='a'/>"
        "</productionLineProcessingDevices></productionLine></productionLines>"
    )
    (err,) = errors_of(text)
    assert err.code == "MissingAttribute"
    assert err.location == (1, text.index("<productionLine>") + 1)


def test_xml_syntax_error_has_location():
    (err,) = errors_of("<fdl>\n  <objectives>\n</fdl>")
    assert err.code == "XmlSyntax"
    assert err.location[0] == 3


def test_unknown_element_is_a_warning():
    text = doc("<gizmos><gizmo/></gizmos>")
    model, diags = parse_fdl(text)
    assert [(d.code, d.severity) for d in diags] == [("UnknownElement", Severity.WARNING)]
    assert model.objectives == (ObjectiveKind.MAKESPAN,)


def test_unknown_attribute_is_a_warning():
    _, diags = parse_fdl(doc("<processingDevices><processingDevice name='a' colour='red'/></processingDevices>"))
    assert [d.code for d in diags] == ["UnknownAttribute"]


@pytest.mark.parametrize(
    "body,code",
    [
        ("<processingDevices><processingDevice name='a'><unavailableTimes>"
         "<unavailableTime>1,x</unavailableTime></unavailableTimes></processingDevice></processingDevices>", "BadNumber"),
        ("<processingDevices><processingDevice name='a'/></processingDevices><productionProcesses>"
         "<productionProcess name='P'><subprocesses><subprocess name='s'>"
         "<subProcessProcessingDevice name='a' processingTime='1.25'/></subprocess></subprocesses>"
         "</productionProcess></productionProcesses>", "BadNumber"),
        ("<subprocessRelations><subprocessRelation source='x' destination='y' allensOperator='BEFORE'/>"
         "</subprocessRelations>", "BadOperator"),
        ("<productionProcesses><productionProcess name='P'><subprocesses><subprocess name='s'>"
         "<subProcessProcessingDevice name='ghost' processingTime='1'/></subprocess></subprocesses>"
         "</productionProcess></productionProcesses>", "DanglingReference"),
    ],
)
def test_error_codes(body, code):
    assert code in [e.code for e in errors_of(doc(body))]


def test_unknown_objective():
    codes = [e.code for e in errors_of("<fdl><objectives><objective name='speed'/></objectives></fdl>")]
    assert "UnknownObjective" in codes


def test_resolution_errors_carry_locations():
    text = doc(
        "\n<processingDevices><processingDevice name='a'/></processingDevices>"
        "\n<subprocessRelations>\n<subprocessRelation source='x' destination='y' allensOperator='LT'/>"
        "</subprocessRelations>"
    )
    errs = errors_of(text)
    assert {e.code for e in errs} == {"DanglingReference"}
    assert all(e.location[0] == 4 for e in errs)


def test_diagnostic_rendering(capsys):
    with pytest.raises(FdlParseError) as info:
        parse_fdl("<fdl><objectives>")
    import sys

    print_diagnostics(info.value.diagnostics, "broken.fdl", sys.stderr)
    line = capsys.readouterr().err.strip()
    assert re.fullmatch(r"broken\.fdl:\d+:\d+: error\[XmlSyntax\]: .+", line)


def test_dialect_detection():
    canonical = read_tree(
        b"<subprocess name='s'><subprocessProcessingDevices><subprocessProcessingDevice processingDeviceName='a'>"
        b"<subprocessProcessingDeviceMode modeName='m'><processingTime>1</processingTime>"
        b"</subprocessProcessingDeviceMode></subprocessProcessingDevice></subprocessProcessingDevices></subprocess>"
    )
    discrete = read_tree(b"<subProcess name='s'><subProcessProcessingDevice name='a' processingTime='1'/></subProcess>")
    process = read_tree(
        b"<subprocess name='s'><subprocessProcessingDevicesGroup processingTime='1'>"
        b"<subprocessProcessingDevice name='a' mode='m'/></subprocessProcessingDevicesGroup></subprocess>"
    )
    assert detect_dialect(canonical) is DialectProfile.CANONICAL
    assert detect_dialect(discrete) is DialectProfile.DISCRETE
    assert detect_dialect(process) is DialectProfile.PROCESS
    mixed = read_tree(
        b"<subprocesses><subProcess name='s'><subProcessProcessingDevice name='a' processingTime='1'/></subProcess>"
        b"<subprocess name='t'><subprocessProcessingDevicesGroup processingTime='1'>"
        b"<subprocessProcessingDevice name='a' mode='m'/></subprocessProcessingDevicesGroup></subprocess></subprocesses>"
    )
    assert detect_dialect(mixed) is DialectProfile.MIXED


def _referenced(model) -> dict[tuple, bool]:
    """Which declarations (kind, name[, mode]) are referenced elsewhere in ``model``."""
    used: set[tuple] = set()
    for sp in model.subprocesses:
        for opt in sp.options:
            for a in opt.allocations:
                dev = model.devices[a.device]
                used.add(("processingdevice", dev.name))
                used.add(("mode", dev.name, dev.modes[a.mode].name))
    for line in model.lines:
        used.update(("processingdevice", model.devices[d].name) for d in line.stations)
    for p in model.processes:
        for t in p.process_types:
            used.update(("productionline", model.lines[i].name) for i in t.lines)
    for r in model.relations:
        used.add(("subprocess", model.subprocesses[r.source].name))
        used.add(("subprocess", model.subprocesses[r.destination].name))
    for s in model.setups:
        used.add(("processingdevice", model.devices[s.device].name))
        for ref in (s.source, s.destination):
            if ref.scope is SetupScope.SUBPROCESS:
                used.add(("subprocess", model.subprocesses[ref.index].name))
            else:
                used.add(("productionprocess", model.processes[ref.index].name))
    return used


def _declarations(root: ET.Element):
    """Yield (key, element) for every naming element, with modes keyed by their device."""
    for el in root.iter():
        tag = el.tag.lower()
        if tag in ("processingdevice", "productionline", "subprocess", "productionprocess") and "name" in el.attrib:
            yield (tag, el.attrib["name"].strip()), el
            if tag == "processingdevice":
                for mode in el.iter():
                    if mode.tag.lower() == "mode":
                        yield ("mode", el.attrib["name"].strip(), mode.attrib["name"].strip()), mode


@pytest.mark.parametrize("name", LISTINGS)
def test_deleting_a_referenced_name_is_always_an_error(listing, name):
    model, _ = listing(name)
    used = _referenced(model)
    text = listing_path(name).read_bytes()
    count = 0
    for index in range(len(list(_declarations(ET.fromstring(text))))):
        root = ET.fromstring(text)
        key, el = list(_declarations(root))[index]
        if key not in used:
            continue
        count += 1
        el.attrib["name"] = "__gone__"
        with pytest.raises(FdlParseError) as info:
            parse_fdl(ET.tostring(root))
        assert any(d.severity is Severity.ERROR for d in info.value.diagnostics), key
    if name != "wedm_devices.fdl":
        assert count > 0


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=200))
def test_arbitrary_bytes_never_crash(data):
    try:
        parse_fdl(data)
    except FdlParseError as exc:
        assert all(d.location is not None for d in exc.diagnostics)


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="<>/= 'abcdefgprocesstionlyuDvM", max_size=120))
def test_arbitrary_markup_never_crashes(text):
    try:
        parse_fdl(doc(text))
    except FdlParseError as exc:
        assert any(d.severity is Severity.ERROR for d in exc.diagnostics)
