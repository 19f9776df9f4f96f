"""Canonical (nested-element) FDL output."""

from __future__ import annotations

import xml.etree.ElementTree as ET

from fdl.errors import NoObjectives
from fdl.fixedpoint import format_quantity, format_tenths
from fdl.model import DeviceOption, FactoryModel, SetupRef, SetupScope


def _costs(parent: ET.Element, option: DeviceOption) -> None:
    for tag, value in (
        ("processingTime", option.processing_time),
        ("energyConsumption", option.energy),
        ("monetaryCost", option.monetary),
    ):
        if value is not None:
            ET.SubElement(parent, tag).text = format_tenths(value)


def serialize_fdl(model: FactoryModel) -> bytes:
    """Emit ``model`` as a canonical FDL document (UTF-8).

    Synthetic ``default`` modes are written out explicitly, and expanded
    cuts are written as ordinary subprocesses.
    """
    if not model.objectives:
        raise NoObjectives("a model without objectives cannot be written")
    devices = model.devices
    subs = model.subprocesses
    root = ET.Element("fdl")

    objectives = ET.SubElement(root, "objectives")
    for kind in model.objectives:
        ET.SubElement(objectives, "objective", name=kind.value)

    if devices:
        section = ET.SubElement(root, "processingDevices")
        for d in devices:
            el = ET.SubElement(section, "processingDevice", name=d.name, availability="1" if d.available else "0")
            modes = ET.SubElement(el, "modes")
            for m in d.modes:
                ET.SubElement(modes, "mode", name=m.name)
            if d.unavailable:
                windows = ET.SubElement(el, "unavailableTimes")
                for start, end in d.unavailable:
                    ET.SubElement(windows, "unavailableTime").text = f"{format_tenths(start)},{format_tenths(end)}"

    if model.lines:
        section = ET.SubElement(root, "productionLines")
        for line in model.lines:
            el = ET.SubElement(section, "productionLine", name=line.name)
            stations = ET.SubElement(el, "productionLineProcessingDevices")
            for order, dev in enumerate(line.stations):
                ET.SubElement(stations, "productionLineProcessingDevice", order=str(order), name=devices[dev].name)

    by_source: dict[int, list] = {}
    for r in model.relations:
        by_source.setdefault(model.owner[r.source], []).append(r)

    if model.processes:
        section = ET.SubElement(root, "productionProcesses")
        for pi, p in enumerate(model.processes):
            attrs = {"name": p.name}
            if p.priority is not None:
                attrs["priority"] = str(p.priority)
            if p.cuts is not None:
                attrs["cuts"] = str(p.cuts)
            el = ET.SubElement(section, "productionProcess", attrs)

            if p.compatible_devices:
                compat = ET.SubElement(el, "compatibleDevices")
                for c in p.compatible_devices:
                    dev = devices[c.device]
                    attrs = {"name": dev.name, "mode": dev.modes[c.mode].name}
                    for key, value in (("processingTime", c.processing_time),
                                       ("energyConsumption", c.energy),
                                       ("monetaryCost", c.monetary)):
                        if value is not None:
                            attrs[key] = format_tenths(value)
                    ET.SubElement(compat, "compatibleDevice", attrs)

            nested: set[int] = set()
            for t in p.process_types:
                tel = ET.SubElement(el, "processType", name=t.name, amountProduced=format_quantity(t.amount))
                lines = ET.SubElement(tel, "compatibleProductionLines")
                for li in t.lines:
                    ET.SubElement(lines, "compatibleProductionLine").text = model.lines[li].name
                if t.subprocesses:
                    container = ET.SubElement(tel, "subprocesses")
                    for i in t.subprocesses:
                        _subprocess(container, p.subprocesses[i], model)
                    nested.update(t.subprocesses)

            rest = [sp for i, sp in enumerate(p.subprocesses) if i not in nested]
            if rest:
                container = ET.SubElement(el, "subprocesses")
                for sp in rest:
                    _subprocess(container, sp, model)

            if pi in by_source:
                rels = ET.SubElement(el, "subprocessRelations")
                for r in by_source[pi]:
                    ET.SubElement(rels, "subprocessRelation", source=subs[r.source].name,
                                  destination=subs[r.destination].name, allensOperator=r.operator.value)

    if model.setups:
        section = ET.SubElement(root, "sequenceDependentSetups")

        def name(ref: SetupRef) -> str:
            if ref.scope is SetupScope.SUBPROCESS:
                return subs[ref.index].name
            return model.processes[ref.index].name

        for s in model.setups:
            el = ET.SubElement(section, "sequenceDependentSetup", source=name(s.source),
                               destination=name(s.destination), processingDevice=devices[s.device].name)
            for tag, value in (("extraProcessingTime", s.extra_time),
                               ("extraEnergyConsumption", s.extra_energy),
                               ("extraMonetaryCost", s.extra_monetary)):
                if value is not None:
                    ET.SubElement(el, tag).text = format_tenths(value)

    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"


def _subprocess(container: ET.Element, sp, model: FactoryModel) -> None:
    el = ET.SubElement(container, "subprocess", name=sp.name)
    options = ET.SubElement(el, "subprocessProcessingDevices")
    for opt in sp.options:
        if len(opt.allocations) == 1:
            a = opt.allocations[0]
            dev = model.devices[a.device]
            single = ET.SubElement(options, "subprocessProcessingDevice", processingDeviceName=dev.name)
            mode = ET.SubElement(single, "subprocessProcessingDeviceMode", modeName=dev.modes[a.mode].name)
            _costs(mode, opt)
        else:
            group = ET.SubElement(options, "subprocessProcessingDevicesGroup")
            _costs(group, opt)
            for a in opt.allocations:
                dev = model.devices[a.device]
                ET.SubElement(group, "subprocessProcessingDevice", processingDeviceName=dev.name,
                              modeName=dev.modes[a.mode].name)
