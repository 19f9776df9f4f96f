"""FDL document parsing.

Both document dialects are accepted and may be mixed freely:

* the nested-element style, where costs are child elements
  (``<processingTime>550.0</processingTime>``) and each
  ``subprocessProcessingDevice`` holds ``subprocessProcessingDeviceMode``
  children;
* the attribute style of the discrete listings
  (``<subProcessProcessingDevice name="Large 1" processingTime="550"/>``,
  ``<comptiableDevices>``, ``cuts="10"``);
* the group style of the process listings
  (``<subprocessProcessingDevicesGroup processingTime="15">``).

Element and attribute names are matched case-insensitively; the misspellings
used in the reference listings are accepted as aliases.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, TextIO
from xml.parsers import expat

from fdl.errors import FdlError, Location, ModelError, NoCompatibleDevices, ResolutionError
from fdl.expand import expand_cuts
from fdl.fixedpoint import parse_quantity, parse_tenths
from fdl.model import (
    AllenOperator,
    FactoryModel,
    ObjectiveKind,
    RawAllocation,
    RawCompatibleDevice,
    RawDevice,
    RawLine,
    RawModel,
    RawOption,
    RawProcess,
    RawProcessType,
    RawRelation,
    RawSetup,
    RawSubprocess,
    resolve,
)


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    location: tuple[int, int]

    def render(self, filename: str = "<input>") -> str:
        line, col = self.location
        return f"{filename}:{line}:{col}: {self.severity.value}[{self.code}]: {self.message}"


class FdlParseError(FdlError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.severity is Severity.ERROR]
        super().__init__("; ".join(f"{d.code}: {d.message}" for d in errors))


class DialectProfile(Enum):
    CANONICAL = "canonical"
    DISCRETE = "discrete"
    PROCESS = "process"
    MIXED = "mixed"


_ELEMENT_ALIASES = {
    "comptiabledevices": "compatibledevices",
    "comptiabledevice": "compatibledevice",
    "comptiableproductionlines": "compatibleproductionlines",
    "comptiableproductionline": "compatibleproductionline",
    "subprocessprocessingdevicesmode": "subprocessprocessingdevicemode",
}

_ATTRIBUTE_ALIASES = {
    "montary": "monetarycost",
    "monetary": "monetarycost",
    "energy": "energyconsumption",
    "modename": "mode",
    "operator": "allensoperator",
    "extratime": "extraprocessingtime",
}

# typos in the reference listings, keyed by lower-cased spelling
_MODE_ALIASES = {"ecomony": "Economy"}

_ROOTS = {"fdl", "factory", "factorydescription", "factorymodel"}


@dataclass
class Node:
    tag: str
    key: str
    attrs: dict[str, tuple[str, str]]  # normalised name -> (original name, value)
    children: list[Node]
    text: str
    location: tuple[int, int]

    def attr(self, name: str) -> str | None:
        item = self.attrs.get(name)
        return None if item is None else item[1]


def _key(name: str, aliases: dict[str, str]) -> str:
    k = name.strip().lower()
    return aliases.get(k, k)


def read_tree(data: bytes) -> Node:
    """Parse XML into ``Node``s carrying 1-based line/column locations."""
    parser = expat.ParserCreate("UTF-8")
    stack: list[Node] = []
    root: list[Node] = []

    def start(tag: str, attrs: dict[str, str]) -> None:
        loc = (parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        node = Node(tag, _key(tag, _ELEMENT_ALIASES),
                    {_key(k, _ATTRIBUTE_ALIASES): (k, v) for k, v in attrs.items()}, [], "", loc)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(tag: str) -> None:
        stack.pop()

    def chars(text: str) -> None:
        if stack:
            stack[-1].text += text

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    parser.Parse(data, True)
    return root[0]


class _Builder:
    """Walks the node tree and fills a ``RawModel``, collecting diagnostics."""

    def __init__(self) -> None:
        self.raw = RawModel()
        self.diagnostics: list[Diagnostic] = []

    # -- diagnostics helpers --

    def error(self, code: str, message: str, loc: tuple[int, int]) -> None:
        self.diagnostics.append(Diagnostic(Severity.ERROR, code, message, loc))

    def warn(self, code: str, message: str, loc: tuple[int, int]) -> None:
        self.diagnostics.append(Diagnostic(Severity.WARNING, code, message, loc))

    def check_attrs(self, node: Node, allowed: Iterable[str]) -> None:
        allowed = set(allowed)
        for key, (original, _) in node.attrs.items():
            if key not in allowed:
                self.warn("UnknownAttribute", f"attribute {original!r} on <{node.tag}> is ignored", node.location)

    def unknown(self, node: Node) -> None:
        self.warn("UnknownElement", f"element <{node.tag}> is not part of FDL here and is skipped", node.location)

    def required(self, node: Node, name: str) -> str | None:
        value = node.attr(name)
        if value is None or not value.strip():
            self.error("MissingAttribute", f"<{node.tag}> requires attribute {name!r}", node.location)
            return None
        return value.strip()

    def tenths(self, text: str, node: Node, what: str) -> int | None:
        try:
            return parse_tenths(text)
        except ValueError:
            self.error("BadNumber", f"{what} {text.strip()!r} on <{node.tag}> is not a decimal with at most one fractional digit", node.location)
            return None

    def integer(self, text: str, node: Node, what: str) -> int | None:
        try:
            return int(text.strip())
        except ValueError:
            self.error("BadNumber", f"{what} {text.strip()!r} on <{node.tag}> is not an integer", node.location)
            return None

    def costs(self, node: Node, names: dict[str, str]) -> tuple[dict[str, int | None], set[str]]:
        """Read cost values given as attributes or as child elements.

        ``names`` maps normalised names to result keys. Returns the values and
        the set of child-element keys consumed.
        """
        out: dict[str, int | None] = {v: None for v in names.values()}
        for key, target in names.items():
            value = node.attr(key)
            if value is not None:
                out[target] = self.tenths(value, node, key)
        consumed = set()
        for child in node.children:
            if child.key in names:
                consumed.add(child.key)
                out[names[child.key]] = self.tenths(child.text, child, child.tag)
        return out, consumed

    def mode_name(self, value: str | None, node: Node) -> str | None:
        if value is None:
            return None
        name = value.strip()
        alias = _MODE_ALIASES.get(name.lower())
        if alias is not None:
            self.warn("ModeAlias", f"mode {name!r} read as {alias!r}", node.location)
            return alias
        return name

    # -- sections --

    def document(self, root: Node) -> None:
        if root.key in _ROOTS:
            self.check_attrs(root, ())
            for child in root.children:
                self.section(child)
        else:
            self.section(root)

    def section(self, node: Node) -> None:
        handler = {
            "objectives": self.objectives,
            "processingdevices": self.devices,
            "productionlines": self.lines,
            "productionprocesses": self.processes,
            "productionprocess": self.process,
            "subprocessrelations": self.relations,
            "sequencedependentsetups": self.setups,
        }.get(node.key)
        if handler is None:
            self.unknown(node)
        else:
            handler(node)

    def objectives(self, node: Node) -> None:
        self.check_attrs(node, ())
        for child in node.children:
            if child.key != "objective":
                self.unknown(child)
                continue
            self.check_attrs(child, ("name",))
            name = self.required(child, "name")
            if name is None:
                continue
            try:
                self.raw.objectives.append((ObjectiveKind.parse(name), child.location))
            except ValueError:
                self.error("UnknownObjective", f"objective {name!r} is not one of makespan, energy, monetary", child.location)

    def devices(self, node: Node) -> None:
        self.check_attrs(node, ())
        for child in node.children:
            if child.key == "processingdevice":
                self.device(child)
            else:
                self.unknown(child)

    def device(self, node: Node) -> None:
        self.check_attrs(node, ("name", "availability", "available"))
        name = self.required(node, "name")
        flag = node.attr("availability") or node.attr("available") or "1"
        available = flag.strip().lower() not in ("0", "false", "no")
        if flag.strip().lower() not in ("0", "1", "true", "false", "yes", "no"):
            self.error("BadNumber", f"availability {flag!r} is not 0 or 1", node.location)
        dev = RawDevice(name or "", available, loc=node.location)
        for child in node.children:
            if child.key == "modes":
                self.check_attrs(child, ())
                dev.modes = dev.modes or []
                for m in child.children:
                    if m.key != "mode":
                        self.unknown(m)
                        continue
                    self.check_attrs(m, ("name",))
                    mode = self.required(m, "name")
                    if mode is not None:
                        dev.modes.append((mode, m.location))
            elif child.key == "unavailabletimes":
                self.check_attrs(child, ())
                for w in child.children:
                    if w.key != "unavailabletime":
                        self.unknown(w)
                        continue
                    window = self.window(w)
                    if window is not None:
                        dev.windows.append((*window, w.location))
            else:
                self.unknown(child)
        if name is not None:
            self.raw.devices.append(dev)

    def window(self, node: Node) -> tuple[int, int] | None:
        self.check_attrs(node, ("start", "end"))
        if node.attr("start") is not None or node.attr("end") is not None:
            start, end = node.attr("start"), node.attr("end")
            if start is None or end is None:
                self.error("MissingAttribute", "<unavailableTime> needs both start and end", node.location)
                return None
        else:
            parts = node.text.split(",")
            if len(parts) != 2:
                self.error("BadNumber", f"unavailable time {node.text.strip()!r} is not 'start,end'", node.location)
                return None
            start, end = parts
        s = self.tenths(start, node, "start")
        e = self.tenths(end, node, "end")
        if s is None or e is None:
            return None
        return s, e

    def lines(self, node: Node) -> None:
        self.check_attrs(node, ())
        for child in node.children:
            if child.key == "productionline":
                self.line(child)
            else:
                self.unknown(child)

    def line(self, node: Node) -> None:
        self.check_attrs(node, ("name",))
        name = self.required(node, "name")
        line = RawLine(name or "", loc=node.location)

        def station(n: Node) -> None:
            self.check_attrs(n, ("order", "name", "processingdevicename"))
            order = self.required(n, "order")
            dev = n.attr("name") or n.attr("processingdevicename")
            if dev is None:
                self.error("MissingAttribute", f"<{n.tag}> requires attribute 'name'", n.location)
                return
            idx = self.integer(order, n, "order") if order is not None else None
            if idx is not None:
                line.stations.append((idx, dev.strip(), n.location))

        for child in node.children:
            if child.key == "productionlineprocessingdevices":
                self.check_attrs(child, ())
                for n in child.children:
                    if n.key == "productionlineprocessingdevice":
                        station(n)
                    else:
                        self.unknown(n)
            elif child.key == "productionlineprocessingdevice":
                station(child)
            else:
                self.unknown(child)
        if name is not None:
            self.raw.lines.append(line)

    def processes(self, node: Node) -> None:
        self.check_attrs(node, ())
        for child in node.children:
            if child.key == "productionprocess":
                self.process(child)
            elif child.key == "subprocessrelations":
                self.relations(child)
            else:
                self.unknown(child)

    def process(self, node: Node) -> None:
        self.check_attrs(node, ("name", "priority", "cuts"))
        name = self.required(node, "name")
        proc = RawProcess(name or "", loc=node.location)
        if node.attr("priority") is not None:
            proc.priority = self.integer(node.attr("priority"), node, "priority")
        if node.attr("cuts") is not None:
            proc.cuts = self.integer(node.attr("cuts"), node, "cuts")
            if proc.cuts is not None and proc.cuts < 0:
                self.error("BadNumber", "cuts must not be negative", node.location)
                proc.cuts = None
        self.process_body(node, proc, None)
        if name is None:
            return
        if proc.cuts and not proc.subprocesses:
            try:
                proc, rels = expand_cuts(proc)
            except NoCompatibleDevices as exc:
                self.error("NoCompatibleDevices", str(exc), node.location)
            else:
                self.raw.relations.extend(rels)
        elif proc.cuts and len(proc.subprocesses) != proc.cuts:
            self.warn(
                "CutCountMismatch",
                f"process {proc.name!r} declares {proc.cuts} cuts but lists {len(proc.subprocesses)} subprocesses; using the listed ones",
                node.location,
            )
        self.raw.processes.append(proc)

    def process_body(self, node: Node, proc: RawProcess, ptype: str | None) -> None:
        for child in node.children:
            if child.key == "processtype" and ptype is None:
                self.process_type(child, proc)
            elif child.key == "compatibledevices":
                self.compatible_devices(child, proc)
            elif child.key == "subprocesses":
                self.check_attrs(child, ())
                for sp in child.children:
                    if sp.key == "subprocess":
                        self.subprocess(sp, proc, ptype)
                    else:
                        self.unknown(sp)
            elif child.key == "subprocess":
                self.subprocess(child, proc, ptype)
            elif child.key == "subprocessrelations":
                self.relations(child)
            else:
                self.unknown(child)

    def process_type(self, node: Node, proc: RawProcess) -> None:
        self.check_attrs(node, ("name", "amountproduced"))
        name = self.required(node, "name")
        amount_text = self.required(node, "amountproduced")
        amount = None
        if amount_text is not None:
            try:
                amount = parse_quantity(amount_text)
            except ValueError:
                self.error("BadNumber", f"amount {amount_text!r} is not a quantity in tonnes", node.location)
        ptype = RawProcessType(name or "", amount or 0, loc=node.location)
        rest = []
        for child in node.children:
            if child.key == "compatibleproductionlines":
                self.check_attrs(child, ())
                for ln in child.children:
                    if ln.key != "compatibleproductionline":
                        self.unknown(ln)
                        continue
                    self.check_attrs(ln, ("name",))
                    ref = (ln.attr("name") or ln.text).strip()
                    if not ref:
                        self.error("MissingAttribute", "<compatibleProductionLine> names no line", ln.location)
                    else:
                        ptype.lines.append((ref, ln.location))
            else:
                rest.append(child)
        if name is None or amount is None:
            return
        proc.process_types.append(ptype)
        self.process_body(Node(node.tag, node.key, {}, rest, "", node.location), proc, name)

    def compatible_devices(self, node: Node, proc: RawProcess) -> None:
        self.check_attrs(node, ())
        for child in node.children:
            if child.key != "compatibledevice":
                self.unknown(child)
                continue
            names = {"processingtime": "t", "energyconsumption": "e", "monetarycost": "m"}
            self.check_attrs(child, ("name", "processingdevicename", "mode", *names))
            dev = child.attr("name") or child.attr("processingdevicename")
            if dev is None:
                self.error("MissingAttribute", f"<{child.tag}> requires attribute 'name'", child.location)
                continue
            values, consumed = self.costs(child, names)
            for c in child.children:
                if c.key not in consumed:
                    self.unknown(c)
            proc.compatible_devices.append(
                RawCompatibleDevice(dev.strip(), self.mode_name(child.attr("mode"), child),
                                    values["t"], values["e"], values["m"], child.location)
            )

    _COSTS = {"processingtime": "t", "energyconsumption": "e", "monetarycost": "m"}

    def subprocess(self, node: Node, proc: RawProcess, ptype: str | None) -> None:
        self.check_attrs(node, ("name",))
        name = self.required(node, "name")
        sp = RawSubprocess(name or "", process_type=ptype, loc=node.location)
        for child in node.children:
            if child.key == "subprocessprocessingdevices":
                self.check_attrs(child, ())
                for opt in child.children:
                    self.option_element(opt, sp)
            elif child.key in ("subprocessprocessingdevice", "subprocessprocessingdevicesgroup"):
                self.option_element(child, sp)
            else:
                self.unknown(child)
        if name is not None:
            proc.subprocesses.append(sp)

    def device_ref(self, node: Node) -> str | None:
        dev = node.attr("processingdevicename") or node.attr("name")
        if dev is None or not dev.strip():
            self.error("MissingAttribute", f"<{node.tag}> requires attribute 'processingDeviceName'", node.location)
            return None
        return dev.strip()

    def option_element(self, node: Node, sp: RawSubprocess) -> None:
        if node.key == "subprocessprocessingdevicesgroup":
            self.group(node, sp)
        elif node.key == "subprocessprocessingdevice":
            self.single(node, sp)
        else:
            self.unknown(node)

    def single(self, node: Node, sp: RawSubprocess) -> None:
        self.check_attrs(node, ("processingdevicename", "name", "mode", *self._COSTS))
        dev = self.device_ref(node)
        mode_children = [c for c in node.children if c.key == "subprocessprocessingdevicemode"]
        values, consumed = self.costs(node, self._COSTS)
        for c in node.children:
            if c.key not in consumed and c.key != "subprocessprocessingdevicemode":
                self.unknown(c)
        if dev is None:
            return
        if not mode_children:
            alloc = RawAllocation(dev, self.mode_name(node.attr("mode"), node), node.location)
            sp.options.append(RawOption([alloc], values["t"], values["e"], values["m"], node.location))
            return
        for m in mode_children:
            self.check_attrs(m, ("mode", *self._COSTS))
            mode = self.required(m, "mode") if "mode" in m.attrs else None
            if mode is None:
                self.error("MissingAttribute", f"<{m.tag}> requires attribute 'modeName'", m.location)
                continue
            mvalues, mconsumed = self.costs(m, self._COSTS)
            for c in m.children:
                if c.key not in mconsumed:
                    self.unknown(c)
            alloc = RawAllocation(dev, self.mode_name(mode, m), m.location)
            sp.options.append(RawOption([alloc], mvalues["t"], mvalues["e"], mvalues["m"], m.location))

    def group(self, node: Node, sp: RawSubprocess) -> None:
        self.check_attrs(node, tuple(self._COSTS))
        values, consumed = self.costs(node, self._COSTS)
        allocations = []
        for child in node.children:
            if child.key in consumed:
                continue
            if child.key != "subprocessprocessingdevice":
                self.unknown(child)
                continue
            self.check_attrs(child, ("processingdevicename", "name", "mode"))
            dev = self.device_ref(child)
            if dev is not None:
                allocations.append(RawAllocation(dev, self.mode_name(child.attr("mode"), child), child.location))
        sp.options.append(RawOption(allocations, values["t"], values["e"], values["m"], node.location))

    def relations(self, node: Node) -> None:
        self.check_attrs(node, ())
        for child in node.children:
            if child.key != "subprocessrelation":
                self.unknown(child)
                continue
            self.check_attrs(child, ("source", "destination", "allensoperator"))
            src = self.required(child, "source")
            dst = self.required(child, "destination")
            op_text = self.required(child, "allensoperator")
            if src is None or dst is None or op_text is None:
                continue
            try:
                op = AllenOperator.parse(op_text)
            except ValueError:
                self.error("BadOperator", f"Allen operator {op_text!r} is not one of LT, S, F, EQ, O, M, D", child.location)
                continue
            self.raw.relations.append(RawRelation(src, dst, op, child.location))

    def setups(self, node: Node) -> None:
        self.check_attrs(node, ())
        names = {
            "extraprocessingtime": "t",
            "extraenergyconsumption": "e",
            "extramonetarycost": "m",
        }
        for child in node.children:
            if child.key != "sequencedependentsetup":
                self.unknown(child)
                continue
            self.check_attrs(child, ("source", "destination", "processingdevice", *names))
            src = self.required(child, "source")
            dst = self.required(child, "destination")
            dev = self.required(child, "processingdevice")
            values, consumed = self.costs(child, names)
            for c in child.children:
                if c.key not in consumed:
                    self.unknown(c)
            if src is None or dst is None or dev is None:
                continue
            self.raw.setups.append(
                RawSetup(src, dst, dev, values["t"], values["e"], values["m"], child.location)
            )


def parse_raw(data: bytes | str) -> tuple[RawModel, list[Diagnostic], tuple[int, int]]:
    """Parse into the unresolved model. Cut shorthand is already expanded."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = read_tree(data)
    except expat.ExpatError as exc:
        loc = (exc.lineno, exc.offset + 1)
        diag = Diagnostic(Severity.ERROR, "XmlSyntax", expat.ErrorString(exc.code), loc)
        raise FdlParseError([diag]) from None
    builder = _Builder()
    builder.document(root)
    return builder.raw, builder.diagnostics, root.location


def parse_fdl(data: bytes | str) -> tuple[FactoryModel, list[Diagnostic]]:
    """Parse, normalise and resolve an FDL document.

    Returns the model and any warnings. Raises ``FdlParseError`` carrying all
    diagnostics when at least one error is found.
    """
    raw, diagnostics, root_loc = parse_raw(data)
    if any(d.severity is Severity.ERROR for d in diagnostics):
        raise FdlParseError(diagnostics)
    warnings: list[ModelError] = []
    try:
        model = resolve(raw, warnings)
    except ResolutionError as exc:
        diagnostics += [_from_model_error(e, Severity.ERROR, root_loc) for e in exc.errors]
        raise FdlParseError(diagnostics) from None
    diagnostics += [_from_model_error(w, Severity.WARNING, root_loc) for w in warnings]
    return model, diagnostics


def parse_file(path: str) -> tuple[FactoryModel, list[Diagnostic]]:
    with open(path, "rb") as fh:
        return parse_fdl(fh.read())


def _from_model_error(err: ModelError, severity: Severity, fallback: tuple[int, int]) -> Diagnostic:
    loc: Location = err.location or fallback
    return Diagnostic(severity, err.code, err.message, loc)


def detect_dialect(node: Node) -> DialectProfile:
    """Classify the dialect(s) used inside one element subtree."""
    seen: set[DialectProfile] = set()

    def walk(n: Node) -> None:
        if n.key == "subprocessprocessingdevicesgroup" or n.key == "processtype":
            seen.add(DialectProfile.PROCESS)
        elif n.key == "subprocessprocessingdevicemode" or n.key in ("processingtime", "energyconsumption", "monetarycost"):
            seen.add(DialectProfile.CANONICAL)
        elif n.key == "compatibledevices" or (
            n.key == "subprocessprocessingdevice" and not n.children and "processingtime" in n.attrs
        ):
            seen.add(DialectProfile.DISCRETE)
        for c in n.children:
            walk(c)

    walk(node)
    if len(seen) > 1:
        return DialectProfile.MIXED
    return seen.pop() if seen else DialectProfile.CANONICAL


def print_diagnostics(diagnostics: Iterable[Diagnostic], filename: str, stream: TextIO | None = None) -> None:
    stream = stream or sys.stderr
    for d in diagnostics:
        print(d.render(filename), file=stream)
