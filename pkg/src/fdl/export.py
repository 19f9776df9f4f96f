"""Schedule exports: JSON, CSV and an SVG Gantt chart."""

from __future__ import annotations

import csv
import io
import json
from xml.sax.saxutils import escape

from fdl.fixedpoint import format_tenths
from fdl.model import FactoryModel
from fdl.scheduler import Schedule, Segment, SegmentKind


def _rows(schedule: Schedule, model: FactoryModel) -> list[Segment]:
    return [s for segs in schedule.per_device for s in segs]


def schedule_to_json(schedule: Schedule, model: FactoryModel) -> str:
    subs = model.subprocesses
    doc = {
        "objectives": schedule.objectives.formatted() if schedule.objectives else {},
        "feasible": schedule.feasible,
        "violations": [message for _, message in schedule.violations],
        "segments": [
            {
                "device": model.devices[s.device].name,
                "kind": s.kind.value,
                "name": subs[s.subprocess].name,
                "start": format_tenths(s.start),
                "end": format_tenths(s.end),
            }
            for s in _rows(schedule, model)
        ],
        "subprocesses": [
            {
                "name": sp.name,
                "option": choice,
                "priority": prio,
                "start": None if iv is None else format_tenths(iv[0]),
                "end": None if iv is None else format_tenths(iv[1]),
            }
            for sp, choice, prio, iv in zip(
                subs, schedule.genome.options, schedule.genome.priorities, schedule.intervals
            )
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def schedule_to_csv(schedule: Schedule, model: FactoryModel) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["device", "kind", "name", "start", "end"])
    for s in _rows(schedule, model):
        writer.writerow([
            model.devices[s.device].name,
            s.kind.value,
            model.subprocesses[s.subprocess].name,
            format_tenths(s.start),
            format_tenths(s.end),
        ])
    return buf.getvalue()


_LANE = 28
_LEFT = 120
_WIDTH = 960
_TOP = 20
_PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f")


def gantt_svg(schedule: Schedule, model: FactoryModel) -> str:
    """One lane per device, time in minutes along x.

    Every segment is drawn as exactly one ``rect``; setups are hatched and
    suspensions grey. Nothing else in the drawing is a ``rect``.
    """
    segments = _rows(schedule, model)
    horizon = max((s.end for s in segments), default=0) or 1
    scale = _WIDTH / horizon
    height = _TOP + _LANE * len(model.devices) + 30
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_LEFT + _WIDTH + 20}" height="{height}" '
        'font-family="sans-serif" font-size="11">',
        "<defs>",
        '<pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">',
        '<path d="M0,0 V6" stroke="#555" stroke-width="2"/>',
        "</pattern>",
        "</defs>",
    ]
    for d, device in enumerate(model.devices):
        y = _TOP + d * _LANE
        out.append(f'<text x="4" y="{y + _LANE * 0.6:.1f}">{escape(device.name)}</text>')
        out.append(f'<line x1="{_LEFT}" y1="{y + _LANE}" x2="{_LEFT + _WIDTH}" y2="{y + _LANE}" stroke="#ddd"/>')
    for s in segments:
        x = _LEFT + s.start * scale
        w = max((s.end - s.start) * scale, 0.5)
        y = _TOP + s.device * _LANE + 4
        name = model.subprocesses[s.subprocess].name
        if s.kind is SegmentKind.SETUP:
            fill = "url(#hatch)"
        elif s.kind is SegmentKind.SUSPENSION:
            fill = "#bbbbbb"
        else:
            fill = _PALETTE[model.owner[s.subprocess] % len(_PALETTE)]
        title = f"{s.kind.value} {name} [{format_tenths(s.start)}, {format_tenths(s.end)})"
        out.append(
            f'<rect x="{x:.2f}" y="{y}" width="{w:.2f}" height="{_LANE - 8}" fill="{fill}" '
            f'stroke="#333" stroke-width="0.5"><title>{escape(title)}</title></rect>'
        )
    axis_y = _TOP + _LANE * len(model.devices) + 14
    for i in range(6):
        t = horizon * i // 5
        x = _LEFT + t * scale
        out.append(f'<text x="{x:.1f}" y="{axis_y}" text-anchor="middle">{format_tenths(t)}</text>')
    out.append(f"<text x=\"{_LEFT}\" y=\"{height - 2}\">{escape('time (min)')}</text>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

