"""Logarithmic Nyquist plot written directly as SVG text.

A complex value ``v`` is drawn at angle ``arg v`` and radius
``max(0, mag_db(v) - floor_db)``, where ``mag_db = 10 log10 |v|`` is the
same magnitude definition used in the CSV and JSON outputs.  The origin of
the plot is therefore the critical point ``(0, j0)``; everything closer
than ``floor_db`` collapses onto it.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

SIZE = 640
MARGIN = 40
COLORS = {"l0": "#d62728", "l1": "#2ca02c", "l2": "#9467bd", "l3": "#1f77b4"}


def _mag_db(v):
    return 10 * np.log10(np.maximum(np.abs(v), 1e-300))


class _Map:
    def __init__(self, values, floor_db=None):
        db = _mag_db(values)
        self.floor = float(np.floor(np.min(db) / 5) * 5) if floor_db is None else float(floor_db)
        self.floor = min(self.floor, -5.0)
        top = float(np.percentile(db, 98))
        self.top = max(math.ceil(top / 5) * 5, self.floor + 10)
        self.scale = (SIZE / 2 - MARGIN) / (self.top - self.floor)

    def radius(self, v):
        return np.clip(_mag_db(v) - self.floor, 0, self.top - self.floor) * self.scale

    def xy(self, v):
        v = np.asarray(v, dtype=complex)
        r = self.radius(v)
        a = np.angle(v)
        return SIZE / 2 + r * np.cos(a), SIZE / 2 - r * np.sin(a)


def _polyline(xs, ys, **attrs):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    extra = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
    return f'<polyline points="{pts}" fill="none" {extra}/>'


def _arrow(m, a, b, color, label=None):
    (x1, y1), (x2, y2) = (tuple(float(c) for c in m.xy(v)) for v in (a, b))
    out = [f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{color}" stroke-width="2" marker-end="url(#head-{color[1:]})"/>']
    if label:
        out.append(f'<text x="{x2 + 4:.2f}" y="{y2 - 4:.2f}" fill="{color}" font-size="12">{escape(label)}</text>')
    return out


def nyquist_svg(report, floor_db=None):
    """SVG text for a :class:`~paulistab.stability.StabilityReport`."""
    L = np.asarray(report.trace.L_char, dtype=complex)
    b = report.breakdown
    m = _Map(L, floor_db)
    c = SIZE / 2
    colors = ["#000000", *COLORS.values()]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif">',
        "<defs>",
        *(
            f'<marker id="head-{col[1:]}" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto">'
            f'<path d="M0,0 L8,4 L0,8 z" fill="{col}"/></marker>'
            for col in colors
        ),
        "</defs>",
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    # magnitude rings every 5 dB, labelled every 10 dB
    level = m.floor + 5
    while level <= m.top + 1e-9:
        r = (level - m.floor) * m.scale
        dash = "" if abs(level) < 1e-9 else ' stroke-dasharray="3,3"'
        parts.append(f'<circle cx="{c}" cy="{c}" r="{r:.2f}" fill="none" stroke="#bbbbbb"{dash}/>')
        if round(level) % 10 == 0:
            parts.append(f'<text x="{c + r + 2:.2f}" y="{c - 2}" font-size="10" fill="#777777">{level:g} dB</text>')
        level += 5
    parts.append(f'<line x1="{MARGIN / 2}" y1="{c}" x2="{SIZE - MARGIN / 2}" y2="{c}" stroke="#999999"/>')
    parts.append(f'<line x1="{c}" y1="{MARGIN / 2}" x2="{c}" y2="{SIZE - MARGIN / 2}" stroke="#999999"/>')

    # split the trace where it jumps (axis poles) so no chords are drawn
    x, y = m.xy(L)
    breaks = np.nonzero(np.abs(np.diff(np.unwrap(np.angle(L)))) > math.pi / 2)[0] + 1
    for seg in np.split(np.arange(len(L)), breaks):
        if len(seg) > 1:
            parts.append(_polyline(x[seg], y[seg], stroke="#000000", stroke_width="1.5"))
            parts.append(_polyline(x[seg], 2 * c - y[seg], stroke="#888888", stroke_width="1", stroke_dasharray="4,3"))
    parts.append(f'<circle cx="{c}" cy="{c}" r="4" fill="#d62728"/>')
    parts.append(f'<text x="{c + 6}" y="{c + 14}" font-size="11">(0, j0)</text>')

    # contribution chain 1 -> 1+l0 -> ... -> L(j w_c), and L(j w_c) itself
    point = 1 + 0j
    for name, term in b.terms.items():
        nxt = point + complex(term)
        if abs(term) > 0:
            parts += _arrow(m, point, nxt, COLORS[name], name.replace("l", "ℓ"))
        point = nxt
    Lc = complex(b.L_at_wc)
    (xc, yc) = (float(v) for v in m.xy(Lc))
    parts.append(f'<line x1="{c}" y1="{c}" x2="{xc:.2f}" y2="{yc:.2f}" stroke="#000000" stroke-width="2.5" marker-end="url(#head-000000)"/>')
    parts.append(
        f'<text x="{MARGIN / 2}" y="{MARGIN / 2 + 4}" font-size="13">'
        f"{escape(report.verdict)}: {report.encirclements} encirclements, "
        f"f_c = {report.f_c:.1f} Hz, |L(jωc)| = {abs(Lc):.3g}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
