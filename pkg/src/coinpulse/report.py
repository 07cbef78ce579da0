"""Deterministic CSV and SVG artifact writers.

Every artifact is a pure function of its inputs: fixed float formats, LF
newlines, no timestamps, and explicit ordering everywhere, so re-runs are
byte-identical.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
)


def fmt(x: float, nd: int = 6) -> str:
    return f"{x:.{nd}f}"


def write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[str]],
    provenance: str | None = None,
    notes: Sequence[str] = (),
) -> None:
    """Write a report CSV: provenance comment, optional notes, header, preformatted cells."""
    lines: list[str] = []
    if provenance:
        lines.append(f"# {provenance}")
    for note in notes:
        lines.append(f"# {note}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(str(c) for c in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Read back a report CSV, skipping provenance comments."""
    lines = [
        line for line in Path(path).read_text(encoding="utf-8").splitlines() if line and not line.startswith("#")
    ]
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def _svg_open(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="16" text-anchor="middle" font-size="14">{_esc(title)}</text>',
    ]


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def line_chart(
    path: str | Path,
    series: Sequence[tuple[str, Sequence[float]]],
    x_labels: Sequence[str],
    title: str,
    markers: Sequence[int] = (),
    width: int = 860,
    height: int = 360,
) -> None:
    """Multi-series line chart over a shared categorical x axis.

    ``markers`` are x indices drawn as dashed vertical lines (segment
    boundaries in changepoint charts).
    """
    left, right, top, bottom = 56, 16, 28, 44
    pw = width - left - right
    ph = height - top - bottom
    all_vals = [v for _, vals in series for v in vals if not math.isnan(v)]
    lo = min(all_vals + [0.0]) if all_vals else 0.0
    hi = max(all_vals) if all_vals else 1.0
    if hi == lo:
        hi = lo + 1.0
    n = max(len(vals) for _, vals in series) if series else 1

    def sx(i: int) -> float:
        return left + (pw * i / max(1, n - 1))

    def sy(v: float) -> float:
        return top + ph * (1.0 - (v - lo) / (hi - lo))

    out = _svg_open(width, height, title)
    out.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>'
    )
    out.append(
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>'
    )
    for frac in (0.0, 0.5, 1.0):
        v = lo + (hi - lo) * frac
        y = sy(v)
        out.append(
            f'<text x="{left - 6}" y="{y + 3:.2f}" text-anchor="end">{v:.3g}</text>'
        )
    n_ticks = min(len(x_labels), 8) or 1
    step = max(1, (len(x_labels) - 1) // max(1, n_ticks - 1)) if x_labels else 1
    for i in range(0, len(x_labels), step):
        out.append(
            f'<text x="{sx(i):.2f}" y="{top + ph + 14}" text-anchor="middle">{_esc(x_labels[i])}</text>'
        )
    for idx in markers:
        out.append(
            f'<line x1="{sx(idx):.2f}" y1="{top}" x2="{sx(idx):.2f}" y2="{top + ph}" '
            f'stroke="#d62728" stroke-dasharray="4,3"/>'
        )
    for si, (name, vals) in enumerate(series):
        color = PALETTE[si % len(PALETTE)]
        pts = " ".join(
            f"{sx(i):.2f},{sy(v):.2f}" for i, v in enumerate(vals) if not math.isnan(v)
        )
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = top + 14 * si
        out.append(f'<rect x="{left + pw - 110}" y="{ly}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{left + pw - 96}" y="{ly + 9}">{_esc(name)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def radar_chart(
    path: str | Path,
    axes: Sequence[str],
    rows: Sequence[tuple[str, Sequence[float]]],
    title: str,
    size: int = 460,
) -> None:
    """Radar/spider chart: one polygon per row over the shared axes."""
    cx = size / 2
    cy = size / 2 + 8
    radius = size / 2 - 70
    vmax = max((v for _, vals in rows for v in vals), default=1.0)
    if vmax <= 0:
        vmax = 1.0

    def point(axis: int, value: float) -> tuple[float, float]:
        angle = -math.pi / 2 + 2 * math.pi * axis / len(axes)
        r = radius * value / vmax
        return cx + r * math.cos(angle), cy + r * math.sin(angle)

    out = _svg_open(size, size, title)
    for ring in (0.5, 1.0):
        pts = " ".join(
            f"{x:.2f},{y:.2f}"
            for x, y in (point(i, vmax * ring) for i in range(len(axes)))
        )
        out.append(f'<polygon points="{pts}" fill="none" stroke="#cccccc"/>')
    for i, name in enumerate(axes):
        x, y = point(i, vmax)
        out.append(f'<line x1="{cx:.2f}" y1="{cy:.2f}" x2="{x:.2f}" y2="{y:.2f}" stroke="#cccccc"/>')
        lx, ly = point(i, vmax * 1.16)
        out.append(f'<text x="{lx:.2f}" y="{ly:.2f}" text-anchor="middle">{_esc(name)}</text>')
    for ri, (name, vals) in enumerate(rows):
        color = PALETTE[ri % len(PALETTE)]
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (point(i, v) for i, v in enumerate(vals)))
        out.append(
            f'<polygon points="{pts}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = 30 + 14 * ri
        out.append(f'<rect x="12" y="{ly}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="26" y="{ly + 9}">{_esc(name)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
