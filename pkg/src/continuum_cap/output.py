"""Sweep results and their CSV / SVG renderings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

__all__ = ["CapacityCurve", "format_value", "write_csv", "csv_text", "plot", "write_table"]


@dataclass(frozen=True)
class CapacityCurve:
    """One x column and any number of named y series of equal length."""

    x_name: str
    x: tuple[float, ...]
    series: dict[str, tuple[float, ...]]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "series", {k: tuple(float(v) for v in vals) for k, vals in self.series.items()})
        n = len(self.x)
        for name, vals in self.series.items():
            if len(vals) != n:
                raise ValueError(f"series '{name}' has {len(vals)} values, expected {n}")
            if any(math.isnan(v) for v in vals):
                raise ValueError(f"series '{name}' contains NaN")

    @property
    def columns(self) -> list[str]:
        return [self.x_name, *self.series]

    def rows(self):
        for i, xv in enumerate(self.x):
            yield [xv, *(vals[i] for vals in self.series.values())]


def format_value(v) -> str:
    """12 significant digits, no negative zero."""
    if isinstance(v, str):
        return v
    v = float(v)
    if v == 0:
        return "0"
    return f"{v:.12g}"


def write_table(path, header: Sequence[str], rows, comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def csv_text(curve: CapacityCurve) -> str:
    lines = [f"# {k}: {v}" for k, v in curve.metadata.items()]
    lines.append(",".join(curve.columns))
    for row in curve.rows():
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(curve: CapacityCurve, path) -> None:
    Path(path).write_text(csv_text(curve), encoding="utf-8")


# --------------------------------------------------------------------------
# SVG

_DASHES = ("6,4", "9,3,2,3", "2,3", "12,4", "4,2,1,2")
_PALETTE = ("#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _style(name: str, index: int) -> dict:
    """Colours follow the usual reading of capacity plots: exact red, best green, worst blue."""
    if name in ("exact", "capacity"):
        return {"color": "#d62728", "dash": None, "marker": "diamond"}
    if name == "timesharing":
        return {"color": "#000000", "dash": None, "marker": "circle"}
    for prefix, color in (("worst_K", "#1f77b4"), ("best_K", "#2ca02c"), ("uplink_worst_K", "#9467bd")):
        if name.startswith(prefix):
            return {"color": color, "dash": None, "marker": None, "group": prefix}
    return {"color": _PALETTE[index % len(_PALETTE)], "dash": _DASHES[index % len(_DASHES)], "marker": None}


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _marker(kind: str, x: float, y: float, color: str) -> str:
    if kind == "diamond":
        return (f'<polygon points="{x:.2f},{y - 5:.2f} {x + 5:.2f},{y:.2f} {x:.2f},{y + 5:.2f} '
                f'{x - 5:.2f},{y:.2f}" fill="{color}"/>')
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.5" fill="none" stroke="{color}" stroke-width="1.5"/>'


def plot(
    curve: CapacityCurve,
    *,
    title: str = "",
    y_label: str = "",
    x_label: Optional[str] = None,
    width: int = 900,
    height: int = 560,
) -> str:
    """Render ``curve`` as a standalone SVG line chart.

    Non-finite points are skipped. Series sharing a family prefix
    (``worst_K*``, ``best_K*``) share a colour and differ by dash pattern.
    """
    if not curve.x or not curve.series:
        raise ValueError("cannot plot an empty curve")
    left, right, top, bottom = 80, 200, 50, 70
    pw, ph = width - left - right, height - top - bottom
    xs = curve.x
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    finite = [v for vals in curve.series.values() for v in vals if math.isfinite(v)]
    y_lo = min(0.0, min(finite)) if finite else 0.0
    y_hi = max(finite) if finite else 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    y_hi = y_lo + 1.05 * (y_hi - y_lo)

    def px(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return top + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{left + pw / 2:.1f}" y="28" text-anchor="middle" font-size="16">{_escape(title)}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{top + ph}" stroke="#e5e5e5"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle" font-size="12">{format_value(t)}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        y = py(t)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#e5e5e5"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="12">{format_value(t)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>')
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{height - 22}" text-anchor="middle" font-size="14">'
        f'{_escape(x_label if x_label is not None else curve.x_name)}</text>'
    )
    if y_label:
        cy = top + ph / 2
        out.append(f'<text x="22" y="{cy:.1f}" text-anchor="middle" font-size="14" '
                   f'transform="rotate(-90 22 {cy:.1f})">{_escape(y_label)}</text>')

    group_counts: dict[str, int] = {}
    for idx, (name, vals) in enumerate(curve.series.items()):
        style = _style(name, idx)
        group = style.get("group")
        if group:
            n = group_counts.get(group, 0)
            group_counts[group] = n + 1
            style["dash"] = _DASHES[n % len(_DASHES)]
        pts = [(px(x), py(y)) for x, y in zip(xs, vals) if math.isfinite(y)]
        dash = f' stroke-dasharray="{style["dash"]}"' if style["dash"] else ""
        if pts:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline class="series" data-name="{_escape(name)}" fill="none" '
                       f'stroke="{style["color"]}" stroke-width="2"{dash} points="{coords}"/>')
        if style["marker"]:
            out.extend(_marker(style["marker"], x, y, style["color"]) for x, y in pts)
        ly = top + 14 + 22 * idx
        lx = left + pw + 16
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{style["color"]}" '
                   f'stroke-width="2"{dash}/>')
        if style["marker"]:
            out.append(_marker(style["marker"], lx + 15, ly, style["color"]))
        out.append(f'<text class="legend" x="{lx + 38}" y="{ly + 4}" font-size="12">{_escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
