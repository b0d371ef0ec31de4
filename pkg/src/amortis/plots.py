"""Self-contained SVG line charts and two-column plot data files."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

from amortis.annuity import MetricsRow
from amortis.market import MarketPoint
from amortis.report import csv_text, write_atomic

Series = tuple[str, Sequence[float], Sequence[float]]

WIDTH = 760
PANEL_HEIGHT = 300
MARGIN_LEFT = 90
MARGIN_RIGHT = 30
MARGIN_TOP = 50
MARGIN_BOTTOM = 50
LINE_COLOR = "#1f77b4"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = [start]
    while ticks[-1] < hi - step * 1e-9:
        ticks.append(round(start + len(ticks) * step, 10))
    return ticks


def _tick_label(v: float) -> str:
    if v == int(v) and abs(v) >= 1:
        return f"{int(v):,}".replace(",", " ")
    return f"{v:.4g}"


def _panel(series: Series, top: float, x_label: str) -> list[str]:
    label, xs, ys = series
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    bottom = top + PANEL_HEIGHT - MARGIN_BOTTOM
    plot_top = top + MARGIN_TOP
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    yt = nice_ticks(min(ys), max(ys))
    y_lo, y_hi = yt[0], yt[-1]

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * (right - left)

    def py(y: float) -> float:
        return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - plot_top)

    out = [
        f'<text x="{(left + right) / 2:.1f}" y="{top + 30:.1f}" text-anchor="middle" font-size="16">{_escape(label)}</text>',
        f'<line x1="{left}" y1="{bottom:.1f}" x2="{right}" y2="{bottom:.1f}" stroke="#333"/>',
        f'<line x1="{left}" y1="{plot_top:.1f}" x2="{left}" y2="{bottom:.1f}" stroke="#333"/>',
    ]
    for t in yt:
        y = py(t)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{right}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end" font-size="11">{_tick_label(t)}</text>')
    for t in nice_ticks(x_lo, x_hi, 8):
        if x_lo <= t <= x_hi:
            x = px(t)
            out.append(f'<text x="{x:.1f}" y="{bottom + 16:.1f}" text-anchor="middle" font-size="11">{_tick_label(t)}</text>')
    out.append(
        f'<text x="{(left + right) / 2:.1f}" y="{bottom + 36:.1f}" text-anchor="middle" font-size="12">{_escape(x_label)}</text>'
    )
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    out.append(f'<polyline fill="none" stroke="{LINE_COLOR}" stroke-width="2" points="{pts}"/>')
    for x, y in zip(xs, ys):
        out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{LINE_COLOR}"/>')
    return out


def line_chart_svg(title: str, panels: Sequence[Series], x_label: str = "Amortization (years)") -> str:
    """One stacked panel per series, each with its own y axis."""
    if not panels:
        raise ValueError("nothing to plot")
    for label, xs, ys in panels:
        if len(xs) != len(ys) or not xs:
            raise ValueError(f"series {label!r} needs equal, non-empty x and y")
    height = 40 + PANEL_HEIGHT * len(panels)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="Helvetica, Arial, sans-serif">',
        '<rect width="100%" height="100%" fill="#fff"/>',
        f'<text x="{WIDTH / 2:.1f}" y="26" text-anchor="middle" font-size="18" font-weight="bold">{_escape(title)}</text>',
    ]
    for i, series in enumerate(panels):
        parts.extend(_panel(series, 30 + i * PANEL_HEIGHT, x_label))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _data_file(xs: Sequence[float], ys: Sequence[float], y_name: str) -> str:
    return csv_text(("years", y_name), [[f"{x:g}", repr(float(y))] for x, y in zip(xs, ys)])


def write_market_plots(points: Sequence[MarketPoint], out_dir: Path) -> list[Path]:
    years = [p.term_months / 12 for p in points]
    demand = [p.demand for p in points]
    supply = [p.supply_loans for p in points]
    return [
        write_atomic(out_dir / "figure4.csv", _data_file(years, demand, "demand")),
        write_atomic(out_dir / "figure4.svg", line_chart_svg("Loan demand by amortization period", [("Demand (loans)", years, demand)])),
        write_atomic(out_dir / "figure5.csv", _data_file(years, supply, "supply_loans")),
        write_atomic(out_dir / "figure5.svg", line_chart_svg("Loan supply by amortization period", [("Supply (loans)", years, supply)])),
    ]


FIGURE6_SERIES = (
    ("monthly_payment", "Monthly payment (EUR)"),
    ("total_debt", "Total debt (EUR)"),
    ("relative_increase", "Cost increase vs shortest term (%)"),
    ("debt_ratio", "Debt ratio"),
    ("repayment_capacity", "Repayment capacity"),
    ("risk_index", "Composite risk index"),
)


def write_metrics_plots(rows: Sequence[MetricsRow], out_dir: Path) -> list[Path]:
    years = [r.duration_years for r in rows]
    written = []
    panels = []
    for attr, label in FIGURE6_SERIES:
        ys = [getattr(r, attr) for r in rows]
        panels.append((label, years, ys))
        written.append(write_atomic(out_dir / f"figure6_{attr}.csv", _data_file(years, ys, attr)))
    written.append(write_atomic(out_dir / "figure6.svg", line_chart_svg("Longer amortization and household risk", panels)))
    return written
