"""Self-contained SVG line charts of mode shares with confidence bands."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import pandas as pd

from .types import DataError

# legend labels follow the published figures
SERIES = (("share_moto", "mot", "#d62728"), ("share_car", "car", "#1f77b4"), ("share_pub", "pub", "#2ca02c"))


def _read(aggregate) -> pd.DataFrame:
    if isinstance(aggregate, pd.DataFrame):
        return aggregate
    try:
        return pd.read_csv(aggregate)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {aggregate}: {exc}") from None


def share_chart(aggregate, scenario: str | None = None, title: str | None = None,
                width: int = 640, height: int = 400) -> str:
    """SVG text: one polyline per mode over years, with a shaded CI band each.

    ``aggregate`` is the long-format table written by ``export_results`` (or its
    path). With several scenarios present, ``scenario`` picks one; the default is
    the first.
    """
    df = _read(aggregate)
    need = {"scenario", "year", "indicator", "mean", "ci_low", "ci_high"}
    if df.empty or not need <= set(df.columns):
        raise DataError("aggregate table is empty or lacks the required columns")
    if scenario is None:
        scenario = str(df["scenario"].iloc[0])
    df = df[df["scenario"].astype(str) == scenario]
    if df.empty:
        raise DataError(f"scenario {scenario!r} not found")

    left, right, top, bottom = 60, 90, 40, 50
    pw, ph = width - left - right, height - top - bottom
    years = sorted(df["year"].unique())
    y0, y1 = years[0], years[-1] if years[-1] > years[0] else years[0] + 1

    def sx(year):
        return left + (year - y0) / (y1 - y0) * pw

    def sy(v):
        v = min(max(float(v), 0.0), 1.0)
        return top + (1.0 - v) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    parts.append(f'<text x="{left + pw / 2}" y="{top - 15}" text-anchor="middle" font-size="14">'
                 f'{escape(title or f"Mode shares: {scenario}")}</text>')
    # axes, y range fixed to [0, 1]
    parts.append(f'<g class="axes" stroke="black"><line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}"/>'
                 f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/></g>')
    for k in range(6):
        v = k / 5
        parts.append(f'<line x1="{left - 4}" y1="{sy(v)}" x2="{left}" y2="{sy(v)}" stroke="black"/>'
                     f'<text x="{left - 8}" y="{sy(v) + 4}" text-anchor="end">{v:.1f}</text>')
    for yr in years:
        parts.append(f'<text x="{sx(yr)}" y="{top + ph + 18}" text-anchor="middle">{int(yr)}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">year</text>')
    parts.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 15 {top + ph / 2})">share of commuters</text>')

    drawn = 0
    for col, label, color in SERIES:
        s = df[df["indicator"] == col].sort_values("year")
        if s.empty:
            continue
        lo = s["ci_low"].fillna(s["mean"])
        hi = s["ci_high"].fillna(s["mean"])
        upper = [f"{sx(x):.2f},{sy(v):.2f}" for x, v in zip(s["year"], hi)]
        lower = [f"{sx(x):.2f},{sy(v):.2f}" for x, v in zip(s["year"][::-1], lo[::-1])]
        parts.append(f'<polygon class="band" data-series="{label}" points="{" ".join(upper + lower)}" '
                     f'fill="{color}" fill-opacity="0.2" stroke="none"/>')
        pts = " ".join(f"{sx(x):.2f},{sy(v):.2f}" for x, v in zip(s["year"], s["mean"]))
        parts.append(f'<polyline class="series" data-series="{label}" points="{pts}" '
                     f'fill="none" stroke="{color}" stroke-width="2"/>')
        ly = top + 10 + 20 * drawn
        parts.append(f'<g class="legend"><line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 35}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/><text x="{left + pw + 40}" y="{ly + 4}">{label}</text></g>')
        drawn += 1
    if drawn == 0:
        raise DataError("aggregate table has no share indicators")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_shares(aggregate, out_path, **kwargs) -> Path:
    """Render :func:`share_chart` and write it; nothing is written on error."""
    svg = share_chart(aggregate, **kwargs)
    out = Path(out_path)
    out.write_text(svg)
    return out
