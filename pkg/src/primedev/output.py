"""CSV and SVG emission with atomic file writes."""

from __future__ import annotations

import io
import math
import os
import tempfile
from xml.sax.saxutils import escape


def fmt(v) -> str:
    """Locale-free text for a CSV cell; floats keep 17 significant digits."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"]


def svg_chart(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
              width: int = 640, height: int = 400) -> str:
    """Static line chart: one ``<polyline>`` per series, non-finite points dropped.

    ``series`` maps a label to ``(xs, ys)``.
    """
    clean = {}
    for name, (xs, ys) in series.items():
        pts = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
        clean[name] = pts
    allpts = [p for pts in clean.values() for p in pts] or [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in allpts), max(p[0] for p in allpts)
    y0, y1 = min(p[1] for p in allpts), max(p[1] for p in allpts)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{ml}" y="{mt + ph + 16}" font-size="11" text-anchor="middle">{x0:.4g}</text>',
        f'<text x="{ml + pw}" y="{mt + ph + 16}" font-size="11" text-anchor="middle">{x1:.4g}</text>',
        f'<text x="{ml - 6}" y="{mt + ph}" font-size="11" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{ml - 6}" y="{mt + 10}" font-size="11" text-anchor="end">{y1:.4g}</text>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{mt + ph / 2:.1f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for i, (name, pts) in enumerate(clean.items()):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}">'
                   f"<title>{escape(str(name))}</title></polyline>")
        out.append(f'<text x="{ml + pw - 4}" y="{mt + 14 + 14 * i}" font-size="11" '
                   f'text-anchor="end" fill="{color}">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
