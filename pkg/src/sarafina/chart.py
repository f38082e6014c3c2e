"""Static SVG line chart of observed gap and score against year.

No plotting library is used; output is plain SVG 1.1 markup with fixed
number formatting so repeated runs are byte-identical.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .errors import ValidationError
from .model import ScoreReport

WIDTH, HEIGHT = 720, 420
PAD_LEFT, PAD_RIGHT, PAD_TOP, PAD_BOTTOM = 64, 24, 48, 56
SERIES = (
    ("observed_gap", "Nominal gap (%)", "#4e79a7"),
    ("sarafina_score", "Sarafina score (%)", "#e15759"),
)


def _nice_bounds(lo: float, hi: float) -> tuple[float, float]:
    if hi - lo < 1e-9:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    return lo - 0.05 * span, hi + 0.05 * span


def emit_chart(report: ScoreReport, title: str = "Sarafina score vs nominal gap") -> str:
    rows = report.rows
    if len(rows) < 2:
        raise ValidationError("a chart needs at least two report rows")
    years = [r.year for r in rows]
    values = [getattr(r, attr) for r in rows for attr, _, _ in SERIES]
    y_lo, y_hi = _nice_bounds(min(values), max(values))
    x_lo, x_hi = years[0], years[-1]
    plot_w = WIDTH - PAD_LEFT - PAD_RIGHT
    plot_h = HEIGHT - PAD_TOP - PAD_BOTTOM

    def sx(year: float) -> float:
        return PAD_LEFT + plot_w * (year - x_lo) / (x_hi - x_lo)

    def sy(v: float) -> float:
        return PAD_TOP + plot_h * (y_hi - v) / (y_hi - y_lo)

    x0, y0 = PAD_LEFT, PAD_TOP + plot_h
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{PAD_TOP}" x2="{x0}" y2="{y0}" stroke="black"/>',
    ]

    n_ticks = 5
    for i in range(n_ticks + 1):
        v = y_lo + (y_hi - y_lo) * i / n_ticks
        y = sy(v)
        out.append(f'<line x1="{x0 - 4}" y1="{y:.2f}" x2="{x0}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{y + 4:.2f}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{v:.1f}</text>')
    step = max(1, (x_hi - x_lo) // 10)
    for year in range(x_lo, x_hi + 1, step):
        x = sx(year)
        out.append(f'<line x1="{x:.2f}" y1="{y0}" x2="{x:.2f}" y2="{y0 + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{y0 + 18}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{year}</text>')

    out.append(f'<text x="{x0 + plot_w / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">Year</text>')
    out.append(f'<text x="16" y="{PAD_TOP + plot_h / 2:.1f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 16 {PAD_TOP + plot_h / 2:.1f})">Percent</text>')

    for attr, label, colour in SERIES:
        pts = " ".join(f"{sx(r.year):.2f},{sy(getattr(r, attr)):.2f}" for r in rows)
        out.append(f'<polyline id="series-{attr}" class="series" fill="none" stroke="{colour}" '
                   f'stroke-width="2" points="{pts}"/>')

    lx, ly = x0 + plot_w - 170, PAD_TOP + 8
    out.append('<g class="legend">')
    for i, (_, label, colour) in enumerate(SERIES):
        y = ly + 18 * i
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 24}" y2="{y}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{y + 4}" font-family="sans-serif" font-size="11">'
                   f'{escape(label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
