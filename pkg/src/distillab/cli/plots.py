"""Native SVG polyline charts; diagnostics, not publication figures."""

from __future__ import annotations

from pathlib import Path

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

WIDTH = 720
HEIGHT = 420
MARGIN = 56


def _bounds(values):
    lo, hi = min(values), max(values)
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def polyline_chart(series, title: str, path, legend: bool = True) -> Path:
    """series: iterable of (label, xs, ys). Writes an SVG line chart."""
    series = [(label, list(xs), list(ys)) for label, xs, ys in series]
    if not series or any(len(xs) != len(ys) or not xs for _, xs, ys in series):
        raise ValueError("each series needs matching non-empty xs and ys")
    x_lo, x_hi = _bounds([x for _, xs, _ in series for x in xs])
    y_lo, y_hi = _bounds([y for _, _, ys in series for y in ys])

    def sx(x):
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

    def sy(y):
        return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle" '
            f'font-family="monospace" font-size="11">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{MARGIN - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{yv:.4g}</text>'
        )
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{points}"/>'
        )
        if legend and label:
            ly = MARGIN + 16 * i
            parts.append(
                f'<text x="{WIDTH - MARGIN + 4}" y="{ly}" font-family="monospace" '
                f'font-size="11" fill="{color}" text-anchor="end">{label}</text>'
            )
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
    return path


def spectrum_fan_chart(record, title: str, path) -> Path:
    """One line per singular value index over recorded steps."""
    k = record.spectrum_size
    series = [
        ("" if k > 8 else f"sigma_{i}", record.steps,
         [record.spectra[t][i] for t in range(len(record))])
        for i in range(k)
    ]
    return polyline_chart(series, title, path, legend=k <= 8)


def metric_chart(records: dict, metric: str, title: str, path) -> Path:
    """Overlay one metric (losses / decorrelations) across named records."""
    series = [(name, rec.steps, getattr(rec, metric)) for name, rec in records.items()]
    return polyline_chart(series, title, path)
