"""Self-contained SVG charts: cluster scatter, elbow line, topic bars.

Plain string assembly, no plotting dependency; output is deterministic
for identical inputs.
"""

from __future__ import annotations

import numpy as np

PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]

_WIDTH = 640
_HEIGHT = 480
_MARGIN = 56


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{_escape(title)}</text>',
    ]


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _scale(values: np.ndarray, lo_px: float, hi_px: float) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return np.full(values.shape, (lo_px + hi_px) / 2.0)
    return lo_px + (values - lo) * (hi_px - lo_px) / (hi - lo)


def scatter_chart(points: np.ndarray, labels, title: str) -> str:
    """2-D scatter with one color per cluster label and a legend."""
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    parts = _header(title)
    xs = _scale(points[:, 0], _MARGIN, _WIDTH - _MARGIN)
    ys = _scale(points[:, 1], _HEIGHT - _MARGIN, _MARGIN)
    parts.append(
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
        f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="#999"/>'
    )
    unique = sorted(int(c) for c in np.unique(labels))
    for x, y, label in zip(xs, ys, labels):
        color = PALETTE[int(label) % len(PALETTE)]
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}" fill-opacity="0.8"/>')
    for slot, cid in enumerate(unique):
        color = PALETTE[cid % len(PALETTE)]
        ly = _MARGIN + 14 + slot * 18
        parts.append(f'<circle cx="{_WIDTH - _MARGIN + 14}" cy="{ly}" r="5" fill="{color}"/>')
        parts.append(
            f'<text x="{_WIDTH - _MARGIN + 24}" y="{ly + 4}" '
            f'font-family="sans-serif" font-size="11">{cid}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_chart(
    xs, ys, title: str, x_label: str, y_label: str, mark_x=None
) -> str:
    """Line chart with point markers; ``mark_x`` highlights one x value."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    parts = _header(title)
    px = _scale(xs, _MARGIN, _WIDTH - _MARGIN)
    py = _scale(ys, _HEIGHT - _MARGIN, _MARGIN)
    parts.append(
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
        f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="#999"/>'
    )
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
    parts.append(f'<polyline points="{coords}" fill="none" stroke="{PALETTE[0]}" stroke-width="2"/>')
    for x, y, raw_x in zip(px, py, xs):
        color = PALETTE[2] if mark_x is not None and raw_x == mark_x else PALETTE[0]
        radius = 6 if mark_x is not None and raw_x == mark_x else 4
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius}" fill="{color}"/>')
    for x, raw_x in zip(px, xs):
        parts.append(
            f'<text x="{x:.2f}" y="{_HEIGHT - _MARGIN + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{raw_x:g}</text>'
        )
    parts.append(
        f'<text x="{_WIDTH / 2:.0f}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{_escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="16" y="{_HEIGHT / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {_HEIGHT / 2:.0f})">{_escape(y_label)}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def hbar_chart(pairs: list[tuple[str, float]], title: str) -> str:
    """Horizontal bars for ranked (term, score) pairs, best on top."""
    parts = _header(title)
    if pairs:
        peak = max(score for _, score in pairs) or 1.0
        bar_area = _WIDTH - _MARGIN - 180
        row_height = min(36, (_HEIGHT - 2 * _MARGIN) / len(pairs))
        for row, (term, score) in enumerate(pairs):
            y = _MARGIN + row * row_height
            width = max(1.0, bar_area * score / peak)
            parts.append(
                f'<rect x="170" y="{y:.2f}" width="{width:.2f}" '
                f'height="{row_height - 6:.2f}" fill="{PALETTE[0]}"/>'
            )
            parts.append(
                f'<text x="162" y="{y + row_height / 2:.2f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="12">{_escape(term)}</text>'
            )
            parts.append(
                f'<text x="{174 + width:.2f}" y="{y + row_height / 2:.2f}" '
                f'font-family="sans-serif" font-size="11">{score:.4f}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
