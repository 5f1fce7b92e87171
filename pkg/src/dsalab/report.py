"""Run artifacts: CSV export and a small deterministic SVG line chart.

Both writers are plain text with fixed float formatting, so identical logs
produce byte-identical files. The SVG is hand-assembled for exactly that
reason: no library metadata, ids or timestamps sneak in.
"""

from __future__ import annotations

import os
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from dsalab.env import OutcomeLabel
from dsalab.harness import MetricsLog

LABEL_NAMES = {
    OutcomeLabel.EXCELLENT_ALONE: "ExcellentAlone",
    OutcomeLabel.COLLISION_EXCELLENT: "CollisionExcellent",
    OutcomeLabel.GOOD_ALONE: "GoodAlone",
    OutcomeLabel.COLLISION_GOOD: "CollisionGood",
    OutcomeLabel.COLLISION_WITH_PRIMARY: "CollisionWithPrimary",
    OutcomeLabel.COLLISION_WITH_SECONDARY: "CollisionWithSecondary",
    OutcomeLabel.BAD: "Bad",
}

CSV_HEADER = "slot,user,reward,label,action_index,window_avg"


def export_csv(log: MetricsLog, path) -> None:
    """Write one row per (slot, user): the slot outcome plus the mean reward
    of the W-slot window the slot belongs to (trailing partial included)."""
    w = log.window
    try:
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for t in range(log.horizon):
                lo = (t // w) * w
                hi = min(lo + w, log.horizon)
                for u in range(log.num_users):
                    window_avg = log.rewards[lo:hi, u].mean()
                    fh.write(f"{t},{u},{log.rewards[t, u]:.6f},"
                             f"{LABEL_NAMES[OutcomeLabel(log.labels[t, u])]},"
                             f"{log.action_indices[t, u]},{window_avg:.6f}\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# SVG


PALETTE = ("#1f6fb2", "#d1495b", "#3a9d23", "#8a4fbf", "#e08f00",
           "#00867d", "#6b4e2e", "#555555")

_WIDTH, _HEIGHT = 800, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 72, 24, 40, 56


def _ticks(lo: float, hi: float, count: int = 6) -> List[float]:
    """Round tick positions covering [lo, hi] (simple 1/2/5 ladder)."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            stepsize = m * mag
            break
    first = np.ceil(lo / stepsize) * stepsize
    ticks = []
    v = first
    while v <= hi + 1e-12:
        ticks.append(0.0 if abs(v) < stepsize * 1e-9 else float(v))
        v += stepsize
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".") if v % 1 else f"{int(v)}"


def render_svg(series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
               path, title: str = "", xlabel: str = "slot",
               ylabel: str = "average reward") -> None:
    """Plot named (x, y) series as polylines with axes, ticks and a legend.

    Output is deterministic: fixed canvas, fixed palette in series order,
    all coordinates formatted to two decimals.
    """
    if not series:
        raise ValueError("need at least one series")
    for name, sx, sy in series:
        if len(sx) != len(sy) or len(sx) == 0:
            raise ValueError(f"series {name!r} needs matching nonempty x and y")
    xs = np.concatenate([np.asarray(s[1], dtype=np.float64) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=np.float64) for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    pad = 0.05 * (y_hi - y_lo) or 0.5
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h

    out: List[str] = []
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
               f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">')
    out.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>')
    if title:
        out.append(f'<text x="{_WIDTH / 2:.2f}" y="24" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="16">{_escape(title)}</text>')

    # axes box
    out.append(f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" '
               f'height="{plot_h}" fill="none" stroke="#222222"/>')
    for tx in _ticks(x_lo, x_hi):
        out.append(f'<line x1="{px(tx):.2f}" y1="{_MARGIN_T + plot_h:.2f}" '
                   f'x2="{px(tx):.2f}" y2="{_MARGIN_T + plot_h + 5:.2f}" stroke="#222222"/>')
        out.append(f'<text x="{px(tx):.2f}" y="{_MARGIN_T + plot_h + 20:.2f}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="12">'
                   f'{_fmt(tx)}</text>')
    for ty in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{_MARGIN_L - 5}" y1="{py(ty):.2f}" '
                   f'x2="{_MARGIN_L}" y2="{py(ty):.2f}" stroke="#222222"/>')
        out.append(f'<text x="{_MARGIN_L - 9}" y="{py(ty) + 4:.2f}" '
                   f'text-anchor="end" font-family="sans-serif" font-size="12">'
                   f'{_fmt(ty)}</text>')
        out.append(f'<line x1="{_MARGIN_L}" y1="{py(ty):.2f}" '
                   f'x2="{_MARGIN_L + plot_w}" y2="{py(ty):.2f}" '
                   f'stroke="#dddddd" stroke-width="0.5"/>')

    out.append(f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{_HEIGHT - 14}" '
               f'text-anchor="middle" font-family="sans-serif" font-size="13">'
               f'{_escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{_MARGIN_T + plot_h / 2:.2f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.2f})">'
               f'{_escape(ylabel)}</text>')

    for i, (name, sx, sy) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{px(float(x)):.2f},{py(float(y)):.2f}"
                          for x, y in zip(sx, sy))
        out.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        ly = _MARGIN_T + 14 + 18 * i
        lx = _MARGIN_L + plot_w - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4:.2f}" x2="{lx + 22}" '
                   f'y2="{ly - 4:.2f}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 28}" y="{ly:.2f}" font-family="sans-serif" '
                   f'font-size="12">{_escape(name)}</text>')

    out.append("</svg>")
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
