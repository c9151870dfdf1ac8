"""Run artifacts: CSV result tables, JSON manifests, plot-data files, and
self-contained SVG line charts. All files are written to a temp name and
renamed, so an aborted run never leaves a partial artifact."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict

from ntnlink.harness import MetricsRecord

# wall time is reported in the run manifest, not here: a rerun with the same
# seed must reproduce every CSV byte for byte
CSV_COLUMNS = [
    "label", "channel_profile", "mod_order", "ue_speed_kmh", "eb_n0_db",
    "ber_uncoded_est", "ber_uncoded_pred", "bler_e", "bler_p",
    "tp_e_bps", "tp_p_bps", "nmse_pred_db", "nmse_est_db",
    "ber_est_ci_lo", "ber_est_ci_hi", "ber_pred_ci_lo", "ber_pred_ci_hi",
    "bler_e_ci_lo", "bler_e_ci_hi", "bler_p_ci_lo", "bler_p_ci_hi",
    "iterations_run", "warnings",
]


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _atomic_write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, path)


def record_row(rec: MetricsRecord) -> dict:
    d = asdict(rec)
    for name in ("ber_est_ci", "ber_pred_ci", "bler_e_ci", "bler_p_ci"):
        lo, hi = d.pop(name)
        d[f"{name}_lo"] = lo
        d[f"{name}_hi"] = hi
    d["warnings"] = ";".join(d["warnings"])
    return d


def write_records_csv(records: list[MetricsRecord], path: str) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        row = record_row(rec)
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")


def write_plot_data(path: str, xs, ys, xlabel: str, ylabel: str) -> None:
    lines = [f"# {xlabel}\t{ylabel}"]
    for x, y in zip(xs, ys):
        lines.append(f"{_fmt(float(x))}\t{_fmt(float(y))}")
    _atomic_write(path, "\n".join(lines) + "\n")


# -- minimal SVG line chart ---------------------------------------------------

_PALETTE = ("#1f6fb2", "#d95f02", "#2a9d58", "#9467bd", "#c23b3b", "#6b6b6b")
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 36, 52


def _ticks(lo: float, hi: float, n: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(1, n - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * step:
        out.append(round(t, 12))
        t += step
    return out


def svg_line_chart(path: str, series: dict[str, tuple], xlabel: str, ylabel: str,
                   title: str = "", log_y: bool = False) -> None:
    """series: {legend label: (xs, ys)}. Writes a standalone SVG with the
    numeric data embedded as a comment block."""
    pts = {}
    all_x, all_y = [], []
    for label, (xs, ys) in series.items():
        keep = [(float(x), float(y)) for x, y in zip(xs, ys)
                if math.isfinite(x) and math.isfinite(y) and (not log_y or y > 0)]
        pts[label] = keep
        all_x.extend(p[0] for p in keep)
        all_y.extend(p[1] for p in keep)
    if not all_x:
        all_x, all_y = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(all_x), max(all_x)
    if log_y:
        y_lo, y_hi = math.log10(min(all_y)), math.log10(max(all_y))
    else:
        y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        v = math.log10(y) if log_y else y
        return _MT + ph - (v - y_lo) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">']
    out.append("<!-- data")
    for label, keep in pts.items():
        out.append(f"  {label}: " + " ".join(f"({x:g},{y:g})" for x, y in keep))
    out.append("-->")
    out.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    if title:
        out.append(f'<text x="{_W/2}" y="20" text-anchor="middle" '
                   f'font-size="14">{title}</text>')
    # axes and grid
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
               f'stroke="#333"/>')
    for t in _ticks(x_lo, x_hi):
        px = sx(t)
        out.append(f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" y2="{_MT+ph}" '
                   f'stroke="#ddd"/>')
        out.append(f'<text x="{px:.1f}" y="{_MT+ph+16}" text-anchor="middle">{t:g}</text>')
    y_tick_vals = _ticks(y_lo, y_hi)
    for t in y_tick_vals:
        py = _MT + ph - (t - y_lo) / (y_hi - y_lo) * ph
        lab = f"1e{t:g}" if log_y else f"{t:g}"
        out.append(f'<line x1="{_ML}" y1="{py:.1f}" x2="{_ML+pw}" y2="{py:.1f}" '
                   f'stroke="#ddd"/>')
        out.append(f'<text x="{_ML-6}" y="{py+4:.1f}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{_ML+pw/2}" y="{_H-12}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{_MT+ph/2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_MT+ph/2})">{ylabel}</text>')
    # series
    for i, (label, keep) in enumerate(pts.items()):
        color = _PALETTE[i % len(_PALETTE)]
        if keep:
            path_d = " ".join(f"{'M' if j == 0 else 'L'}{sx(x):.1f},{sy(y):.1f}"
                              for j, (x, y) in enumerate(keep))
            out.append(f'<path d="{path_d}" fill="none" stroke="{color}" '
                       f'stroke-width="1.8"/>')
            for x, y in keep:
                out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="2.6" '
                           f'fill="{color}"/>')
        ly = _MT + 14 + 16 * i
        out.append(f'<line x1="{_ML+pw-140}" y1="{ly-4}" x2="{_ML+pw-116}" y2="{ly-4}" '
                   f'stroke="{color}" stroke-width="1.8"/>')
        out.append(f'<text x="{_ML+pw-110}" y="{ly}">{label}</text>')
    out.append("</svg>")
    _atomic_write(path, "\n".join(out) + "\n")
