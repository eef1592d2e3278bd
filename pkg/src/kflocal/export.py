"""CSV, JSON and SVG writers.

Floats are written in shortest round-trip form so identical inputs give
byte-identical files.  The SVG renderer is a small polyline plotter with
linear axes; it exists so that reports need no plotting dependency.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

__all__ = [
    "fmt",
    "write_csv",
    "write_json",
    "to_jsonable",
    "spectral_rows",
    "kernel_rows",
    "locus_rows",
    "svg_lines",
    "svg_locus",
]


def fmt(x) -> str:
    """Shortest round-trip text for a number."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def to_jsonable(obj):
    """Convert numpy values and non-finite floats into JSON-safe objects."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex) or isinstance(obj, np.complexfloating):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else fmt(x)
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")


def spectral_rows(solution):
    lam = solution.lam
    return zip(lam, solution.p_hat, solution.l_hat.real, solution.l_hat.imag, solution.residuals)


def kernel_rows(kernel):
    """Dirac row first, then the regular samples (omitted when null)."""
    rows = [(0.0, kernel.delta_strength, "delta")]
    if not kernel.is_null:
        rows.extend((x, v, "regular") for x, v in zip(kernel.xs, kernel.values))
    return rows


def locus_rows(traj):
    rows = []
    for k, (p, s) in enumerate(zip(traj.params, traj.sets)):
        pts = traj.paths[k] if traj.paths is not None else s.points
        for i, z in enumerate(pts):
            rows.append((p, i, z.real, z.imag, s.theta))
    return rows


# ---------------------------------------------------------------------------
# SVG

_W, _H, _M = 640, 420, 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _c(v):
    return f"{v:.2f}"


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x):
        return _M + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * (_W - 2 * _M)

    def py(self, y):
        return _H - _M - (np.asarray(y) - self.y0) / (self.y1 - self.y0) * (_H - 2 * _M)


def _axes(fr, title, xlabel, ylabel):
    out = [f'<rect x="{_M}" y="{_M}" width="{_W - 2 * _M}" height="{_H - 2 * _M}" '
           'fill="none" stroke="#000"/>']
    for t in _ticks(fr.x0, fr.x1):
        x = _c(fr.px(t))
        out.append(f'<line x1="{x}" y1="{_H - _M}" x2="{x}" y2="{_H - _M + 5}" stroke="#000"/>')
        out.append(f'<text x="{x}" y="{_H - _M + 18}" font-size="11" text-anchor="middle">{t:g}</text>')
    for t in _ticks(fr.y0, fr.y1):
        y = _c(fr.py(t))
        out.append(f'<line x1="{_M - 5}" y1="{y}" x2="{_M}" y2="{y}" stroke="#000"/>')
        out.append(f'<text x="{_M - 8}" y="{y}" font-size="11" text-anchor="end" '
                   f'dominant-baseline="middle">{t:g}</text>')
    out.append(f'<text x="{_W / 2}" y="{_M / 2}" font-size="14" text-anchor="middle">{title}</text>')
    out.append(f'<text x="{_W / 2}" y="{_H - 12}" font-size="12" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="14" y="{_H / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {_H / 2})">{ylabel}</text>')
    return out


def _doc(body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="#fff"/>', *body, "</svg>"]) + "\n"


def _legend(labels):
    out = []
    for i, lab in enumerate(labels):
        y = _M + 14 + 16 * i
        col = _COLORS[i % len(_COLORS)]
        out.append(f'<line x1="{_W - _M - 120}" y1="{y}" x2="{_W - _M - 100}" y2="{y}" '
                   f'stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _M - 95}" y="{y}" font-size="11" dominant-baseline="middle">{lab}</text>')
    return out


def svg_lines(path, series, *, title="", xlabel="", ylabel="", xlim=None, ylim=None, markers=False):
    """Line plot of ``series = [(label, xs, ys), ...]``."""
    xs_all = np.concatenate([np.asarray(s[1], float) for s in series])
    ys_all = np.concatenate([np.asarray(s[2], float) for s in series])
    ok = np.isfinite(xs_all) & np.isfinite(ys_all)
    xlim = xlim or (float(xs_all[ok].min()), float(xs_all[ok].max()))
    if ylim is None:
        lo, hi = float(ys_all[ok].min()), float(ys_all[ok].max())
        pad = 0.05 * (hi - lo if hi > lo else 1.0)
        ylim = (lo - pad, hi + pad)
    fr = _Frame(xlim, ylim)
    body = _axes(fr, title, xlabel, ylabel)
    body.append(f'<clipPath id="plot"><rect x="{_M}" y="{_M}" width="{_W - 2 * _M}" '
                f'height="{_H - 2 * _M}"/></clipPath>')
    for i, (label, x, y) in enumerate(series):
        x, y = np.asarray(x, float), np.asarray(y, float)
        sel = (x >= fr.x0) & (x <= fr.x1) & np.isfinite(y)
        x, y = x[sel], y[sel]
        if x.size > 2000:
            idx = np.unique(np.linspace(0, x.size - 1, 2000).astype(int))
            x, y = x[idx], y[idx]
        col = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{_c(a)},{_c(b)}" for a, b in zip(fr.px(x), fr.py(y)))
        body.append(f'<polyline clip-path="url(#plot)" fill="none" stroke="{col}" '
                    f'stroke-width="1.5" points="{pts}"/>')
        if markers:
            for a, b in zip(fr.px(x), fr.py(y)):
                body.append(f'<circle cx="{_c(a)}" cy="{_c(b)}" r="2.5" fill="{col}"/>')
    body.extend(_legend([s[0] for s in series]))
    Path(path).write_text(_doc(body))


def svg_locus(path, traj, *, title="branch point locus", strip=None):
    """Branch point trajectories in the complex plane; ``|Re z| < strip`` shaded."""
    pts = np.concatenate([s.points for s in traj.sets]) if traj.sets else np.zeros(0, complex)
    r = float(np.abs(pts).max()) * 1.1 if pts.size else 1.0
    fr = _Frame((-r, r), (-r, r))
    body = []
    if strip is not None and np.isfinite(strip) and strip > 0:
        xa, xb = fr.px(-min(strip, r)), fr.px(min(strip, r))
        body.append(f'<rect x="{_c(xa)}" y="{_M}" width="{_c(xb - xa)}" height="{_H - 2 * _M}" '
                    'fill="#cfe3f5"/>')
    body.extend(_axes(fr, title, "Re z", "Im z"))
    if traj.paths is not None:
        for i in range(traj.paths.shape[1]):
            col = _COLORS[i % len(_COLORS)]
            z = traj.paths[:, i]
            line = " ".join(f"{_c(a)},{_c(b)}" for a, b in zip(fr.px(z.real), fr.py(z.imag)))
            body.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.2" points="{line}"/>')
    for s in traj.sets:
        for z in s.points:
            body.append(f'<circle cx="{_c(fr.px(z.real))}" cy="{_c(fr.py(z.imag))}" r="2.5" fill="#000"/>')
    for k in traj.collisions:
        for z in traj.sets[k].collisions:
            body.append(f'<circle cx="{_c(fr.px(z.real))}" cy="{_c(fr.py(z.imag))}" r="6" '
                        'fill="none" stroke="#d62728" stroke-width="2"/>')
    Path(path).write_text(_doc(body))
