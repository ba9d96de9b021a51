"""Output helpers: atomic file writes, CSV tables, minimal SVG line plots and
binary field dumps with a text header."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["atomic_write", "write_csv", "read_csv", "svg_line_plot", "write_field", "read_field"]


def atomic_write(path: str | Path, data: str | bytes) -> Path:
    """Write to a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(v) -> str:
    if isinstance(v, (str, np.str_)):
        return str(v)
    return repr(float(v))


def write_csv(path: str | Path, header: Sequence[str], rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return atomic_write(path, buf.getvalue())


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return header, data


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_line_plot(series: Sequence[tuple[str, np.ndarray, np.ndarray]], xlabel: str, ylabel: str,
                  title: str = "", width: int = 640, height: int = 400) -> str:
    """Polylines with axes, tick labels at the ends and a legend."""
    left, right, top, bottom = 80, 20, 30, 50
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        pad = abs(y0) * 0.05 or 1.0
        y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - left - right, height - top - bottom
    title, xlabel, ylabel = escape(title), escape(xlabel), escape(ylabel)

    def sx(x):
        return left + (np.asarray(x) - x0) / (x1 - x0) * pw

    def sy(y):
        return top + ph - (np.asarray(y) - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{width / 2}" y="18" text-anchor="middle">{title}</text>')
    out.append(f'<text x="{left}" y="{top + ph + 15}" text-anchor="start">{x0:.4g}</text>')
    out.append(f'<text x="{left + pw}" y="{top + ph + 15}" text-anchor="end">{x1:.4g}</text>')
    out.append(f'<text x="{left - 4}" y="{top + ph}" text-anchor="end">{y0:.4g}</text>')
    out.append(f'<text x="{left - 4}" y="{top + 10}" text-anchor="end">{y1:.4g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2})">{ylabel}</text>')
    for k, (label, x, y) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(x), sy(y)))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        ly = top + 14 + 14 * k
        out.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 90}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 85}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_field(stem: str | Path, values: np.ndarray, spacing: Sequence[float], units: str,
                origin: Sequence[float] | None = None) -> tuple[Path, Path]:
    """Raw little-endian float64 array in ``stem.bin`` plus ``stem.hdr``."""
    stem = Path(stem)
    values = np.ascontiguousarray(values, dtype="<f8")
    origin = origin if origin is not None else [0.0] * len(spacing)
    header = "\n".join([
        "format = float64-le C-order",
        "shape = " + " ".join(str(n) for n in values.shape),
        "spacing = " + " ".join(repr(float(h)) for h in spacing),
        "origin = " + " ".join(repr(float(o)) for o in origin),
        f"units = {units}",
    ]) + "\n"
    bin_path = atomic_write(stem.with_suffix(".bin"), values.tobytes())
    hdr_path = atomic_write(stem.with_suffix(".hdr"), header)
    return bin_path, hdr_path


def read_field(stem: str | Path) -> tuple[np.ndarray, dict]:
    stem = Path(stem)
    meta = {}
    for line in stem.with_suffix(".hdr").read_text().splitlines():
        key, _, val = line.partition("=")
        meta[key.strip()] = val.strip()
    shape = tuple(int(v) for v in meta["shape"].split())
    values = np.fromfile(stem.with_suffix(".bin"), dtype="<f8").reshape(shape)
    meta["spacing"] = [float(v) for v in meta["spacing"].split()]
    meta["origin"] = [float(v) for v in meta["origin"].split()]
    return values, meta
