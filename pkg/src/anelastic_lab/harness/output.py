"""CSV and SVG emission.  Missing values are written as empty cells."""

from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

SWEEP_COLUMNS = ("epsilon", "delta", "sup_E", "E0", "ET", "local_L2", "wall_ms", "steps")
TRAJECTORY_COLUMNS = ("time", "E_total", "E_kin_v", "E_kin_w", "E_press", "ess_norm", "res_mass",
                      "acoustic_energy")


class OutputError(OSError):
    pass


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(path, columns, rows):
    """Write ``rows`` (objects or dicts) with the given column order."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                get = r.get if isinstance(r, dict) else (lambda k, r=r: getattr(r, k, None))
                w.writerow([_cell(get(c)) for c in columns])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def emit_csv(report, path):
    """Sweep CSV: one row per (delta, epsilon) member in config order."""
    return write_rows(path, SWEEP_COLUMNS, report.rows)


def emit_trajectory_csv(rows, path):
    return write_rows(path, TRAJECTORY_COLUMNS, rows)


# -- SVG ----------------------------------------------------------------

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=55)


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        return [float(e) for e in range(a, b + 1)] if b - a <= 12 else [lo, hi]
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / 4 for i in range(5)]


def _fmt(v, log):
    return f"1e{int(v)}" if log else f"{v:.3g}"


def emit_svg_plot(series, path, *, title="", xlabel="x", ylabel="y", log=False, config_hash=""):
    """Self-contained line plot.

    ``series`` maps a label to a list of (x, y) pairs; points with a missing
    or (on log axes) non-positive coordinate are dropped.
    """
    clean = {}
    for label, pts in dict(series).items():
        keep = []
        for x, y in pts:
            if x is None or y is None or not (math.isfinite(x) and math.isfinite(y)):
                continue
            if log and (x <= 0 or y <= 0):
                continue
            keep.append((math.log10(x), math.log10(y)) if log else (float(x), float(y)))
        if keep:
            clean[label] = keep

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(WIDTH), height=str(HEIGHT),
                     viewBox=f"0 0 {WIDTH} {HEIGHT}")
    meta = ET.SubElement(svg, "metadata")
    meta.text = f"config_hash={config_hash}"
    ET.SubElement(svg, "title").text = title
    ET.SubElement(svg, "rect", x="0", y="0", width=str(WIDTH), height=str(HEIGHT), fill="white")

    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    axis = dict(stroke="black", **{"stroke-width": "1"})
    ET.SubElement(svg, "line", x1=str(x0), y1=str(y0), x2=str(x1), y2=str(y0), **axis)
    ET.SubElement(svg, "line", x1=str(x0), y1=str(y0), x2=str(x0), y2=str(y1), **axis)
    ET.SubElement(svg, "text", x=str((x0 + x1) / 2), y=str(HEIGHT - 12), **{"text-anchor": "middle"}).text = (
        f"log10 {xlabel}" if log else xlabel)
    ET.SubElement(svg, "text", x="16", y=str((y0 + y1) / 2), transform=f"rotate(-90 16 {(y0 + y1) / 2})",
                  **{"text-anchor": "middle"}).text = f"log10 {ylabel}" if log else ylabel
    ET.SubElement(svg, "text", x=str((x0 + x1) / 2), y="24", **{"text-anchor": "middle"}).text = title

    if not clean:
        ET.SubElement(svg, "text", x=str((x0 + x1) / 2), y=str((y0 + y1) / 2),
                      **{"text-anchor": "middle", "class": "no-data"}).text = "no data"
    else:
        xs = [p[0] for pts in clean.values() for p in pts]
        ys = [p[1] for pts in clean.values() for p in pts]
        xlo, xhi = min(xs), max(xs)
        ylo, yhi = min(ys), max(ys)
        if xhi == xlo:
            xlo, xhi = xlo - 0.5, xhi + 0.5
        if yhi == ylo:
            ylo, yhi = ylo - 0.5, yhi + 0.5

        def px(x):
            return x0 + (x - xlo) / (xhi - xlo) * (x1 - x0)

        def py(y):
            return y0 + (y - ylo) / (yhi - ylo) * (y1 - y0)

        for t in _ticks(xlo, xhi, log):
            if xlo <= t <= xhi:
                ET.SubElement(svg, "text", x=f"{px(t):.2f}", y=str(y0 + 18),
                              **{"text-anchor": "middle", "font-size": "11"}).text = _fmt(t, log)
        for t in _ticks(ylo, yhi, log):
            if ylo <= t <= yhi:
                ET.SubElement(svg, "text", x=str(x0 - 6), y=f"{py(t) + 4:.2f}",
                              **{"text-anchor": "end", "font-size": "11"}).text = _fmt(t, log)
        colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
        for i, (label, pts) in enumerate(clean.items()):
            color = colors[i % len(colors)]
            coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
            ET.SubElement(svg, "polyline", points=coords, fill="none", stroke=color,
                          **{"stroke-width": "1.5", "data-label": str(label)})
            ET.SubElement(svg, "text", x=str(x1 - 4), y=str(y1 + 14 * (i + 1)),
                          fill=color, **{"text-anchor": "end", "font-size": "11"}).text = str(label)

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        ET.ElementTree(svg).write(path, encoding="unicode", xml_declaration=True)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def sweep_series(report) -> dict:
    """(epsilon, metric) series per delta for plotting."""
    out = {}
    for d in report.deltas():
        label = report.metric() if d is None else f"{report.metric()} delta={d}"
        out[label] = report.series(d)
    return out


def emit_field_csv(path, grid, fields: dict):
    """One row per grid point: axis indices, coordinates, then each field.

    Vector fields (leading component axis) expand to ``name_0, name_1, ...``.
    """
    cols = [f"i{a}" for a in range(grid.dim)] + [f"x{a}" for a in range(grid.dim)]
    data = [np.asarray(ix).ravel() for ix in np.indices(grid.shape)] + [c.ravel() for c in grid.coords]
    for name, f in fields.items():
        f = np.asarray(f)
        if f.shape == grid.shape:
            cols.append(name)
            data.append(f.ravel())
        else:
            for c in range(f.shape[0]):
                cols.append(f"{name}_{c}")
                data.append(f[c].ravel())
    rows = [dict(zip(cols, vals)) for vals in zip(*[d.tolist() for d in data])]
    return write_rows(path, tuple(cols), rows)
