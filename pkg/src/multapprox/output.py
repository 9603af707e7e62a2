"""Artifact writers: CSV, JSON and SVG, each stamped with version and config hash."""

import csv
import hashlib
import io
import json
import math
from fractions import Fraction

import numpy as np

from . import __version__
from .approx import format_rational


def config_hash(config_dict):
    """sha256 of the canonical JSON form of a configuration."""
    text = json.dumps(config_dict, sort_keys=True, separators=(",", ":"), default=_plain)
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def header_line(chash):
    return f"multapprox {__version__} config={chash}"


def _plain(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return format_rational(v)
    return str(v)


def render_csv(header, rows, chash):
    buf = io.StringIO()
    buf.write("# " + header_line(chash) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(payload, config_dict, chash):
    doc = {"_meta": {"tool": "multapprox", "version": __version__, "config_hash": chash, "config": config_dict}}
    doc.update(payload)
    return json.dumps(doc, sort_keys=True, indent=2, default=_plain, allow_nan=True) + "\n"


def render_loglog_svg(series, chash, title="", xlabel="", ylabel="", width=480, height=360):
    """A log-log line plot as standalone SVG text. ``series`` maps label -> (xs, ys)."""
    pad = 50
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if x > 0 and y > 0]
    lx = [math.log10(x) for x, _ in pts] or [0.0, 1.0]
    ly = [math.log10(y) for _, y in pts] or [0.0, 1.0]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(v):
        return pad + (math.log10(v) - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- {header_line(chash)} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{pad / 2:.1f}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{width / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel} (log10 {x0:.3g} .. {x1:.3g})</text>',
        f'<text x="12" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 12 {height / 2:.1f})" text-anchor="middle">{ylabel} (log10 {y0:.3g} .. {y1:.3g})</text>',
    ]
    for i, (label, (xs, ys)) in enumerate(series.items()):
        c = colors[i % len(colors)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys) if x > 0 and y > 0)
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{coords}"/>')
        out.append(f'<text x="{width - pad}" y="{pad + 14 * (i + 1)}" text-anchor="end" font-size="11" fill="{c}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
