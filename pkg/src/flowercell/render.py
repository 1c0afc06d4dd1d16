"""Scene rendering: deterministic SVG output and matplotlib report figures.

The SVG path is hand-written so identical scenes produce byte-identical
files; matplotlib is reserved for the report figures that accompany
exported estimator tables.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .geometry import TWO_PI, unit_vector

_SVG_COLORS = {
    "body": "#1f77b4",
    "flower": "#9467bd",
    "cell": "#d62728",
    "gamma": "#2ca02c",
    "domain": "#8c564b",
    "points": "#444444",
}


def _fmt(x):
    return f"{float(x):.6f}"


def _poly_path(points, close=True):
    cmds = [f"M {_fmt(points[0][0])} {_fmt(points[0][1])}"]
    cmds.extend(f"L {_fmt(p[0])} {_fmt(p[1])}" for p in points[1:])
    if close:
        cmds.append("Z")
    return " ".join(cmds)


def _body_outline(body, n=512):
    if body.kind == "polygon":
        return body.vertices
    ts = np.linspace(0.0, TWO_PI, n, endpoint=False)
    h = body.support_at(ts)
    h1 = body.h1(ts)
    ref = body.reference_origin
    if ref[0] != 0.0 or ref[1] != 0.0:
        h1 = h1 - ref[0] * np.sin(ts) + ref[1] * np.cos(ts)
    return np.column_stack([h * np.cos(ts) - h1 * np.sin(ts),
                            h * np.sin(ts) + h1 * np.cos(ts)])


def _radial_outline(radial_fn, n=512):
    ts = np.linspace(0.0, TWO_PI, n, endpoint=False)
    r = radial_fn(ts)
    return r[:, None] * unit_vector(ts)


def render_svg(scene, path):
    """Write an SVG 1.1 drawing of the scene dict and return the path.

    Recognized keys: body (ConvexBody), flower_scale (draw scale*F_o(body)),
    cell (ZeroCell), points ((n,2) array), gamma ((n,2) polyline),
    domain (StarlikeDomain), flower (any object with radial_at, e.g. a
    FlowerDecomposition).  Unknown keys are rejected.
    """
    known = {"body", "flower_scale", "cell", "points", "gamma", "domain",
             "flower"}
    unknown = set(scene) - known
    if unknown:
        raise ValidationError(f"unknown scene keys {sorted(unknown)}")

    elements = []
    extents = [np.array([[-1.0, -1.0], [1.0, 1.0]])]

    def add_poly(points, color, close=True, width=0.01):
        arr = np.asarray(points, dtype=float)
        extents.append(np.array([arr.min(axis=0), arr.max(axis=0)]))
        elements.append(
            f'<path d="{_poly_path(arr, close)}" fill="none" '
            f'stroke="{color}" stroke-width="{_fmt(width)}"/>')

    body = scene.get("body")
    if body is not None:
        add_poly(_body_outline(body), _SVG_COLORS["body"])
        if scene.get("flower_scale"):
            s = float(scene["flower_scale"])
            add_poly(_radial_outline(lambda t: s * body.support_at(t)),
                     _SVG_COLORS["flower"])
    if scene.get("domain") is not None:
        add_poly(_radial_outline(scene["domain"].radial_at),
                 _SVG_COLORS["domain"])
    if scene.get("flower") is not None:
        add_poly(_radial_outline(scene["flower"].radial_at),
                 _SVG_COLORS["flower"])
    if scene.get("cell") is not None:
        add_poly(scene["cell"].vertices, _SVG_COLORS["cell"])
    if scene.get("gamma") is not None:
        add_poly(scene["gamma"], _SVG_COLORS["gamma"])
    pts = scene.get("points")
    if pts is not None and len(pts):
        arr = np.asarray(pts, dtype=float)
        extents.append(np.array([arr.min(axis=0), arr.max(axis=0)]))
        dots = "".join(
            f'<circle cx="{_fmt(p[0])}" cy="{_fmt(p[1])}" r="0.015" '
            f'fill="{_SVG_COLORS["points"]}"/>' for p in arr)
        elements.append(dots)

    lo = np.min([e[0] for e in extents], axis=0)
    hi = np.max([e[1] for e in extents], axis=0)
    pad = 0.05 * float(np.max(hi - lo))
    lo, hi = lo - pad, hi + pad
    width, height = hi - lo
    svg = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="640" height="640" viewBox="{_fmt(lo[0])} {_fmt(lo[1])} '
        f'{_fmt(width)} {_fmt(height)}">\n'
        f'<g transform="translate(0 {_fmt(lo[1] + hi[1])}) scale(1 -1)">\n'
        + "\n".join(elements)
        + "\n</g>\n</svg>\n")
    with open(path, "w") as fh:
        fh.write(svg)
    return path


def save_report_figure(reports, path):
    """Render rescaled estimates vs intensity with 95% bands and theory
    lines, one panel per estimator name; writes a PNG/PDF next to the
    exported tables."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = sorted({r.name for r in reports})
    if not names:
        raise ValidationError("no reports to plot")
    fig, axes = plt.subplots(len(names), 1,
                             figsize=(6.0, 2.4 * len(names)), squeeze=False)
    for ax, name in zip(axes[:, 0], names):
        rows = sorted((r for r in reports if r.name == name),
                      key=lambda r: r.lam)
        lams = [r.lam for r in rows]
        means = [r.mean for r in rows]
        err = [1.96 * r.std_error for r in rows]
        ax.errorbar(lams, means, yerr=err, fmt="o-", ms=4, capsize=3,
                    lw=1.0, label="estimate")
        theory = [r.theory_value for r in rows
                  if r.theory_value is not None]
        if theory:
            ax.axhline(theory[0], color="k", ls="--", lw=0.8, label="theory")
        ax.set_xscale("log")
        ax.set_title(name, fontsize=9)
        ax.tick_params(labelsize=8)
        ax.legend(fontsize=7, loc="best")
    axes[-1, 0].set_xlabel("intensity")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
