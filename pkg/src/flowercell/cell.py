"""Zero-cell construction by incremental half-plane clipping, plus metrics.

The conditioned Voronoi cell of the origin is the intersection of the
half-planes ``<y, x> <= ||x||^2 / 2`` over the sample points; the Crofton
cell uses ``<y, u_theta> <= r`` over the sampled lines.  Clipping starts
from a large bounding square and processes generators by increasing
distance.  Two facts make the construction exact despite truncation:

* a point x (line at distance r) cannot cut the current cell once
  ``||x|| > 2 rho`` (``r > rho``) where rho is the current maximal vertex
  distance, so the sorted pass may stop early;
* once ``2 rho <= truncation radius`` (``rho <= radius`` for lines), no
  point beyond the truncation could have cut the cell either, so the
  truncated sample certifies the untruncated cell.  When certification
  fails the sample is extended by annuli of doubled radius and the cell is
  rebuilt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnboundedCellError, UnsupportedKindError
from .geometry import (boundary_point, body_area, body_perimeter,
                       flower_area, hausdorff_support, polygon_flower_area,
                       unit_vector)
from .sampling import extend_line_sample, extend_sample

_SIDE_EPS = 1e-12
_MERGE_EPS = 1e-10


@dataclass(frozen=True)
class ZeroCell:
    """A closed convex cell around the origin.  Edge j joins vertices[j] to
    vertices[j+1] and is supported by generators[j] (a point whose bisector
    carries the edge, or a line given as (r, theta))."""

    vertices: np.ndarray
    generators: np.ndarray
    generator_kind: str  # "point" | "line"
    generator_indices: np.ndarray
    closed: bool = True

    @property
    def n_vertices(self):
        return len(self.vertices)

    def support_at(self, theta):
        U = unit_vector(np.asarray(theta, dtype=float))
        return (U @ self.vertices.T).max(axis=-1)

    def max_vertex_distance(self):
        return float(np.hypot(self.vertices[:, 0], self.vertices[:, 1]).max())

    def to_json(self):
        return {"vertices": self.vertices.tolist(),
                "generators": self.generators.tolist(),
                "generator_kind": self.generator_kind}


class _Clipper:
    """Mutable CCW polygon with per-edge provenance ids (negative = box)."""

    def __init__(self, half_side):
        s = float(half_side)
        self.V = np.array([(-s, -s), (s, -s), (s, s), (-s, s)])
        self.src = np.array([-1, -2, -3, -4])
        self.rho = s * np.sqrt(2.0)

    def clip(self, normal, offset, src_id):
        """Intersect with { y : <y, normal> <= offset }."""
        V, src = self.V, self.src
        s = V @ normal - offset
        inside = s <= _SIDE_EPS
        if inside.all():
            return False
        n = len(V)
        new_v, new_src = [], []
        for j in range(n):
            k = (j + 1) % n
            if inside[j]:
                new_v.append(V[j])
                new_src.append(src[j])
                if not inside[k]:
                    t = s[j] / (s[j] - s[k])
                    new_v.append(V[j] + t * (V[k] - V[j]))
                    new_src.append(src_id)
            elif inside[k]:
                t = s[j] / (s[j] - s[k])
                new_v.append(V[j] + t * (V[k] - V[j]))
                new_src.append(src[j])
        V = np.array(new_v)
        src = np.array(new_src)
        # merge near-duplicate consecutive vertices (degenerate bisectors)
        keep = np.ones(len(V), dtype=bool)
        for j in range(len(V)):
            k = (j + 1) % len(V)
            if keep[j] and np.hypot(*(V[k] - V[j])) < _MERGE_EPS:
                keep[k] = False
        self.V = V[keep]
        self.src = src[keep]
        self.rho = float(np.hypot(self.V[:, 0], self.V[:, 1]).max())
        return True


def _build_point_cell(points, radius):
    """One clipping pass.  Returns (clipper, certified)."""
    nrm = np.hypot(points[:, 0], points[:, 1])
    order = np.argsort(nrm, kind="stable")
    pts, nrm, ids = points[order], nrm[order], order
    clipper = _Clipper(2.0 * radius)
    i, n = 0, len(pts)
    next_filter = 64
    while i < n:
        if i >= next_filter and n - i > 16:
            # drop points whose bisector cannot cut the current cell:
            # needs max_v <v, x> > ||x||^2 / 2
            M = pts[i:] @ clipper.V.T
            keep = M.max(axis=1) > 0.5 * nrm[i:] ** 2 - 1e-9
            pts = np.vstack([pts[:i], pts[i:][keep]])
            nrm = np.r_[nrm[:i], nrm[i:][keep]]
            ids = np.r_[ids[:i], ids[i:][keep]]
            n = len(pts)
            next_filter = max(2 * next_filter, i + 256)
            if i >= n:
                break
        if nrm[i] > 2.0 * clipper.rho:
            # sorted: no later point can cut, and nrm[i] <= radius forces
            # 2*rho < radius, so the cell is certified (box edges sit at
            # distance 2*radius and cannot have survived)
            return clipper, not np.any(clipper.src < 0)
        clipper.clip(pts[i], 0.5 * nrm[i] ** 2, ids[i])
        i += 1
    certified = 2.0 * clipper.rho <= radius and not np.any(clipper.src < 0)
    return clipper, certified


def voronoi_zero_cell(sample, max_extensions=8):
    """Conditioned Voronoi zero-cell of the origin from a PointSample."""
    if len(sample) == 0 and sample.lam == 0:
        raise UnboundedCellError("empty sample with zero intensity cannot "
                                 "bound a cell",
                                 radius_reached=sample.truncation_radius)
    for _ in range(max_extensions + 1):
        clipper, certified = _build_point_cell(sample.points,
                                               sample.truncation_radius)
        if certified:
            gen_idx = clipper.src
            return ZeroCell(vertices=clipper.V,
                            generators=sample.points[gen_idx],
                            generator_kind="point",
                            generator_indices=gen_idx.copy())
        sample = extend_sample(sample, 2.0 * sample.truncation_radius)
    raise UnboundedCellError(
        f"cell not certified bounded within radius "
        f"{sample.truncation_radius:g}",
        radius_reached=sample.truncation_radius)


def _build_line_cell(lines, radius):
    order = np.argsort(lines[:, 0], kind="stable")
    lns, ids = lines[order], order
    clipper = _Clipper(2.0 * radius)
    i, n = 0, len(lns)
    next_filter = 64
    while i < n:
        if i >= next_filter and n - i > 16:
            U = unit_vector(lns[i:, 1])
            keep = (U @ clipper.V.T).max(axis=1) > lns[i:, 0] - 1e-9
            lns = np.vstack([lns[:i], lns[i:][keep]])
            ids = np.r_[ids[:i], ids[i:][keep]]
            n = len(lns)
            next_filter = max(2 * next_filter, i + 256)
            if i >= n:
                break
        r, theta = lns[i]
        if r > clipper.rho:
            return clipper, not np.any(clipper.src < 0)
        clipper.clip(np.array([np.cos(theta), np.sin(theta)]), r, ids[i])
        i += 1
    certified = clipper.rho <= radius and not np.any(clipper.src < 0)
    return clipper, certified


def crofton_zero_cell(sample, max_extensions=8):
    """Conditioned Crofton cell of the origin from a LineSample."""
    if len(sample) == 0 and sample.lam == 0:
        raise UnboundedCellError("empty line sample with zero intensity "
                                 "cannot bound a cell",
                                 radius_reached=sample.truncation_radius)
    for _ in range(max_extensions + 1):
        clipper, certified = _build_line_cell(sample.lines,
                                              sample.truncation_radius)
        if certified:
            gen_idx = clipper.src
            return ZeroCell(vertices=clipper.V,
                            generators=sample.lines[gen_idx],
                            generator_kind="line",
                            generator_indices=gen_idx.copy())
        sample = extend_line_sample(sample, 2.0 * sample.truncation_radius)
    raise UnboundedCellError(
        f"Crofton cell not certified bounded within radius "
        f"{sample.truncation_radius:g}",
        radius_reached=sample.truncation_radius)


# ---------------- measurements ----------------

@dataclass(frozen=True)
class CellMetrics:
    area: float
    perimeter: float
    n_vertices: int
    defect_area: float
    defect_perimeter: float
    hausdorff: float


def cell_area(cell):
    V = cell.vertices
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def cell_perimeter(cell):
    E = np.roll(cell.vertices, -1, axis=0) - cell.vertices
    return float(np.hypot(E[:, 0], E[:, 1]).sum())


def cell_metrics(cell, body, with_hausdorff=True):
    """Area, perimeter, vertex count and their defects against the body."""
    if not cell.closed:
        raise DomainError("cell_metrics requires a closed cell")
    area = cell_area(cell)
    perim = cell_perimeter(cell)
    dh = hausdorff_support(cell, body) if with_hausdorff else float("nan")
    return CellMetrics(area=area, perimeter=perim,
                       n_vertices=cell.n_vertices,
                       defect_area=area - body_area(body),
                       defect_perimeter=perim - body_perimeter(body),
                       hausdorff=dh)


def flower_area_defect(cell, body):
    """A(F_o(cell)) - A(F_o(K)), both exact in the polygon branch; the term
    paired with the vertex count in the exact Efron identity."""
    return polygon_flower_area(cell.vertices) - flower_area(body)


def support_point(cell, body, theta):
    """Frenet-frame coordinates (X, Y) of the cell vertex extremal in
    direction u_theta, relative to the boundary point s(theta) of a smooth
    body.  Ties broken by lowest vertex index; Y >= 0 when cell contains K."""
    if not cell.closed:
        raise DomainError("support_point requires a closed cell")
    if body.kind != "smooth":
        raise UnsupportedKindError("support_point requires a smooth body")
    t = float(theta)
    u = unit_vector(t)
    vals = cell.vertices @ u
    m = cell.vertices[int(np.argmax(vals))]
    s, _ = boundary_point(body, t)
    tangent = np.array([-u[1], u[0]])
    return float((m - s) @ tangent), float((m - s) @ u)


def vertex_cloud(cell, body, frame):
    """Cell vertices in a local boundary frame.

    frame = ("smooth", theta): coordinates (<v - s, t_s>, <v - s, n_s>).
    frame = ("vertex", i): polar (rho, alpha) about polygon vertex a_i,
    measured against the edge (a_i, a_{i+1}).
    """
    kind, arg = frame
    if kind == "smooth":
        t = float(arg)
        s, _ = boundary_point(body, t)
        u = unit_vector(t)
        tangent = np.array([-u[1], u[0]])
        rel = cell.vertices - s
        return np.column_stack([rel @ tangent, rel @ u])
    if kind == "vertex":
        if body.kind != "polygon":
            raise UnsupportedKindError("vertex frame requires a polygon body")
        V = body.vertices
        i = int(arg) % len(V)
        a = V[i]
        e = V[(i + 1) % len(V)] - a
        t_hat = e / np.hypot(e[0], e[1])
        n_hat = np.array([t_hat[1], -t_hat[0]])
        rel = cell.vertices - a
        rho = np.hypot(rel[:, 0], rel[:, 1])
        alpha = np.arctan2(rel @ n_hat, rel @ t_hat)
        return np.column_stack([rho, alpha])
    raise DomainError(f"unknown frame kind {kind!r}")
