"""Deterministic convex geometry: support functions, Voronoi flowers, Steiner points.

A convex body is either *smooth*, given by its support function about a
reference origin together with the first two angular derivatives, or a
*polygon*, given by a strictly convex counterclockwise vertex list.  All
operations are pure; bodies are immutable after construction.

Conventions: the distinguished origin ``o`` is the coordinate origin.  The
support function of a body ``K`` seen from ``x`` in direction ``u_theta``
is ``p_x(K, theta) = sup_{y in K} <y - x, u_theta>``; it is also the polar
radius of the Voronoi flower of ``K`` with respect to ``x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import quadrature
from .errors import DomainError, UnsupportedKindError, ValidationError

TWO_PI = 2.0 * np.pi

VALIDATION_GRID = 4096


def reduce_angle(theta):
    """Reduce an angle (or array of angles) to [0, 2*pi)."""
    return np.asarray(theta, dtype=float) % TWO_PI


@dataclass(frozen=True)
class Angle:
    """An angle stored reduced to [0, 2*pi); reduction is idempotent."""

    value: float

    def __init__(self, value):
        object.__setattr__(self, "value", float(np.asarray(value) % TWO_PI))

    def __float__(self):
        return self.value


def _as_theta(theta):
    if isinstance(theta, Angle):
        return theta.value
    return float(theta) % TWO_PI


def unit_vector(theta):
    """u_theta = (cos theta, sin theta); accepts scalars or arrays."""
    t = np.asarray(theta, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def _wrap_callable(f):
    def g(theta):
        return np.asarray(f(np.asarray(theta, dtype=float)), dtype=float)

    return g


@dataclass(frozen=True)
class ConvexBody:
    """A planar convex body, smooth or polygonal.  Use the factory methods."""

    kind: str  # "smooth" | "polygon"
    h: object = None  # support function about reference_origin (smooth)
    h1: object = None  # dh/dtheta
    h2: object = None  # d2h/dtheta2
    vertices: np.ndarray = None  # (n, 2) CCW (polygon)
    reference_origin: np.ndarray = field(
        default_factory=lambda: np.zeros(2)
    )
    breakpoints: tuple = ()  # angular seams where h is only piecewise smooth

    # ---------------- construction ----------------

    @staticmethod
    def smooth(h, h1, h2, *, reference_origin=(0.0, 0.0), breakpoints=(),
               check_derivatives=True):
        """Build a smooth body from a vectorized support-function triple."""
        h, h1, h2 = _wrap_callable(h), _wrap_callable(h1), _wrap_callable(h2)
        grid = np.linspace(0.0, TWO_PI, VALIDATION_GRID, endpoint=False)
        hv = h(grid)
        rv = hv + h2(grid)
        if not np.all(hv > 0):
            raise ValidationError("support function must be positive: origin "
                                  "must be interior to the body")
        if not np.all(rv > 0):
            raise ValidationError("h + h'' must be positive (positive "
                                  "curvature radius) on the validation grid")
        if check_derivatives:
            _check_derivative(h, h1, grid, "h1")
            _check_derivative(h1, h2, grid, "h2")
        body = ConvexBody(kind="smooth", h=h, h1=h1, h2=h2,
                          reference_origin=np.asarray(reference_origin, float),
                          breakpoints=tuple(breakpoints))
        return body

    @staticmethod
    def polygon(vertices):
        """Build a strictly convex CCW polygon containing the origin."""
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise ValidationError("polygon needs at least 3 planar vertices")
        E = np.roll(V, -1, axis=0) - V
        cross = E[:, 0] * np.roll(E, -1, axis=0)[:, 1] - \
            E[:, 1] * np.roll(E, -1, axis=0)[:, 0]
        if not np.all(cross > 1e-14):
            raise ValidationError("vertices must be strictly convex in "
                                  "counterclockwise order")
        # origin strictly inside: left of every directed edge
        side = E[:, 0] * (-V[:, 1]) - E[:, 1] * (-V[:, 0])
        if not np.all(side > 1e-14):
            raise ValidationError("origin must be strictly inside the polygon")
        return ConvexBody(kind="polygon", vertices=V)

    @staticmethod
    def disk(radius=1.0, center=(0.0, 0.0)):
        if radius <= 0:
            raise ValidationError("disk radius must be positive")
        c = np.asarray(center, dtype=float)
        if np.hypot(*c) >= radius:
            raise ValidationError("origin must be interior to the disk")
        r = float(radius)

        def h(t):
            return r + c[0] * np.cos(t) + c[1] * np.sin(t)

        def h1(t):
            return -c[0] * np.sin(t) + c[1] * np.cos(t)

        def h2(t):
            return -c[0] * np.cos(t) - c[1] * np.sin(t)

        return ConvexBody.smooth(h, h1, h2, check_derivatives=False)

    @staticmethod
    def ellipse(a, b):
        """Axis-aligned ellipse centered at the origin with semi-axes a, b."""
        if a <= 0 or b <= 0:
            raise ValidationError("semi-axes must be positive")
        a2, b2 = float(a) ** 2, float(b) ** 2

        def h(t):
            return np.sqrt(a2 * np.cos(t) ** 2 + b2 * np.sin(t) ** 2)

        def h1(t):
            return (b2 - a2) * np.sin(t) * np.cos(t) / h(t)

        def h2(t):
            ht = h(t)
            return (b2 - a2) * np.cos(2 * t) / ht - h1(t) ** 2 / ht

        return ConvexBody.smooth(h, h1, h2, check_derivatives=False)

    @staticmethod
    def from_support_grid(h_samples):
        """Smooth body from uniform support samples; derivatives by periodic
        cubic spline.  The spline is the body: its approximation error versus
        whatever generated the samples is the caller's to report."""
        hs = np.asarray(h_samples, dtype=float)
        if hs.ndim != 1 or len(hs) < 512:
            raise ValidationError("custom-grid body needs >= 512 support "
                                  "samples on a uniform angle grid")
        grid = np.linspace(0.0, TWO_PI, len(hs) + 1)
        spl = CubicSpline(grid, np.r_[hs, hs[0]], bc_type="periodic")
        d1, d2 = spl.derivative(1), spl.derivative(2)
        return ConvexBody.smooth(lambda t: spl(t % TWO_PI),
                                 lambda t: d1(t % TWO_PI),
                                 lambda t: d2(t % TWO_PI),
                                 check_derivatives=False)

    # ---------------- basic queries ----------------

    def support_at(self, theta):
        """p_o(K, theta) about the coordinate origin; vectorized."""
        t = np.asarray(theta, dtype=float)
        if self.kind == "polygon":
            U = unit_vector(t)
            vals = U @ self.vertices.T
            return vals.max(axis=-1)
        base = self.h(t)
        ref = self.reference_origin
        if ref[0] != 0.0 or ref[1] != 0.0:
            base = base + ref[0] * np.cos(t) + ref[1] * np.sin(t)
        return base

    def max_support(self):
        grid = np.linspace(0.0, TWO_PI, VALIDATION_GRID, endpoint=False)
        return float(np.max(self.support_at(grid)))

    def min_support(self):
        grid = np.linspace(0.0, TWO_PI, VALIDATION_GRID, endpoint=False)
        return float(np.min(self.support_at(grid)))

    def normal_angles(self):
        """Outer normal angle of each polygon edge i: (a_i, a_{i+1})."""
        if self.kind != "polygon":
            raise UnsupportedKindError("normal_angles needs a polygon body")
        E = np.roll(self.vertices, -1, axis=0) - self.vertices
        return np.arctan2(-E[:, 0], E[:, 1]) % TWO_PI

    def edge_lengths(self):
        if self.kind != "polygon":
            raise UnsupportedKindError("edge_lengths needs a polygon body")
        E = np.roll(self.vertices, -1, axis=0) - self.vertices
        return np.hypot(E[:, 0], E[:, 1])

    def edge_foot_distances(self):
        """Distance from the origin to each edge line, ||o_i||."""
        if self.kind != "polygon":
            raise UnsupportedKindError("edge_foot_distances needs a polygon")
        delta = self.normal_angles()
        U = unit_vector(delta)
        return np.einsum("ij,ij->i", U, self.vertices)

    def angular_breakpoints(self):
        if self.kind == "polygon":
            return tuple(self.normal_angles())
        return self.breakpoints

    def contains(self, x, tol=0.0):
        """Strict interior test (up to tol slack) for a single point."""
        x = np.asarray(x, dtype=float)
        if self.kind == "polygon":
            V = self.vertices
            E = np.roll(V, -1, axis=0) - V
            side = E[:, 0] * (x[1] - V[:, 1]) - E[:, 1] * (x[0] - V[:, 0])
            return bool(np.all(side > tol))
        grid = np.linspace(0.0, TWO_PI, 1024, endpoint=False)
        slack = self.support_at(grid) - (x[0] * np.cos(grid) +
                                         x[1] * np.sin(grid))
        return bool(np.min(slack) > tol)


def _check_derivative(f, df, grid, name, tol=1e-6):
    d = 2e-3
    fd = (-f(grid + 2 * d) + 8 * f(grid + d) - 8 * f(grid - d)
          + f(grid - 2 * d)) / (12 * d)
    scale = max(1.0, float(np.max(np.abs(f(grid)))))
    worst = float(np.max(np.abs(fd - df(grid))))
    if worst > tol * scale:
        raise ValidationError(
            f"{name} is not the derivative of its predecessor "
            f"(finite-difference mismatch {worst:.2e})")


# ---------------- support functions seen from x ----------------

def support_function(body, x, theta):
    """p_x(K, theta) = sup_{y in K} <y - x, u_theta>."""
    if not isinstance(body, ConvexBody):
        raise ValidationError("support_function needs a ConvexBody")
    t = _as_theta(theta)
    x = np.asarray(x, dtype=float)
    return float(body.support_at(t) - (x[0] * np.cos(t) + x[1] * np.sin(t)))


def support_from(body, x, thetas):
    """Vectorized p_x(K, theta) over an array of angles."""
    t = np.asarray(thetas, dtype=float)
    x = np.asarray(x, dtype=float)
    return body.support_at(t) - (x[0] * np.cos(t) + x[1] * np.sin(t))


def boundary_point(body, theta):
    """Boundary point s(theta) with outer normal u_theta, and its curvature
    radius r = h + h''.  Smooth bodies only."""
    if body.kind != "smooth":
        raise UnsupportedKindError("boundary_point needs a smooth body")
    t = _as_theta(theta)
    h = float(body.h(t)) + float(np.dot(body.reference_origin, unit_vector(t)))
    h1 = float(body.h1(t)) + float(
        np.dot(body.reference_origin, (-np.sin(t), np.cos(t))))
    # reference offset contributes -<ref,u> to h2, cancelling in h + h2
    r = float(body.h(t) + body.h2(t))
    s = np.array([h * np.cos(t) - h1 * np.sin(t),
                  h * np.sin(t) + h1 * np.cos(t)])
    return s, r


def curvature_radius(body, thetas):
    """r(theta) = h + h'' for a smooth body; vectorized."""
    if body.kind != "smooth":
        raise UnsupportedKindError("curvature_radius needs a smooth body")
    t = np.asarray(thetas, dtype=float)
    return body.h(t) + body.h2(t)


def flower_membership(body, x, scale=1.0):
    """Is x inside ``scale * F_o(K)``?  The flower's polar radius in
    direction theta is scale * p_o(K, theta)."""
    if scale <= 0:
        raise DomainError("scale must be positive")
    x = np.asarray(x, dtype=float)
    rad = np.hypot(x[0], x[1])
    if rad == 0.0:
        return True
    theta = np.arctan2(x[1], x[0])
    return bool(rad <= scale * float(body.support_at(theta)))


# ---------------- flower areas ----------------

def _polygon_sector_integrals(vertices, x, power_fn):
    """Sum of closed-form integrals of <a_i - x, u_theta>^2 over the angular
    sector where vertex i achieves the support maximum."""
    W = vertices - np.asarray(x, dtype=float)
    E = np.roll(vertices, -1, axis=0) - vertices
    delta = np.arctan2(-E[:, 0], E[:, 1])
    total = 0.0
    n = len(vertices)
    for i in range(n):
        t1 = delta[i - 1]
        dt = (delta[i] - t1) % TWO_PI
        if dt >= TWO_PI - 1e-9:  # numerically collinear successor edge
            dt = 0.0
        total += power_fn(W[i], t1, t1 + dt)
    return total


def _sq_integral(w, t1, t2):
    # integral of <w, u_theta>^2 over [t1, t2]
    nw2 = w[0] * w[0] + w[1] * w[1]
    phi = np.arctan2(w[1], w[0])
    return nw2 * (0.5 * (t2 - t1)
                  + 0.25 * (np.sin(2 * (t2 - phi)) - np.sin(2 * (t1 - phi))))


def flower_area(body, x=(0.0, 0.0)):
    """Area of the Voronoi flower F_x(K) = (1/2) * integral of p_x^2,
    requiring x interior to K (p_x > 0 everywhere).

    Polygon bodies use the exact per-vertex sector decomposition; smooth
    bodies use adaptive quadrature with absolute error <= 1e-9.
    """
    x = np.asarray(x, dtype=float)
    if not body.contains(x):
        raise DomainError("flower_area requires x in the interior of K; "
                          "use flower_area_general otherwise")
    if body.kind == "polygon":
        return 0.5 * _polygon_sector_integrals(body.vertices, x, _sq_integral)
    val, _ = quadrature.integrate_circle(
        lambda t: support_from(body, x, t) ** 2,
        breakpoints=body.angular_breakpoints(), abs_tol=1e-10)
    return 0.5 * val


def polygon_flower_area(vertices, x=(0.0, 0.0)):
    """Exact flower area of a raw convex CCW vertex array (no body checks);
    x must be interior.  Used for zero-cell polygons."""
    return 0.5 * _polygon_sector_integrals(np.asarray(vertices, float),
                                           x, _sq_integral)


def _support_sign_windows(body, x, sign):
    """Angular windows where sign*p_x(K, theta) > 0, refined by bisection."""
    grid = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
    vals = sign * support_from(body, x, grid)
    pos = vals > 0
    if pos.all():
        return [(0.0, TWO_PI)]
    if not pos.any():
        return []

    def g(t):
        return sign * float(support_from(body, x, t))

    def rising(lo, hi):
        # g(lo) <= 0 < g(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def falling(lo, hi):
        # g(lo) > 0 >= g(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    n = len(grid)
    windows = []
    starts = np.flatnonzero(~np.roll(pos, 1) & pos)
    for i0 in starts:
        lo = grid[i0 - 1] if i0 > 0 else grid[-1] - TWO_PI
        t_in = rising(lo, grid[i0])
        j = i0
        while pos[j % n]:
            j += 1
        t_out = falling(grid[(j - 1) % n] + TWO_PI * ((j - 1) // n),
                        grid[j % n] + TWO_PI * (j // n))
        if t_out <= t_in:
            t_out += TWO_PI
        windows.append((t_in, t_out))
    return windows


def flower_area_general(body, x):
    """Flower area (1/2) * integral of max(p_x, 0)^2 for any x."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for lo, hi in _support_sign_windows(body, x, +1.0):
        val, _ = quadrature.integrate(
            lambda t: np.maximum(support_from(body, x, t), 0.0) ** 2,
            lo, hi, breakpoints=_breaks_in(body, lo, hi), abs_tol=1e-10)
        total += 0.5 * val
    return total


def flower_rest(body, x):
    """R(x) = (1/2) * integral of p_x^2 over directions where p_x <= 0.

    Vanishes for x interior to K and satisfies 0 <= R(x) <= (pi/4)||x||^2.
    """
    x = np.asarray(x, dtype=float)
    if body.contains(x):
        return 0.0
    total = 0.0
    for lo, hi in _support_sign_windows(body, x, -1.0):
        val, _ = quadrature.integrate(
            lambda t: np.minimum(support_from(body, x, t), 0.0) ** 2,
            lo, hi, breakpoints=_breaks_in(body, lo, hi), abs_tol=1e-10)
        total += 0.5 * val
    return total


def _breaks_in(body, lo, hi):
    out = []
    for b in body.angular_breakpoints():
        for shift in (-TWO_PI, 0.0, TWO_PI):
            t = b + shift
            if lo < t < hi:
                out.append(t)
    return out


# ---------------- Steiner point, area, perimeter ----------------

def _first_moment_integral(w, t1, t2):
    """Integral of <w, u_theta> u_theta over [t1, t2] (2-vector)."""
    wx, wy = w
    def F(t):
        return np.array([
            wx * (0.5 * t + 0.25 * np.sin(2 * t)) - wy * 0.25 * np.cos(2 * t),
            -wx * 0.25 * np.cos(2 * t) + wy * (0.5 * t - 0.25 * np.sin(2 * t)),
        ])
    return F(t2) - F(t1)


def steiner_point(body):
    """st(K) = (1/pi) * integral of p_o(K, theta) u_theta dtheta."""
    if body.kind == "polygon":
        W = body.vertices
        E = np.roll(W, -1, axis=0) - W
        delta = np.arctan2(-E[:, 0], E[:, 1])
        acc = np.zeros(2)
        for i in range(len(W)):
            t1 = delta[i - 1]
            dt = (delta[i] - t1) % TWO_PI
            if dt >= TWO_PI - 1e-9:
                dt = 0.0
            acc += _first_moment_integral(W[i], t1, t1 + dt)
        return acc / np.pi
    bks = body.angular_breakpoints()
    cx, _ = quadrature.integrate_circle(
        lambda t: body.support_at(t) * np.cos(t), breakpoints=bks,
        abs_tol=1e-10)
    cy, _ = quadrature.integrate_circle(
        lambda t: body.support_at(t) * np.sin(t), breakpoints=bks,
        abs_tol=1e-10)
    return np.array([cx, cy]) / np.pi


def body_area(body):
    if body.kind == "polygon":
        V = body.vertices
        x, y = V[:, 0], V[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    val, _ = quadrature.integrate_circle(
        lambda t: body.support_at(t) ** 2 - _support_deriv(body, t) ** 2,
        breakpoints=body.angular_breakpoints(), abs_tol=1e-10)
    return 0.5 * val


def body_perimeter(body):
    if body.kind == "polygon":
        return float(np.sum(body.edge_lengths()))
    val, _ = quadrature.integrate_circle(
        lambda t: body.support_at(t),
        breakpoints=body.angular_breakpoints(), abs_tol=1e-10)
    return val


def _support_deriv(body, t):
    d = body.h1(t)
    ref = body.reference_origin
    if ref[0] != 0.0 or ref[1] != 0.0:
        d = d - ref[0] * np.sin(t) + ref[1] * np.cos(t)
    return d


def translate(body, offset):
    """The same body shifted by ``offset`` (support functions re-based)."""
    off = np.asarray(offset, dtype=float)
    if body.kind == "polygon":
        return ConvexBody.polygon(body.vertices + off)
    return ConvexBody.smooth(
        lambda t: body.support_at(t) + off[0] * np.cos(t) + off[1] * np.sin(t),
        lambda t: _support_deriv(body, t) - off[0] * np.sin(t)
        + off[1] * np.cos(t),
        body.h2,
        breakpoints=body.breakpoints, check_derivatives=False)


# ---------------- Hausdorff distance via support functions ----------------

def _support_of(obj, thetas):
    if hasattr(obj, "support_at"):
        return np.asarray(obj.support_at(thetas), dtype=float)
    raise ValidationError("object does not expose a support function")


def hausdorff_support(a, b, tol=1e-6):
    """max_theta |p_o(a) - p_o(b)| on a refined grid (convex-set Hausdorff
    distance when both sets are convex about the origin)."""
    n = 1024
    prev = None
    while n <= (1 << 17):
        grid = np.linspace(0.0, TWO_PI, n, endpoint=False)
        cur = float(np.max(np.abs(_support_of(a, grid) - _support_of(b, grid))))
        if prev is not None and abs(cur - prev) < tol:
            return cur
        prev = cur
        n *= 2
    return prev


# ---------------- JSON schema ----------------

def body_to_json(body):
    if body.kind == "polygon":
        return {"kind": "polygon", "vertices": body.vertices.tolist()}
    return {"kind": "smooth", "model": "custom-grid",
            "params": {"h": body.support_at(
                np.linspace(0.0, TWO_PI, 1024, endpoint=False)).tolist()}}


def body_from_json(spec):
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("kind")
    if kind == "polygon":
        return ConvexBody.polygon(spec["vertices"])
    if kind == "smooth":
        model = spec.get("model")
        params = spec.get("params", {})
        if model == "disk":
            return ConvexBody.disk(params.get("radius", 1.0),
                                   params.get("center", (0.0, 0.0)))
        if model == "ellipse":
            return ConvexBody.ellipse(params["a"], params["b"])
        if model == "custom-grid":
            return ConvexBody.from_support_grid(params["h"])
        raise ValidationError(f"unknown smooth model {model!r}")
    raise ValidationError(f"unknown body kind {kind!r}")


def square_body(half_side=1.0):
    """The square [-c, c]^2 as a polygon body."""
    c = float(half_side)
    return ConvexBody.polygon([(c, -c), (c, c), (-c, c), (-c, -c)])
