"""Area gained by the Voronoi flower when one exterior point joins the body.

The exact increment uses the support-function identity
``p_o(K u {x}, theta) = max(p_o(K, theta), <x, u_theta>)``: the gain is a
single angular integral over the window where the new point dominates.
Closed-form small-offset asymptotics are exposed separately for the smooth
and polygonal cases; there is no automatic switching between the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import DomainError
from .geometry import (TWO_PI, ConvexBody, _breaks_in, boundary_point,
                       unit_vector)


@dataclass(frozen=True)
class IncrementQuery:
    """A body and the candidate extra point; points inside K are legal and
    simply contribute a zero increment."""

    body: ConvexBody
    exterior_point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "exterior_point",
                           np.asarray(self.exterior_point, dtype=float))


def _dominance_window(body, x):
    """The (single) angular interval where <x, u_theta> > p_o(K, theta),
    or None when x adds nothing to the flower."""
    grid = np.linspace(0.0, TWO_PI, 8192, endpoint=False)
    x = np.asarray(x, dtype=float)

    def g_arr(t):
        return (x[0] * np.cos(t) + x[1] * np.sin(t)) - body.support_at(t)

    vals = g_arr(grid)
    k = int(np.argmax(vals))
    t_peak, g_peak = grid[k], vals[k]
    if g_peak <= 0.0:
        # refine the grid maximum before giving up (window may be narrow)
        lo, hi = grid[k] - TWO_PI / 8192, grid[k] + TWO_PI / 8192
        for _ in range(90):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            if g_arr(np.array([m1]))[0] < g_arr(np.array([m2]))[0]:
                lo = m1
            else:
                hi = m2
        t_peak = 0.5 * (lo + hi)
        g_peak = float(g_arr(np.array([t_peak]))[0])
        if g_peak <= 0.0:
            return None

    def g(t):
        return float(g_arr(np.asarray([t]))[0])

    def edge(inside, outside):
        # g(inside) > 0 >= g(outside)
        for _ in range(70):
            mid = 0.5 * (inside + outside)
            if g(mid) > 0:
                inside = mid
            else:
                outside = mid
        return 0.5 * (inside + outside)

    # the window has length < pi since x is a single point outside K
    t_hi = edge(t_peak, t_peak + np.pi)
    t_lo = edge(t_peak, t_peak - np.pi)
    return t_lo, t_hi


def increment_area_exact(query):
    """A(F_o(K u {x})) - A(F_o(K)) for x = query.exterior_point, exact up
    to quadrature error <= 1e-10.  Returns 0 when the point is already in
    the flower hull of K (i.e. in K itself)."""
    body, x = query.body, query.exterior_point
    window = _dominance_window(body, x)
    if window is None:
        return 0.0
    t_lo, t_hi = window

    def f(t):
        xi = x[0] * np.cos(t) + x[1] * np.sin(t)
        p = body.support_at(t)
        return np.maximum(xi, p) ** 2 - p ** 2

    val, _ = quadrature.integrate(f, t_lo, t_hi,
                                  breakpoints=_breaks_in(body, t_lo, t_hi),
                                  abs_tol=1e-12)
    return 0.5 * val


def increment_area_smooth_asymptotic(body, theta, h):
    """Leading-order increment for x = s + h*n_s on a smooth body:
    h^{3/2} * 2^{5/2} 3^{-1} r_s^{-1/2} <s, n_s>."""
    if h <= 0:
        raise DomainError("offset h must be positive")
    s, r = boundary_point(body, theta)
    sn = float(np.dot(s, unit_vector(theta)))
    return h ** 1.5 * 2 ** 2.5 / 3.0 * r ** -0.5 * sn


def edge_frame_point(body, i, rho, alpha):
    """The exterior point at polar coordinates (rho, alpha) from vertex a_i,
    measured against the edge (a_i, a_{i+1}): first axis along the edge,
    second axis the outward normal."""
    V = body.vertices
    n = len(V)
    a = V[i % n]
    e = V[(i + 1) % n] - a
    L = float(np.hypot(e[0], e[1]))
    t_hat = e / L
    n_hat = np.array([t_hat[1], -t_hat[0]])  # outward for CCW polygons
    return a + rho * (np.cos(alpha) * t_hat + np.sin(alpha) * n_hat)


def increment_area_polygon_asymptotic(body, i, rho, alpha):
    """Leading-order increment for a point in the strip above edge i:
    alpha^2 * (||o_i|| / 2) * rho * L_i / (L_i - rho)."""
    if body.kind != "polygon":
        raise DomainError("polygon asymptotic needs a polygon body")
    n = len(body.vertices)
    L = float(body.edge_lengths()[i % n])
    along = rho * np.cos(alpha)
    if not (0.0 < along < L) or rho >= L:
        raise DomainError(
            "point lies outside the edge strip S_i; use increment_area_exact")
    oi = float(body.edge_foot_distances()[i % n])
    return alpha ** 2 * (oi / 2.0) * rho * L / (L - rho)
