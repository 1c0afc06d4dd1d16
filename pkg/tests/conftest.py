import numpy as np
import pytest

from flowercell import ConvexBody, square_body


@pytest.fixture
def unit_disk():
    return ConvexBody.disk(1.0)


@pytest.fixture
def unit_square():
    return square_body(1.0)


@pytest.fixture
def ellipse21():
    return ConvexBody.ellipse(2.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_ccw_polygon(rng, n=7, r_lo=0.5, r_hi=1.5, center=(0.0, 0.0)):
    """A random strictly convex polygon containing the origin."""
    angles = np.sort(rng.uniform(0, 2 * np.pi, n))
    while np.min(np.diff(np.r_[angles, angles[0] + 2 * np.pi])) < 0.15:
        angles = np.sort(rng.uniform(0, 2 * np.pi, n))
    radii = rng.uniform(r_lo, r_hi, n)
    pts = np.c_[radii * np.cos(angles), radii * np.sin(angles)]
    pts += np.asarray(center)
    # convexify by taking the hull (monotone chain via numpy)
    from flowercell.shape import _monotone_chain_indices
    idx = _monotone_chain_indices(pts)
    hull = pts[idx]
    if _polygon_is_ccw(hull) is False:
        hull = hull[::-1]
    return hull


def _polygon_is_ccw(V):
    x, y = V[:, 0], V[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) > 0
