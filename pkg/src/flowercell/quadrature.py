"""Adaptive Gauss-Legendre panel quadrature on angular intervals.

Panels are split at caller-supplied breakpoints (polygon normal angles,
piecewise-definition seams) before adaptive bisection, so integrands only
need to be smooth inside each panel.  The integrand must accept a numpy
array of nodes and return an array of values.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError

_NODES_21, _WEIGHTS_21 = np.polynomial.legendre.leggauss(21)
_NODES_10, _WEIGHTS_10 = np.polynomial.legendre.leggauss(10)


def _panel(f, a, b, nodes, weights):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(weights, f(mid + half * nodes)))


def integrate(f, a, b, *, breakpoints=(), abs_tol=1e-10, max_depth=48):
    """Integrate f over [a, b], returning (value, achieved_error_estimate).

    Raises NumericError when bisection bottoms out before reaching abs_tol.
    """
    if b <= a:
        return 0.0, 0.0
    cuts = [a]
    for t in sorted(breakpoints):
        if a < t < b and t - cuts[-1] > 1e-14:
            cuts.append(float(t))
    cuts.append(b)

    total = 0.0
    err = 0.0
    # stack of (lo, hi, coarse_value, depth)
    stack = [(cuts[i], cuts[i + 1], None, 0) for i in range(len(cuts) - 1)]
    tol_per = abs_tol / max(len(stack), 1)
    while stack:
        lo, hi, coarse, depth = stack.pop()
        if coarse is None:
            coarse = _panel(f, lo, hi, _NODES_10, _WEIGHTS_10)
        fine = _panel(f, lo, hi, _NODES_21, _WEIGHTS_21)
        delta = abs(fine - coarse)
        if delta <= tol_per or hi - lo < 1e-14:
            total += fine
            err += delta
            continue
        if depth >= max_depth:
            raise NumericError(
                f"quadrature did not converge on [{lo}, {hi}]; "
                f"achieved ~{delta:.3e} against tolerance {tol_per:.3e}",
                achieved=delta,
            )
        mid = 0.5 * (lo + hi)
        stack.append((lo, mid, None, depth + 1))
        stack.append((mid, hi, None, depth + 1))
    return total, err


def integrate_circle(f, *, breakpoints=(), abs_tol=1e-10):
    """Integrate f over one full period [0, 2*pi)."""
    two_pi = 2.0 * np.pi
    bks = [t % two_pi for t in breakpoints]
    return integrate(f, 0.0, two_pi, breakpoints=bks, abs_tol=abs_tol)
