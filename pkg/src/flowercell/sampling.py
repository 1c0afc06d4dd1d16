"""Seeded sampling of the conditioned point and line processes.

All randomness flows through numpy's Philox counter-based generator.  A
stream is identified by ``(seed, *stream_ids)``; the ids are folded into
the 128-bit Philox key with a splitmix64 mix, so annulus extensions and
parallel replicates never share a stream and every draw is reproducible
bit-for-bit across platforms.

Points that are certain to be rejected (inside the exclusion inradius) are
never materialized; this leaves the law of the returned sample identical
to thinning a full-disk uniform Poisson sample.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ValidationError
from .geometry import TWO_PI, steiner_point, flower_rest

_MASK64 = (1 << 64) - 1


def _splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31), state


def stream_generator(seed, stream=()):
    """A Philox generator keyed by (seed, folded stream ids)."""
    acc = int(seed) & _MASK64
    for part in stream:
        word = part if isinstance(part, int) else int.from_bytes(
            str(part).encode(), "little") & _MASK64
        mixed, _ = _splitmix64(acc ^ (word & _MASK64))
        acc = mixed
    key0 = int(seed) & _MASK64
    key1 = acc
    return np.random.Generator(np.random.Philox(key=key0 + (key1 << 64)))


# ---------------- exclusion regions ----------------

@dataclass(frozen=True)
class RadialExclusion:
    """A starlike excluded region { r <= radial(theta) } around the origin."""

    radial: object  # vectorized callable theta -> polar radius
    r_min: float
    r_max: float
    description: str

    def contains_polar(self, r, theta):
        return r <= self.radial(theta)


def flower_exclusion(body, scale=2.0):
    def radial(t):
        return scale * body.support_at(t)

    return RadialExclusion(radial, scale * body.min_support(),
                           scale * body.max_support(),
                           f"{scale:g}*flower")


def domain_exclusion(domain):
    def radial(t):
        return domain.radial_at(t)

    return RadialExclusion(radial, domain.min_radius(), domain.max_radius(),
                           "starlike-domain")


# ---------------- point process ----------------

@dataclass(frozen=True)
class PointSample:
    """Realized conditioned Poisson point process, in draw order (annulus by
    annulus) so that a sample is a prefix of any of its extensions."""

    points: np.ndarray  # (n, 2)
    lam: float
    truncation_radius: float
    seed: int
    exclusion: RadialExclusion
    marks: np.ndarray = None  # (n,) uniforms for thinning coupling
    stream: tuple = ()
    annuli: tuple = (0.0,)  # radii bounding the annuli drawn so far

    def __len__(self):
        return len(self.points)


def _draw_annulus_points(gen, lam, r_lo, r_hi, exclusion):
    if lam <= 0:
        return np.empty((0, 2)), np.empty(0)
    a = max(r_lo, exclusion.r_min)
    if a >= r_hi:
        return np.empty((0, 2)), np.empty(0)
    mean = lam * np.pi * (r_hi * r_hi - a * a)
    n = int(gen.poisson(mean))
    u = gen.random((n, 3))
    r = np.sqrt(a * a + u[:, 0] * (r_hi * r_hi - a * a))
    theta = u[:, 1] * TWO_PI
    keep = ~exclusion.contains_polar(r, theta)
    pts = np.column_stack([r[keep] * np.cos(theta[keep]),
                           r[keep] * np.sin(theta[keep])])
    return pts, u[:, 2][keep]


def sample_conditioned_points(lam, body, radius=None, seed=0, stream=(),
                              exclusion=None):
    """Poisson(lam) points in the disk of ``radius``, conditioned to avoid
    twice the Voronoi flower of K (or a custom exclusion region)."""
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    if exclusion is None:
        exclusion = flower_exclusion(body, 2.0)
    if radius is None:
        radius = 4.0 * exclusion.r_max
    if radius <= exclusion.r_max:
        raise DomainError(
            f"truncation radius {radius:g} must exceed the exclusion extent "
            f"{exclusion.r_max:g}")
    gen = stream_generator(seed, tuple(stream) + ("annulus", 0))
    pts, marks = _draw_annulus_points(gen, lam, 0.0, radius, exclusion)
    return PointSample(points=pts, lam=float(lam),
                       truncation_radius=float(radius), seed=int(seed),
                       exclusion=exclusion, marks=marks,
                       stream=tuple(stream), annuli=(0.0, float(radius)))


def extend_sample(sample, new_radius):
    """Append fresh points in the annulus (old radius, new_radius]; the union
    is distributed as one sample drawn directly at new_radius."""
    if new_radius < sample.truncation_radius:
        raise DomainError("cannot shrink a sample's truncation radius")
    if new_radius == sample.truncation_radius:
        return sample
    k = len(sample.annuli) - 1  # next annulus index
    gen = stream_generator(sample.seed, sample.stream + ("annulus", k))
    pts, marks = _draw_annulus_points(gen, sample.lam,
                                      sample.truncation_radius,
                                      float(new_radius), sample.exclusion)
    return replace(sample,
                   points=np.vstack([sample.points, pts]),
                   marks=np.concatenate([sample.marks, marks]),
                   truncation_radius=float(new_radius),
                   annuli=sample.annuli + (float(new_radius),))


def thin_sample(sample, lam_new):
    """Coupled thinning to a lower intensity using the stored marks: the
    result is the conditioned process at lam_new, and its points are a
    subset of the original's."""
    if not (0 < lam_new <= sample.lam):
        raise DomainError("thinning requires 0 < lam_new <= lam")
    frac = lam_new / sample.lam
    keep = sample.marks < frac
    return replace(sample, points=sample.points[keep],
                   marks=sample.marks[keep] / frac, lam=float(lam_new))


# ---------------- line process ----------------

@dataclass(frozen=True)
class LineSample:
    """Realized conditioned Poisson line process: rows (r, theta) describe
    the line { y : <y, u_theta> = r } with r > p_o(K, theta)."""

    lines: np.ndarray  # (n, 2) rows (r, theta)
    lam: float
    truncation_radius: float
    seed: int
    body: object
    stream: tuple = ()
    annuli: tuple = (0.0,)

    def __len__(self):
        return len(self.lines)


def _draw_annulus_lines(gen, lam, body, r_lo, r_hi):
    a = max(r_lo, body.min_support())
    if a >= r_hi or lam <= 0:
        return np.empty((0, 2))
    mean = lam * TWO_PI * (r_hi - a)
    n = int(gen.poisson(mean))
    u = gen.random((n, 2))
    r = a + u[:, 0] * (r_hi - a)
    theta = u[:, 1] * TWO_PI
    keep = r > body.support_at(theta)
    return np.column_stack([r[keep], theta[keep]])


def sample_conditioned_lines(lam, body, radius=None, seed=0, stream=()):
    """Isotropic Poisson lines with measure lam * dr * dtheta, conditioned
    to miss K, truncated at distance ``radius`` from the origin."""
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    if radius is None:
        radius = 8.0 * body.max_support()
    if radius <= body.max_support():
        raise DomainError("radius must exceed max p_o(K, .)")
    gen = stream_generator(seed, tuple(stream) + ("lines", 0))
    lines = _draw_annulus_lines(gen, lam, body, 0.0, float(radius))
    return LineSample(lines=lines, lam=float(lam),
                      truncation_radius=float(radius), seed=int(seed),
                      body=body, stream=tuple(stream),
                      annuli=(0.0, float(radius)))


def extend_line_sample(sample, new_radius):
    if new_radius < sample.truncation_radius:
        raise DomainError("cannot shrink a sample's truncation radius")
    if new_radius == sample.truncation_radius:
        return sample
    k = len(sample.annuli) - 1
    gen = stream_generator(sample.seed, sample.stream + ("lines", k))
    lines = _draw_annulus_lines(gen, sample.lam, sample.body,
                                sample.truncation_radius, float(new_radius))
    return replace(sample, lines=np.vstack([sample.lines, lines]),
                   truncation_radius=float(new_radius),
                   annuli=sample.annuli + (float(new_radius),))


# ---------------- conditional nucleus ----------------

def sample_nucleus(lam, body, n, seed=0, stream=(), return_trace=False):
    """Draw n nuclei from the density proportional to exp(-4 lam A(F_x(K)))
    for a body whose Steiner point sits at the origin.

    Rejection sampling: proposals are centered Gaussians with per-coordinate
    variance 1/(2 pi lam); by the flower decomposition
    A(F_x) = A(F_o) + (pi/2)||x||^2 - R(x) with 0 <= R(x) <= (pi/4)||x||^2,
    the acceptance ratio exp(-pi lam ||x||^2 + 4 lam R(x)) never exceeds 1.
    """
    st = steiner_point(body)
    if float(np.hypot(*st)) > 1e-8:
        raise DomainError("sample_nucleus requires st(K) = o; translate the "
                          "body by -steiner_point(body) first")
    if lam <= 0 or n <= 0:
        raise DomainError("lam and n must be positive")
    gen = stream_generator(seed, tuple(stream) + ("nucleus",))
    sigma = 1.0 / np.sqrt(2.0 * np.pi * lam)
    inradius = body.min_support()
    accepted = []
    trace = []
    while sum(len(a) for a in accepted) < n:
        m = max(64, 2 * (n - sum(len(a) for a in accepted)))
        x = gen.normal(0.0, sigma, size=(m, 2))
        u = gen.random(m)
        r2 = np.einsum("ij,ij->i", x, x)
        log_ratio = -np.pi * lam * r2
        far = np.hypot(x[:, 0], x[:, 1]) >= inradius
        for j in np.flatnonzero(far):
            log_ratio[j] += 4.0 * lam * flower_rest(body, x[j])
        ratio = np.exp(log_ratio)
        if np.any(ratio > 1.0 + 1e-12):
            raise AssertionError("rejection ratio exceeded 1; flower "
                                 "decomposition violated")
        acc = u < ratio
        accepted.append(x[acc])
        if return_trace:
            trace.append(np.column_stack([x, ratio]))
    out = np.vstack(accepted)[:n]
    if return_trace:
        return out, np.vstack(trace)
    return out
