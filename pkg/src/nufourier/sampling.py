"""Generators for sampling sets and truncation to Euclidean balls.

Every generator is a pure function of its arguments; the jittered family
draws from a generator seeded locally in each call.
"""

import math

import numpy as np

from .geometry import InsufficientExtentError, SamplingSet

__all__ = [
    "gen_grid",
    "gen_jittered",
    "gen_radial",
    "gen_spiral",
    "truncate",
    "save_points_csv",
    "load_points_csv",
]


def _lattice_indices(radius, dim):
    n = int(math.floor(radius + 1e-9))
    ticks = np.arange(-n, n + 1)
    k = np.stack(np.meshgrid(*([ticks] * dim), indexing="ij"), -1).reshape(-1, dim)
    return k[np.linalg.norm(k, axis=1) <= radius + 1e-9]


def gen_grid(h, d, extent_radius):
    """Points of ``h Z^d`` within the Euclidean ball of radius ``extent_radius``."""
    if h <= 0:
        raise ValueError("grid step must be positive")
    k = _lattice_indices(extent_radius / h + 1, d)
    pts = h * k
    keep = np.linalg.norm(pts, axis=1) <= extent_radius * (1 + 1e-12)
    return SamplingSet(
        pts[keep],
        extent_radius,
        {"kind": "grid", "h": float(h), "dim": int(d)},
    )


def gen_jittered(h, tau, d, extent_radius, seed):
    """Perturbed grid ``h k + u_k`` with ``u_k`` uniform on ``[-tau h, tau h]^d``.

    One perturbation is drawn for every ``k`` in ``Z^d ∩ B_{extent/h + 1}``
    (in lexicographic order), then points outside the extent are dropped.
    The Euclidean gap is at most ``h (1/2 + tau) sqrt(d)``.
    """
    if not 0 <= tau < 0.5:
        raise ValueError("jitter fraction must lie in [0, 1/2)")
    if h <= 0:
        raise ValueError("grid step must be positive")
    rng = np.random.default_rng(seed)
    k = _lattice_indices(extent_radius / h + 1, d)
    u = rng.uniform(-tau * h, tau * h, size=k.shape)
    pts = h * k + u
    keep = np.linalg.norm(pts, axis=1) <= extent_radius * (1 + 1e-12)
    return SamplingSet(
        pts[keep],
        extent_radius,
        {"kind": "jittered", "h": float(h), "tau": float(tau), "dim": int(d), "seed": int(seed)},
    )


def gen_radial(n_lines, radial_step, extent_radius):
    """Samples on ``n_lines`` full lines through the origin at angles ``pi j / n``."""
    if n_lines < 1 or radial_step <= 0:
        raise ValueError("need n_lines >= 1 and radial_step > 0")
    m = int(math.floor(extent_radius / radial_step + 1e-9))
    r = radial_step * np.concatenate([np.arange(-m, 0), np.arange(1, m + 1)])
    theta = np.pi * np.arange(n_lines) / n_lines
    pts = [np.zeros((1, 2))]
    for t in theta:
        pts.append(np.stack([r * np.cos(t), r * np.sin(t)], -1))
    pts = np.concatenate(pts)
    # cos(pi/2) is not exactly zero
    pts[np.abs(pts) < 1e-15 * max(1.0, extent_radius)] = 0.0
    return SamplingSet(
        pts,
        extent_radius,
        {"kind": "radial", "n_lines": int(n_lines), "radial_step": float(radial_step)},
    )


def gen_spiral(pitch, arc_step, extent_radius):
    """Archimedean spiral ``r = pitch * theta / (2 pi)`` sampled by arc length.

    The angle advances by ``arc_step`` over the arc speed at a predicted
    step end, so consecutive samples are at most ``arc_step`` apart.
    """
    if pitch <= 0 or arc_step <= 0:
        raise ValueError("pitch and arc_step must be positive")
    b = pitch / (2 * np.pi)
    thetas = []
    theta = 0.0
    while b * theta <= extent_radius:
        thetas.append(theta)
        # speed at the predicted end of the step, so chords never exceed arc_step
        ahead = theta + arc_step / math.hypot(b, b * theta)
        theta += arc_step / math.hypot(b, b * ahead)
    thetas = np.asarray(thetas)
    r = b * thetas
    pts = np.stack([r * np.cos(thetas), r * np.sin(thetas)], -1)
    return SamplingSet(
        pts,
        extent_radius,
        {"kind": "spiral", "pitch": float(pitch), "arc_step": float(arc_step)},
    )


def truncate(sset, K):
    """``Omega ∩ B_K``; the result represents the set only inside ``K``."""
    if K > sset.extent_radius * (1 + 1e-12):
        raise InsufficientExtentError(
            f"cannot truncate at {K}: set realized only to {sset.extent_radius}"
        )
    keep = sset.radii() <= K * (1 + 1e-12) + 1e-300
    gen = dict(sset.generator)
    return SamplingSet(sset.points[keep], K, gen)


def save_points_csv(path, points):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    header = ",".join(f"x{i + 1}" for i in range(points.shape[1]))
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in points:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_points_csv(path):
    """Read a CSV written by :func:`save_points_csv`; returns ``(n, d)``."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    cols = [i for i, name in enumerate(header) if name.startswith("x")]
    return data[:, cols].reshape(-1, len(cols))
