"""Convex bodies, polar norms and geometric statistics of point sets."""

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "ConvexBody",
    "SamplingSet",
    "GapEstimate",
    "InsufficientExtentError",
    "box",
    "ball",
    "norm_D",
    "norm_polar",
    "volumes",
    "gap",
    "separation",
    "covering_number",
    "polar_tree_query",
]

_DUP_TOL = 1e-12


class InsufficientExtentError(ValueError):
    """A query needs the sampling set beyond the radius it was realized to."""


@dataclass(frozen=True)
class ConvexBody:
    """Centered symmetric convex body ``D`` (a cube or a Euclidean ball).

    ``param`` is the half-width of the cube or the radius of the ball.
    """

    kind: str
    dim: int
    param: float

    def __post_init__(self):
        if self.kind not in ("box", "ball"):
            raise ValueError(f"unknown body kind {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not self.param > 0:
            raise ValueError("body parameter must be positive")

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise ValueError(
                f"expected vectors of dimension {self.dim}, got shape {x.shape}"
            )
        return x

    def norm(self, x):
        """Minkowski functional ``|x|_D`` over the last axis."""
        x = self._check(x)
        if self.kind == "box":
            return np.max(np.abs(x), axis=-1) / self.param
        return np.linalg.norm(x, axis=-1) / self.param

    def polar_norm(self, z):
        """``|z|_{D°}``, the support function of ``D``."""
        z = self._check(z)
        if self.kind == "box":
            return self.param * np.sum(np.abs(z), axis=-1)
        return self.param * np.linalg.norm(z, axis=-1)

    @property
    def volume(self):
        if self.kind == "box":
            return (2.0 * self.param) ** self.dim
        return _unit_ball_volume(self.dim) * self.param**self.dim

    @property
    def polar_volume(self):
        if self.kind == "box":
            # cross-polytope of radius 1/a
            return (2.0 / self.param) ** self.dim / math.factorial(self.dim)
        return _unit_ball_volume(self.dim) / self.param**self.dim

    @property
    def m_D(self):
        """Largest Euclidean norm of a point of ``D``."""
        if self.kind == "box":
            return self.param * math.sqrt(self.dim)
        return self.param

    @property
    def c_polar(self):
        """Smallest ``c`` with ``|z|_2 <= c |z|_{D°}``."""
        return 1.0 / self.param

    @property
    def polar_p(self):
        """Minkowski exponent of the polar norm (for KD-tree queries)."""
        return 1 if self.kind == "box" else 2

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "param": self.param}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], int(d["dim"]), float(d["param"]))

    @classmethod
    def parse(cls, text):
        """Parse ``"box:a:d"`` or ``"ball:r:d"``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"body spec must look like 'box:0.5:1', got {text!r}")
        return cls(parts[0], int(parts[2]), float(parts[1]))


def box(half_width, dim=1):
    return ConvexBody("box", dim, float(half_width))


def ball(radius, dim=2):
    return ConvexBody("ball", dim, float(radius))


def _unit_ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def norm_D(body, x):
    return body.norm(x)


def norm_polar(body, z):
    return body.polar_norm(z)


def volumes(body):
    """Return ``(meas(D), meas(D°))``."""
    return body.volume, body.polar_volume


@dataclass
class SamplingSet:
    """Finite realization of a countable sampling set.

    ``points`` has shape ``(n, d)``.  The realization represents the
    conceptual infinite set faithfully inside ``extent_radius``.
    """

    points: np.ndarray
    extent_radius: float
    generator: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        self.points = pts
        self.extent_radius = float(self.extent_radius)
        if len(pts):
            r = np.linalg.norm(pts, axis=1)
            if r.max() > self.extent_radius * (1 + 1e-12) + 1e-12:
                raise ValueError("points lie outside extent_radius")
        if _has_duplicates(pts):
            raise ValueError("sampling set contains duplicate points")

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def radii(self):
        return np.linalg.norm(self.points, axis=1)


def _has_duplicates(pts):
    if len(pts) < 2:
        return False
    tree = cKDTree(pts)
    return bool(tree.query_pairs(_DUP_TOL, p=np.inf))


class GapEstimate(NamedTuple):
    """Grid estimate of a gap; the true supremum over the probed region
    lies in ``[value, value + error]``."""

    value: float
    error: float

    @property
    def upper(self):
        return self.value + self.error


def polar_tree_query(tree, body, probes, k=1):
    """Nearest neighbours in the polar norm of ``body``.

    Returns ``(distances, indices)`` as :meth:`cKDTree.query` does, with
    distances already in ``|.|_{D°}`` units.
    """
    dist, idx = tree.query(probes, k=k, p=body.polar_p)
    return dist * body.param, idx


def _probe_grid(radius, step, dim, center=None):
    n = int(math.floor(radius / step + 1e-9))
    ticks = step * np.arange(-n, n + 1)
    mesh = np.stack(np.meshgrid(*([ticks] * dim), indexing="ij"), -1).reshape(-1, dim)
    mesh = mesh[np.linalg.norm(mesh, axis=1) <= radius * (1 + 1e-12)]
    if center is not None:
        mesh = mesh + np.asarray(center, dtype=float)
    return mesh


def gap(sset, body, probe_radius, grid_step):
    """Estimate the gap ``sup_z min_w |z - w|_{D°}`` over ``B_probe_radius``.

    For ``d >= 2`` a regular grid of spacing ``grid_step`` restricted to the
    ball is probed and the returned error bounds how far the supremum over
    the continuous region may exceed the grid value.  In one dimension the
    supremum is found exactly (midpoints of consecutive samples) and the
    error is zero.
    """
    if len(sset) == 0:
        raise ValueError("empty sampling set")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    if sset.dim != body.dim:
        raise ValueError("dimension mismatch between set and body")
    if probe_radius > sset.extent_radius:
        raise InsufficientExtentError(
            f"probe radius {probe_radius} exceeds extent {sset.extent_radius}"
        )
    if sset.dim == 1:
        best = _gap_1d(np.sort(sset.points[:, 0]), probe_radius) * body.param
        err = 0.0
    else:
        tree = cKDTree(sset.points)
        best = 0.0
        probes = _probe_grid(probe_radius, grid_step, sset.dim)
        for chunk in np.array_split(probes, max(1, len(probes) // 200_000)):
            dist, _ = polar_tree_query(tree, body, chunk)
            best = max(best, float(dist.max()))
        err = float(body.polar_norm(np.full(sset.dim, grid_step / 2.0)))
    if probe_radius + body.c_polar * best > sset.extent_radius * (1 + 1e-12):
        raise InsufficientExtentError(
            "nearest samples of probed points may lie outside the realized extent"
        )
    return GapEstimate(best, err)


def _gap_1d(x, radius):
    # exact: the distance to the nearest sample peaks at midpoints or at +-radius
    cands = [np.min(np.abs(x - radius)), np.min(np.abs(x + radius))]
    mids = 0.5 * (x[1:] + x[:-1])
    inside = np.abs(mids) <= radius
    if inside.any():
        cands.append(float(np.max(0.5 * np.diff(x)[inside])))
    return float(max(cands))


def separation(sset, norm="polar", body=None):
    """Minimum pairwise distance in the polar norm of ``body`` or Euclidean."""
    if len(sset) < 2:
        raise ValueError("separation is undefined for fewer than two points")
    tree = cKDTree(sset.points)
    if norm == "euclidean":
        dist, _ = tree.query(sset.points, k=2)
        return float(dist[:, 1].min())
    if norm != "polar" or body is None:
        raise ValueError("polar separation needs a body")
    dist, _ = polar_tree_query(tree, body, sset.points, k=2)
    return float(dist[:, 1].min())


def covering_number(sset, probe_radius):
    """Largest number of points in a closed unit cube ``z + [0,1]^d``.

    Lower corners ``z`` range over ``B_probe_radius``.  Candidate corners
    are every combination of point coordinates (a maximal cube can always
    be slid until each lower face touches a point) plus a 0.05 grid.
    """
    d = sset.dim
    if len(sset) == 0:
        return 0
    if probe_radius > sset.extent_radius - math.sqrt(d) + 1e-12:
        raise InsufficientExtentError("probe radius too close to the extent")
    pts = sset.points
    tol = 1e-12

    def count_max(sub, axis, corner):
        if axis == d:
            if np.linalg.norm(corner) <= probe_radius + tol:
                return len(sub)
            return 0
        best = 0
        coords = np.unique(sub[:, axis])
        order = np.argsort(sub[:, axis], kind="stable")
        srt = sub[order]
        vals = srt[:, axis]
        for c in coords:
            lo = np.searchsorted(vals, c - tol, side="left")
            hi = np.searchsorted(vals, c + 1 + tol, side="right")
            if hi - lo <= best:
                continue
            best = max(best, count_max(srt[lo:hi], axis + 1, corner + [c]))
        return best

    # only points that can share a cube with a corner in the probe ball
    near = pts[np.linalg.norm(pts, axis=1) <= probe_radius + math.sqrt(d) + tol]
    best = count_max(near, 0, []) if len(near) else 0
    tree = cKDTree(near) if len(near) else None
    if tree is not None:
        corners = _probe_grid(probe_radius, 0.05, d)
        for chunk in np.array_split(corners, max(1, len(corners) // 100_000)):
            cands = tree.query_ball_point(chunk + 0.5, 0.5 + tol, p=np.inf)
            for c, idx in zip(chunk, cands):
                if len(idx) > best:
                    inside = np.all(
                        (near[idx] >= c - tol) & (near[idx] <= c + 1 + tol), axis=1
                    )
                    best = max(best, int(inside.sum()))
    return int(best)
