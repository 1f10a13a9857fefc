"""Voronoi weights of sampling sets in the polar norm of the spectrum.

In one dimension every norm is a multiple of ``|.|`` and Voronoi cells are
midpoint intervals, so weights are exact.  In higher dimensions the cell
measures are estimated by assigning probes (a regular grid or seeded
uniform samples) to their nearest sample.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import ConvexBody, GapEstimate, InsufficientExtentError, polar_tree_query

__all__ = [
    "WeightedSamples",
    "voronoi_weights",
    "voronoi_weights_1d",
    "voronoi_weights_nd",
    "lattice_weights",
    "MIN_PROBES",
]

MIN_PROBES = 10_000
_CHUNK = 65_536


@dataclass
class WeightedSamples:
    """Points of ``Omega ∩ B_K`` paired with their Voronoi weights.

    ``gap`` is an upper estimate of the polar-norm gap of the set over the
    weight domain and ``cell_radius`` an upper estimate of the Euclidean
    radius of any Voronoi cell; both feed the analytic tail and Bessel
    bounds.  ``generator`` echoes the sampling-set metadata.
    """

    points: np.ndarray
    weights: np.ndarray
    weight_domain_radius: float
    body: ConvexBody
    gap: float
    cell_radius: float
    method: dict = field(default_factory=dict)
    generator: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        pts = np.asarray(self.points, dtype=float)
        self.points = pts.reshape(len(self.weights), pts.shape[-1] if pts.ndim == 2 else -1)

    def __len__(self):
        return len(self.weights)

    @property
    def dim(self):
        return self.points.shape[1]

    def radii(self):
        return np.linalg.norm(self.points, axis=1)

    def restrict(self, lo=None, hi=None):
        """Samples with ``lo < |w| <= hi`` (either bound optional)."""
        r = self.radii()
        keep = np.ones(len(r), bool)
        if lo is not None:
            keep &= r > lo * (1 + 1e-12)
        if hi is not None:
            keep &= r <= hi * (1 + 1e-12)
        return WeightedSamples(
            self.points[keep],
            self.weights[keep],
            self.weight_domain_radius if hi is None else min(hi, self.weight_domain_radius),
            self.body,
            self.gap,
            self.cell_radius,
            dict(self.method),
            dict(self.generator),
        )

    def scaled(self, t):
        """Same points with every weight multiplied by ``t``."""
        return WeightedSamples(
            self.points, t * self.weights, self.weight_domain_radius, self.body,
            self.gap, self.cell_radius, dict(self.method), dict(self.generator),
        )

    def metadata(self):
        return {
            "weight_domain_radius": self.weight_domain_radius,
            "body": self.body.to_dict(),
            "gap": self.gap,
            "cell_radius": self.cell_radius,
            "method": self.method,
            "generator": self.generator,
        }

    def save(self, csv_path, json_path=None):
        """Write ``x1..xd,weight`` rows plus a JSON sidecar of metadata."""
        d = self.dim
        header = ",".join([f"x{i + 1}" for i in range(d)] + ["weight"])
        with open(csv_path, "w", newline="") as fh:
            fh.write(header + "\n")
            for p, w in zip(self.points, self.weights):
                fh.write(",".join(f"{v:.17g}" for v in (*p, w)) + "\n")
        if json_path is None:
            json_path = str(csv_path) + ".json"
        with open(json_path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, csv_path, json_path=None):
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        if json_path is None:
            json_path = str(csv_path) + ".json"
        with open(json_path) as fh:
            meta = json.load(fh)
        return cls(
            data[:, :-1],
            data[:, -1],
            meta["weight_domain_radius"],
            ConvexBody.from_dict(meta["body"]),
            meta["gap"],
            meta["cell_radius"],
            meta.get("method", {}),
            meta.get("generator", {}),
        )


def voronoi_weights_1d(sset, body, K):
    """Exact weights ``(w_next - w_prev) / 2`` for the samples in ``[-K, K]``."""
    if sset.dim != 1:
        raise ValueError("voronoi_weights_1d needs a one-dimensional set")
    x = np.sort(sset.points[:, 0])
    if len(x) > 1 and np.min(np.diff(x)) <= 1e-12:
        raise ValueError("duplicate points in sampling set")
    inside = np.flatnonzero(np.abs(x) <= K * (1 + 1e-12))
    if len(inside) == 0:
        return WeightedSamples(np.zeros((0, 1)), np.zeros(0), K, body, math.inf,
                               math.inf, {"kind": "exact1d"}, dict(sset.generator))
    lo, hi = inside[0], inside[-1]
    if lo == 0 or hi == len(x) - 1:
        raise InsufficientExtentError(
            "sampling set must extend at least one sample beyond K on each side"
        )
    w = 0.5 * (x[inside + 1] - x[inside - 1])
    # largest half-gap between consecutive samples touching [-K, K]
    half = 0.5 * np.diff(x[lo - 1 : hi + 2])
    cell_radius = float(half.max())
    return WeightedSamples(
        x[inside][:, None],
        w,
        float(K),
        body,
        float(body.polar_norm(np.array([cell_radius]))),
        cell_radius,
        {"kind": "exact1d"},
        dict(sset.generator),
    )


def _lex_rank(points):
    order = np.lexsort(points.T[::-1])
    rank = np.empty(len(points), dtype=np.int64)
    rank[order] = np.arange(len(points))
    return rank


def _assign(tree, body, rank, probes, kq):
    dist, idx = polar_tree_query(tree, body, probes, k=kq)
    if kq == 1:
        return idx, dist, dist
    dmin = dist[:, :1]
    tie = dist <= dmin * (1 + 1e-12) + 1e-15
    r = np.where(tie, rank[idx], np.iinfo(np.int64).max)
    pick = np.argmin(r, axis=1)
    rows = np.arange(len(probes))
    return idx[rows, pick], dist[rows, pick], dmin[:, 0]


def _grid_slabs(center, R, res, dim):
    """Yield probe blocks of a ``res^dim`` cell-centred grid over the ball.

    Blocks are groups of consecutive rows of the first coordinate, sized
    near ``_CHUNK`` probes; the grouping depends only on the grid.
    """
    step = 2.0 * R / res
    ticks = -R + step * (np.arange(res) + 0.5)
    inner = np.stack(np.meshgrid(*([ticks] * (dim - 1)), indexing="ij"), -1).reshape(
        -1, dim - 1
    ) if dim > 1 else np.zeros((1, 0))
    rows = max(1, _CHUNK // len(inner))
    for s in range(0, res, rows):
        t = ticks[s : s + rows]
        blk = np.concatenate([np.repeat(t, len(inner))[:, None], np.tile(inner, (len(t), 1))], axis=1)
        blk = blk[np.linalg.norm(blk, axis=1) <= R]
        if len(blk):
            yield blk + center


def voronoi_weights_nd(sset, body, K, method="grid", resolution_or_samples=400,
                       seed=0, center=None, threads=1):
    """Estimate polar-norm Voronoi weights of the samples in ``B_K``.

    Probes cover ``B_{K + 2 gap}`` (Euclidean radius, gap measured first on
    a coarse grid).  ``method="grid"`` uses ``resolution_or_samples`` cells
    per axis of the bounding cube; ``method="mc"`` draws that many uniform
    samples from the cube with a generator seeded by ``seed``.  Ties go to
    the lexicographically smallest sample.

    The probe stream is split into fixed blocks whose integer counts are
    summed in block order, so results do not depend on ``threads``.
    """
    dim = sset.dim
    if dim != body.dim:
        raise ValueError("dimension mismatch between set and body")
    if len(sset) == 0:
        raise ValueError("empty sampling set")
    n = int(resolution_or_samples)
    total = n**dim if method == "grid" else n
    if total < MIN_PROBES:
        raise ValueError(f"need at least {MIN_PROBES} probes, got {total}")
    center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    pts = sset.points
    rel = pts - center
    full_tree = cKDTree(pts)
    g0 = _coarse_gap(full_tree, body, center, K, max(K, 1.0) / 400.0)
    R = K + 2.0 * body.c_polar * g0.upper
    if R + np.linalg.norm(center) > sset.extent_radius * (1 + 1e-12):
        raise InsufficientExtentError(
            f"probe region radius {R:.4g} exceeds the realized extent {sset.extent_radius}"
        )

    near = np.flatnonzero(np.linalg.norm(rel, axis=1) <= R + 2.0 * body.c_polar * g0.upper)
    pn = pts[near]
    tree = cKDTree(pn)
    rank = _lex_rank(pn)
    kq = min(4, len(near))

    if method == "grid":
        blocks = _grid_slabs(center, R, n, dim)
        cell = (2.0 * R / n) ** dim
        probe_err = 0.5 * (2.0 * R / n) * math.sqrt(dim)
    elif method == "mc":
        nblk = max(1, -(-n // _CHUNK))
        seeds = np.random.SeedSequence(seed).spawn(nblk)
        sizes = [min(_CHUNK, n - i * _CHUNK) for i in range(nblk)]
        blocks = [(s, m) for s, m in zip(seeds, sizes)]
        cell = (2.0 * R) ** dim / n
        probe_err = 0.0
    else:
        raise ValueError(f"unknown method {method!r}")

    def work(blk):
        if method == "mc":
            ss, m = blk
            probes = np.random.default_rng(ss).uniform(-R, R, size=(m, dim))
            probes = probes[np.linalg.norm(probes, axis=1) <= R] + center
        else:
            probes = blk
        if len(probes) == 0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64), 0.0, 0.0, 0
        idx, dist, dmin = _assign(tree, body, rank, probes, kq)
        uniq, cnt = np.unique(idx, return_counts=True)
        eu = np.linalg.norm(probes - pn[idx], axis=1)
        return uniq, cnt, float(dmin.max()), float(eu.max()), len(probes)

    counts = np.zeros(len(near), dtype=np.int64)
    gmax, emax, nprobe = 0.0, 0.0, 0

    def reduce(res):
        nonlocal gmax, emax, nprobe
        uniq, cnt, g, e, m = res
        counts[uniq] += cnt
        gmax, emax, nprobe = max(gmax, g), max(emax, e), nprobe + m

    # integer counts and maxima do not depend on the order of reduction
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            for res in pool.map(work, blocks):
                reduce(res)
    else:
        for b in blocks:
            reduce(work(b))

    r_near = np.linalg.norm(rel[near], axis=1)
    report = r_near <= K * (1 + 1e-12)
    w = counts[report] * cell
    if np.any(w <= 0):
        raise ValueError("probe resolution too coarse: some reported cells received no probes")
    if method == "grid":
        half_cell = np.full(dim, probe_err / math.sqrt(dim))
        gap_upper = max(g0.upper, gmax + float(body.polar_norm(half_cell)))
        cell_radius = emax + probe_err
    else:
        gap_upper = max(g0.upper, gmax)
        cell_radius = body.c_polar * gap_upper
    return WeightedSamples(
        pn[report],
        w,
        float(R),
        body,
        gap_upper,
        cell_radius,
        {
            "kind": method,
            "resolution_or_samples": n,
            "seed": int(seed) if method == "mc" else None,
            "probe_radius": float(R),
            "probe_count": int(nprobe),
            "probe_cell": float(cell),
            "unreported_measure": float(counts[~report].sum() * cell),
        },
        dict(sset.generator),
    )


def _coarse_gap(tree, body, center, K, step):
    dim = body.dim
    n = int(math.floor(K / step + 1e-9))
    ticks = step * np.arange(-n, n + 1)
    if dim == 1:
        probes = ticks[:, None]
    else:
        probes = np.stack(np.meshgrid(*([ticks] * dim), indexing="ij"), -1).reshape(-1, dim)
        probes = probes[np.linalg.norm(probes, axis=1) <= K * (1 + 1e-12)]
    best = 0.0
    for chunk in np.array_split(probes, max(1, len(probes) // 200_000)):
        dist, _ = polar_tree_query(tree, body, chunk + center)
        best = max(best, float(dist.max()))
    return GapEstimate(best, float(body.polar_norm(np.full(dim, step / 2.0))))


def lattice_weights(sset, body, K):
    """Exact weights ``h^d`` for a grid realization ``h Z^d``.

    For a box or a ball the nearest lattice point in the polar norm is the
    coordinatewise rounding, so every cell is the cube of side ``h``.
    """
    gen = sset.generator or {}
    if gen.get("kind") != "grid":
        raise ValueError("lattice weights need a set produced by gen_grid")
    if K > sset.extent_radius * (1 + 1e-12):
        raise InsufficientExtentError(f"K={K} exceeds the realized extent {sset.extent_radius}")
    h, d = float(gen["h"]), sset.dim
    keep = sset.radii() <= K * (1 + 1e-12)
    half = np.full(d, h / 2.0)
    return WeightedSamples(
        sset.points[keep],
        np.full(int(keep.sum()), h**d),
        float(K),
        body,
        float(body.polar_norm(half)),
        float(np.linalg.norm(half)),
        {"kind": "lattice"},
        dict(gen),
    )


def voronoi_weights(sset, body, K, **kwargs):
    """Exact weights for 1D sets and grids, probe estimates otherwise."""
    force_nd = kwargs.pop("force_nd", False)
    if not force_nd and (sset.generator or {}).get("kind") == "grid" and sset.dim > 1:
        return lattice_weights(sset, body, K)
    if sset.dim == 1 and not force_nd:
        return voronoi_weights_1d(sset, body, K)
    return voronoi_weights_nd(sset, body, K, **kwargs)
