"""Weighted least-squares reconstruction from Fourier samples.

Given samples ``g^(w)`` on ``Omega ∩ B_K`` and Voronoi weights, the
reconstruction is the element of a space ``R`` minimizing
``sum mu_w |f^(w) - g^(w)|^2``.  Its stability constant is
``sqrt(W / V)`` with ``V`` the concentration of the samples on ``R`` and
``W`` a Bessel bound over ``L^2(D)``.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import lstsq

from .measures import bessel_bound

__all__ = ["NUGSResult", "sample_function", "reconstruct", "error_report", "RANK_TOL"]

RANK_TOL = 1e-12


@dataclass
class NUGSResult:
    """Coefficients of the reconstruction and the quantities behind its bound.

    ``V_used`` is ``sigma_min^2`` of the weighted system matrix (the
    concentration of the samples on the space); ``W_used`` is the Bessel
    bound from the gap recorded with the weights.
    """

    coefficients: np.ndarray
    residual_norm: float
    condition_estimate: float
    V_used: float
    W_used: float
    rank: int
    rank_deficient: bool

    def to_dict(self):
        d = asdict(self)
        d["coefficients"] = [[c.real, c.imag] for c in self.coefficients]
        return d


def _points(obj):
    return obj.points if hasattr(obj, "points") else np.asarray(obj, dtype=float)


def sample_function(f, ambient, samples_at, K=None):
    """``f^(w)`` for ``w`` in a point set (optionally cut to ``|w| <= K``).

    Parameters
    ----------
    f : array_like
        Coefficients of ``f`` in the orthonormal basis of ``ambient``.
    ambient : ReconstructionSpace
    samples_at : SamplingSet, WeightedSamples or array of points
    K : float, optional
    """
    pts = _points(samples_at)
    if pts.ndim == 1:
        pts = pts[:, None]
    if K is not None:
        pts = pts[np.linalg.norm(pts, axis=1) <= K * (1 + 1e-12)]
    f = np.asarray(f, dtype=complex)
    out = np.empty(len(pts), dtype=complex)
    for s in range(0, len(pts), 8192):
        out[s : s + 8192] = ambient.fourier_rows(pts[s : s + 8192]) @ f
    return out


def reconstruct(samples, ws, space):
    """Minimize ``sum mu_w |f^(w) - samples_w|^2`` over ``f`` in ``space``.

    Uses an SVD-based least-squares solver on the ``sqrt(mu)``-scaled
    system; singular values below ``RANK_TOL * sigma_max`` count as zero
    and the minimal-norm solution is returned with a flag.
    """
    samples = np.asarray(samples, dtype=complex).reshape(-1)
    if len(samples) != len(ws):
        raise ValueError(f"{len(samples)} samples for {len(ws)} weighted points")
    if len(ws) == 0:
        return NUGSResult(np.zeros(space.dim, complex), 0.0, math.inf, 0.0,
                          bessel_bound(ws.body, ws.gap), 0, True)
    sq = np.sqrt(ws.weights)
    A = space.fourier_rows(ws.points) * sq[:, None]
    b = samples * sq
    coef, _, rank, sv = lstsq(A, b, cond=RANK_TOL, lapack_driver="gelsd")
    V = float(sv[-1] ** 2) if len(sv) == space.dim else 0.0
    if rank < space.dim:
        V = 0.0
    W = bessel_bound(ws.body, ws.gap) if math.isfinite(ws.gap) else math.inf
    return NUGSResult(
        coef,
        float(np.linalg.norm(A @ coef - b)),
        math.sqrt(W / V) if V > 0 else math.inf,
        V,
        W,
        int(rank),
        bool(rank < space.dim),
    )


def error_report(f_ambient, result, space, ambient, noise=None):
    """Compare a reconstruction with its target and the stability bound.

    ``f_ambient`` holds the target's coefficients in ``ambient``; ``noise``
    (coefficients in ``ambient``) is the perturbation that was added to the
    data, if any.  The bound is ``sqrt(W/V) (||f - Q f|| + ||g||)`` with
    ``Q`` the orthogonal projection onto ``space``.
    """
    E = space.embedding(ambient)
    f = np.asarray(f_ambient, dtype=complex)
    err = float(np.linalg.norm(f - E @ result.coefficients))
    best = float(np.linalg.norm(f - E @ (E.conj().T @ f)))
    gnorm = 0.0 if noise is None else float(np.linalg.norm(noise))
    bound = result.condition_estimate * (best + gnorm)
    return {
        "error": err,
        "best_approximation": best,
        "noise_norm": gnorm,
        "bound": bound,
        "condition_estimate": result.condition_estimate,
        "bound_satisfied": bool(err <= bound * (1 + 1e-9) + 1e-12),
    }
