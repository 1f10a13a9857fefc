"""Concentration, residual and Bessel measures with explicit frame bounds.

All reconstruction bases are orthonormal, so the infimum and supremum of a
sample energy over the unit ball of a space are the extreme eigenvalues of
a Gram matrix.  Analytic bounds are pure functions of the body and a gap.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import eigh, eigh_tridiagonal, eigvalsh

from .geometry import InsufficientExtentError, gap
from .spaces import continuous_gram, shell_gram, tail_bound

__all__ = [
    "MeasureReport",
    "ConcentrationPolynomial",
    "measure_V",
    "measure_Vstar",
    "measure_V_cont",
    "measure_Vstar_cont",
    "measure_W",
    "measure_report",
    "bessel_bound",
    "frame_bound_A",
    "frame_bound_kappa",
    "lower_bound_unweighted",
    "lower_bound_weighted",
    "balayage_check",
    "concentration_polynomial",
    "prolate_matrix",
    "prolate_min_dense",
    "lambda_min",
    "lambda_max",
]


def lambda_min(G):
    if G.shape[0] == 0:
        return 0.0
    return float(eigvalsh(G, subset_by_index=[0, 0])[0])


def lambda_max(G):
    n = G.shape[0]
    if n == 0:
        return 0.0
    return float(eigvalsh(G, subset_by_index=[n - 1, n - 1])[0])


def _check_domain(ws, radius):
    if radius > ws.weight_domain_radius * (1 + 1e-12):
        raise InsufficientExtentError(
            f"weights cover radius {ws.weight_domain_radius}, need {radius}"
        )


def measure_V(space, ws, K):
    """Concentration ``V``: ``lambda_min`` of the Gram of the samples in ``B_K``."""
    _check_domain(ws, K)
    sub = ws.restrict(hi=K)
    if len(sub) < space.dim:
        # fewer samples than unknowns leaves a null direction
        return 0.0
    return max(0.0, lambda_min(shell_gram(space, ws, None, K)))


def measure_Vstar(space, ws, K, tail_radius):
    """Residual ``V*`` over ``K < |w| <= tail_radius``.

    Returns
    -------
    value : float
        ``lambda_max`` of the shell Gram.
    tail_error : float
        Bound on the energy beyond ``tail_radius`` that the value omits.
    """
    _check_domain(ws, tail_radius)
    err = tail_bound(space, tail_radius, ws.cell_radius, ws)
    if K >= tail_radius:
        return 0.0, err
    sub = ws.restrict(lo=K, hi=tail_radius)
    if len(sub) == 0:
        return 0.0, err
    return max(0.0, lambda_max(shell_gram(space, ws, K, tail_radius))), err


def measure_V_cont(space, K, nodes_per_unit=32):
    """``lambda_min`` of the continuous Gram over ``B_K``."""
    return max(0.0, lambda_min(continuous_gram(space, K, nodes_per_unit)))


def measure_Vstar_cont(space, K, nodes_per_unit=32):
    """``lambda_max(I - G_K)``, the continuous residual outside ``B_K``."""
    G = continuous_gram(space, K, nodes_per_unit)
    return 1.0 - lambda_min(G)


def bessel_bound(body, delta):
    """Certified bound ``exp(4 pi delta c° m_D)`` on weighted sample energy."""
    return math.exp(4 * math.pi * delta * body.c_polar * body.m_D)


def measure_W(space, ws, K):
    """``(W_empirical, W_bound)``; the bound is ``None`` without a finite gap."""
    _check_domain(ws, K)
    sub = ws.restrict(hi=K)
    w_emp = lambda_max(shell_gram(space, ws, None, K)) if len(sub) else 0.0
    w_bound = bessel_bound(ws.body, ws.gap) if math.isfinite(ws.gap) else None
    return w_emp, w_bound


def frame_bound_kappa(delta, d):
    return (1.0 / math.sqrt(4 * delta) - 1.0) * (1.0 - 1.0 / (d + 2))


def frame_bound_A(body, delta):
    """Explicit lower frame bound for weighted samples with gap ``delta``.

    ``meas(D°) meas(D) (delta kappa^2 / 6)^d cos(2 pi delta (1+kappa)^2)^2``
    with ``kappa = ((4 delta)^(-1/2) - 1)(1 - 1/(d+2))``.
    """
    if not 0 < delta < 0.25:
        raise ValueError("the frame bound needs a gap in (0, 1/4)")
    d = body.dim
    k = frame_bound_kappa(delta, d)
    return (
        body.polar_volume
        * body.volume
        * (delta * k * k / 6.0) ** d
        * math.cos(2 * math.pi * delta * (1 + k) ** 2) ** 2
    )


def lower_bound_unweighted(body, delta, eps):
    """``meas(D) eps^d cos(2 pi (1+eps) delta)^2`` for ``(1+eps) delta < 1/4``."""
    if not (eps > 0 and delta >= 0 and (1 + eps) * delta < 0.25):
        raise ValueError("need eps > 0 and (1 + eps) * delta < 1/4")
    return body.volume * eps**body.dim * math.cos(2 * math.pi * (1 + eps) * delta) ** 2


def lower_bound_weighted(body, delta, eps, eta):
    """``meas(D°) meas(D) (eta eps / 6)^d cos(2 pi (1+eps)(delta+eta))^2``."""
    if not (eps > 0 and eta > 0 and (1 + eps) * (delta + eta) < 0.25):
        raise ValueError("need eps, eta > 0 and (1 + eps)(delta + eta) < 1/4")
    return (
        body.polar_volume
        * body.volume
        * (eta * eps / 6.0) ** body.dim
        * math.cos(2 * math.pi * (1 + eps) * (delta + eta)) ** 2
    )


@dataclass
class MeasureReport:
    """Stability quantities of one (space, weighted set, K) configuration."""

    V: float
    V_star: float
    W_empirical: float
    W_bound: float | None
    A_bound: float | None
    K: float
    tail_radius: float
    tail_error: float
    gap: float
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def measure_report(space, ws, K, tail_radius):
    V = measure_V(space, ws, K)
    vs, err = measure_Vstar(space, ws, K, tail_radius)
    w_emp, w_bound = measure_W(space, ws, K)
    A = frame_bound_A(ws.body, ws.gap) if 0 < ws.gap < 0.25 else None
    return MeasureReport(
        V, vs, w_emp, w_bound, A, float(K), float(tail_radius), err, float(ws.gap),
        {"space": space.spec, "body": ws.body.to_dict(), "n_samples": len(ws.restrict(hi=K))},
    )


def balayage_check(space, sset, n_trials, grid_res, seed, body=None, probe_radius=None):
    """Compare ``sup_Omega |f^|`` with the grid sup of ``|f^|`` for random ``f``.

    ``f`` ranges over ``n_trials`` random unit coefficient vectors of
    ``space`` (complex Gaussian directions from ``seed``).  The grid has step
    ``grid_res`` and covers the ball where the set is realized.

    Returns
    -------
    dict
        ``min_ratio``, ``bound = cos(2 pi delta)``, ``delta`` and per-trial
        ratios.
    """
    body = body or space.body
    R = sset.extent_radius
    if probe_radius is None:
        probe_radius = 0.5 * R
    est = gap(sset, body, probe_radius, grid_res)
    delta = est.upper
    if delta >= 0.25:
        raise ValueError(f"gap {delta:.4g} is not below 1/4")
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((space.dim, n_trials)) + 1j * rng.standard_normal(
        (space.dim, n_trials)
    )
    coeffs /= np.linalg.norm(coeffs, axis=0)
    on_set = _sup_abs(space, sset.points, coeffs)
    n = int(math.floor(R / grid_res))
    ticks = grid_res * np.arange(-n, n + 1)
    grid = np.stack(np.meshgrid(*([ticks] * body.dim), indexing="ij"), -1).reshape(-1, body.dim)
    grid = grid[np.linalg.norm(grid, axis=1) <= R]
    on_grid = _sup_abs(space, grid, coeffs)
    ratios = on_set / on_grid
    return {
        "min_ratio": float(ratios.min()),
        "bound": math.cos(2 * math.pi * delta),
        "delta": float(delta),
        "ratios": ratios.tolist(),
        "n_trials": int(n_trials),
        "grid_res": float(grid_res),
        "seed": int(seed),
    }


def _sup_abs(space, pts, coeffs):
    best = np.zeros(coeffs.shape[1])
    for s in range(0, len(pts), 8192):
        vals = np.abs(space.fourier_rows(pts[s : s + 8192]) @ coeffs)
        best = np.maximum(best, vals.max(axis=0))
    return best


@dataclass
class ConcentrationPolynomial:
    """Unit-energy ``m(xi) = sum_k c_k exp(-2 pi i k xi)`` with small energy on
    ``[-eps, eps]``."""

    n: int
    eps: float
    coefficients: np.ndarray
    leak: float

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        k = np.arange(self.n + 1)
        return np.exp(-2j * np.pi * np.multiply.outer(xi, k)) @ self.coefficients

    def to_dict(self):
        return {
            "n": self.n,
            "eps": self.eps,
            "coefficients": self.coefficients.tolist(),
            "leak": self.leak,
        }


def _leak(c, eps, nodes=None):
    # Gauss-Legendre on [-eps, eps]; |m|^2 has bandwidth n so this is exact up to rounding
    n = len(c) - 1
    nodes = nodes or (n + 40)
    x, w = npleg.leggauss(nodes)
    xi = eps * x
    m = np.exp(-2j * np.pi * np.outer(xi, np.arange(n + 1))) @ c
    return float(eps * np.sum(w * np.abs(m) ** 2))


def concentration_polynomial(n, eps):
    """Least concentrated trigonometric polynomial of degree ``n`` on ``[-eps, eps]``.

    The coefficients minimize ``∫_{-eps}^{eps} |m|^2`` subject to
    ``sum c_k^2 = 1``; they form the eigenvector of the smallest eigenvalue
    of ``M_kl = sin(2 pi eps (k-l)) / (pi (k-l))``.  The eigenvector is
    computed from the tridiagonal matrix that commutes with ``M``, which
    keeps it accurate when the eigenvalue is far below machine precision.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if n < 0:
        raise ValueError("degree must be nonnegative")
    N = n + 1
    if N == 1:
        c = np.ones(1)
    else:
        k = np.arange(N)
        diag = ((N - 1 - 2 * k) / 2.0) ** 2 * math.cos(2 * math.pi * eps)
        off = k[1:] * (N - k[1:]) / 2.0
        _, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
        c = vec[:, 0]
        c = c / np.linalg.norm(c)
        # sign convention: largest entry positive
        if c[np.argmax(np.abs(c))] < 0:
            c = -c
    return ConcentrationPolynomial(int(n), float(eps), c, _leak(c, eps))


def prolate_matrix(n, eps):
    """Dense ``(n+1) x (n+1)`` matrix ``sin(2 pi eps (k-l)) / (pi (k-l))``."""
    k = np.arange(n + 1)
    diff = k[:, None] - k[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        M = np.sin(2 * np.pi * eps * diff) / (np.pi * diff)
    M[diff == 0] = 2 * eps
    return M


def prolate_min_dense(n, eps):
    """Smallest eigenpair of :func:`prolate_matrix` by a dense solver."""
    w, v = eigh(prolate_matrix(n, eps), subset_by_index=[0, 0])
    return float(w[0]), v[:, 0]
