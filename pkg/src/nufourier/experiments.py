"""Scaling experiments: stable sampling rates, barriers, transference and
critical-density decay.

A sweep evaluates residuals on a grid of truncation radii for each member
of a family of spaces (indexed by a degree ``N`` or a scale ``J``) and fits
``log K_N`` against ``log N`` (or against ``J log 2``).
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

from .measures import concentration_polynomial, lambda_max, lambda_min, measure_V
from .sampling import gen_grid
from .spaces import HaarSpace, continuous_shell_grams, is_structured, shell_gram, shell_grams

__all__ = [
    "SweepEntry",
    "SweepResult",
    "fit_exponent",
    "sweep_stable_rate",
    "sweep_continuous",
    "barrier_demo",
    "haar_witness",
    "rayleigh_quotient",
    "transference_check",
    "critical_discrepancy",
    "critical_rate_check",
]


@dataclass
class SweepEntry:
    param: int
    K: float | None
    V: float | None
    V_star: float | None
    W_empirical: float | None
    tail_radius: float
    flagged: bool = False


@dataclass
class SweepResult:
    """Entries sorted by parameter plus the fitted power law ``K = c N^gamma``."""

    entries: list
    gamma: float | None
    residual: float | None
    theta: float
    c_theta: float | None
    scale: str
    monotone: bool = True
    fit_params: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["entries"] = [asdict(e) for e in self.entries]
        return d


def fit_exponent(params, Ks, scale="log"):
    """Least-squares slope of ``log K`` against ``log N`` or ``J log 2``.

    With four or more points the smallest parameter is dropped; fewer than
    three usable points give ``None``.

    Returns
    -------
    gamma, residual, c, used : float, float, float, list
    """
    pairs = sorted((p, k) for p, k in zip(params, Ks) if k is not None and k > 0)
    if len(pairs) >= 4:
        pairs = pairs[1:]
    if len(pairs) < 3:
        return None, None, None, [p for p, _ in pairs]
    p = np.array([q for q, _ in pairs], dtype=float)
    x = np.log(p) if scale == "log" else p * math.log(2.0)
    y = np.log([k for _, k in pairs])
    A = np.stack([x, np.ones_like(x)], -1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), res, float(math.exp(coef[1])), [int(q) for q in p]


def _first_below(values, n, theta):
    # smallest index with values(i) <= theta for a nonincreasing sequence, by bisection
    lo, hi = 0, n - 1
    if values(hi) > theta:
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if values(mid) <= theta:
            hi = mid
        else:
            lo = mid + 1
    return lo


class _GramTable:
    """Cumulative Grams at fixed radii.

    Lattice Grams are assembled on demand (bisection touches only a few
    radii); scattered sets are accumulated in one pass over the samples.
    """

    def __init__(self, space, ws, radii):
        self.space, self.ws, self.radii = space, ws, radii
        self.lazy = is_structured(space, ws)
        self.cache = {} if self.lazy else dict(enumerate(shell_grams(space, ws, radii)))

    def __getitem__(self, i):
        i = i % len(self.radii)
        if i not in self.cache:
            self.cache[i] = shell_gram(self.space, self.ws, None, self.radii[i])
        return self.cache[i]


def sweep_stable_rate(space_factory, ws_provider, theta, params, K_grid, tail_factor=8.0,
                      scale="log"):
    """Smallest grid radius with residual ``V* <= theta`` for each parameter.

    Parameters
    ----------
    space_factory : callable
        ``param -> ReconstructionSpace``.
    ws_provider : callable
        ``(param, radius) -> WeightedSamples`` covering ``B_radius``.
    theta : float
        Threshold in ``(0, 1)``.
    params : sequence of int
    K_grid : callable
        ``param -> increasing array`` of candidate radii.
    tail_factor : float
        The residual sums shells up to ``tail_factor * max(K_grid(param))``.
    scale : {"log", "linear"}
        ``"log"`` fits against ``log N``; ``"linear"`` against ``J log 2``.
    """
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    entries = []
    for p in sorted(params):
        space = space_factory(p)
        Ks = np.asarray(K_grid(p), dtype=float)
        T = tail_factor * Ks[-1]
        ws = ws_provider(p, T)
        Gs = _GramTable(space, ws, np.append(Ks, T))
        GT = Gs[-1]
        cache = {}

        def vstar(i):
            if i not in cache:
                cache[i] = lambda_max(GT - Gs[i])
            return cache[i]

        i = _first_below(vstar, len(Ks), theta)
        if i is None:
            entries.append(SweepEntry(int(p), None, None, None, None, float(T), True))
            continue
        entries.append(SweepEntry(
            int(p), float(Ks[i]), max(0.0, lambda_min(Gs[i])), vstar(i),
            lambda_max(Gs[i]), float(T),
        ))
    return _finish(entries, theta, scale)


def sweep_continuous(space_factory, theta, params, K_grid, nodes_per_unit=32, scale="log"):
    """Same as :func:`sweep_stable_rate` with the continuous residual."""
    entries = []
    for p in sorted(params):
        space = space_factory(p)
        Ks = np.asarray(K_grid(p), dtype=float)
        Gs = continuous_shell_grams(space, Ks, nodes_per_unit)

        def vstar(i):
            return 1.0 - lambda_min(Gs[i])

        i = _first_below(vstar, len(Ks), theta)
        if i is None:
            entries.append(SweepEntry(int(p), None, None, None, None, math.inf, True))
            continue
        entries.append(SweepEntry(
            int(p), float(Ks[i]), max(0.0, lambda_min(Gs[i])), vstar(i),
            lambda_max(Gs[i]), math.inf,
        ))
    return _finish(entries, theta, scale)


def _finish(entries, theta, scale):
    ok = [e for e in entries if not e.flagged]
    gamma, res, c, used = fit_exponent([e.param for e in ok], [e.K for e in ok], scale)
    Ks = [e.K for e in ok]
    monotone = all(a <= b for a, b in zip(Ks, Ks[1:]))
    return SweepResult(entries, gamma, res, theta, c, scale, monotone, used)


def haar_witness(J, K, d=2):
    """Coefficients of a unit-norm Haar function with little energy in ``B_K``.

    The interior scaling functions (all but the first and last per axis)
    carry the coefficients of a concentration polynomial of degree
    ``2^J - 3`` whose small-energy window is ``[-eps, eps]`` with
    ``eps = (K + 1/2) / 2^J`` (capped at 0.45); in 2D the tensor product.
    """
    n1 = 2**J
    if n1 < 3:
        raise ValueError("the witness needs J >= 2")
    eps = min(0.45, (K + 0.5) / n1)
    m = concentration_polynomial(n1 - 3, eps)
    a = np.zeros(n1)
    a[1 : n1 - 1] = m.coefficients
    if d == 1:
        return a.astype(complex), m
    return np.kron(a, a).astype(complex), m


def rayleigh_quotient(space, ws, coeffs, K):
    """``sum_{|w| <= K} mu_w |f^(w)|^2 / ||f||^2`` for coefficient vector ``coeffs``."""
    sub = ws.restrict(hi=K)
    total = 0.0
    for s in range(0, len(sub), 8192):
        vals = space.fourier_rows(sub.points[s : s + 8192]) @ coeffs
        total += float(np.sum(sub.weights[s : s + 8192] * np.abs(vals) ** 2))
    return total / float(np.vdot(coeffs, coeffs).real)


def barrier_demo(space_factory, ws_provider, gamma, c, params, scale="log", witness=False):
    """``V(R_N, Omega, c N^gamma)`` (or ``c 2^(gamma J)``) along a family.

    With ``witness=True`` the family must be Haar and each row also carries
    the Rayleigh quotient of :func:`haar_witness`, an upper bound for ``V``.
    """
    rows = []
    for p in sorted(params):
        K = c * (p**gamma if scale == "log" else 2.0 ** (gamma * p))
        space = space_factory(p)
        ws = ws_provider(p, K)
        row = {"param": int(p), "K": float(K), "V": measure_V(space, ws, K)}
        if witness:
            if not isinstance(space, HaarSpace):
                raise ValueError("witness functions are defined for Haar spaces")
            a, m = haar_witness(space.J, K, space.d)
            row["witness_rayleigh"] = rayleigh_quotient(space, ws, a, K)
            row["witness_eps"] = m.eps
            row["witness_leak"] = m.leak
        rows.append(row)
    return rows


def transference_check(space_factory, ws_provider, params, K_list, M, nodes_per_unit=32):
    """Tabulate discrete against continuous measures at shifted radii.

    For each parameter and ``K`` in ``K_list(param)`` the rows hold
    ``V*(Omega, K)`` with ``V*_cont(K - M)`` and ``V(Omega, K)`` with
    ``V_cont(K + M)`` together with their ratios.
    """
    rows = []
    for p in sorted(params):
        space = space_factory(p)
        Ks = np.asarray(K_list(p), dtype=float)
        T = 8.0 * Ks[-1]
        ws = ws_provider(p, T)
        Gd = shell_grams(space, ws, np.append(Ks, T))
        radii = np.unique(np.concatenate([np.maximum(Ks - M, 0.0), Ks + M]))
        Gc = continuous_shell_grams(space, radii, nodes_per_unit)
        where = {float(r): i for i, r in enumerate(radii)}
        for i, K in enumerate(Ks):
            vs = lambda_max(Gd[-1] - Gd[i])
            v = max(0.0, lambda_min(Gd[i]))
            vs_c = 1.0 - lambda_min(Gc[where[float(max(K - M, 0.0))]])
            v_c = max(0.0, lambda_min(Gc[where[float(K + M)]]))
            rows.append({
                "param": int(p), "K": float(K), "M": float(M),
                "V_star": vs, "V_star_cont": vs_c,
                "V": v, "V_cont": v_c,
                "ratio_star": vs / vs_c if vs_c > 0 else math.inf,
                "ratio": v_c / v if v > 0 else math.inf,
            })
    return rows


def critical_discrepancy(space, K, M_list, nodes_per_unit=32):
    """Excess of continuous over lattice concentration at critical density.

    For ``Omega = Z^d`` and unit weights returns, for each ``M``,
    ``max(0, V_cont(K) - V(Z^d, M))`` with ``K`` fixed; the first-order
    term decays like ``1 / M``.
    """
    d = space.body.dim
    Mmax = max(M_list)
    from .weights import lattice_weights

    ws = lattice_weights(gen_grid(1.0, d, Mmax + 1), space.body, Mmax)
    v_cont = max(0.0, lambda_min(continuous_shell_grams(space, [K], nodes_per_unit)[0]))
    out = []
    for M in M_list:
        v = measure_V(space, ws, M)
        out.append({"M": float(M), "V_lattice": v, "V_cont": v_cont,
                    "discrepancy": max(0.0, v_cont - v)})
    return out


def critical_rate_check(f, ambient, M, R_list, nodes_per_unit=32):
    """Decay of ``E(R) = ∫_{B_M} |f^|^2 - sum_{Z^d ∩ B_R} |f^(k)|^2``.

    Returns the table of ``E(R)``, the least-squares slope of ``log E``
    against ``log R`` and ``sup_R E(R) R / M``.
    """
    f = np.asarray(f, dtype=complex)
    d = ambient.body.dim
    if d == 1:
        x, w = npleg.leggauss(nodes_per_unit)
        n_pan = int(math.ceil(M))
        inside = 0.0
        # panels in a fixed order; chunks of 4096 panels keep memory small
        for s in range(0, 2 * n_pan, 4096):
            e = np.arange(s, min(s + 4096, 2 * n_pan))
            lo = -M + e * (2 * M / (2 * n_pan))
            half = M / (2 * n_pan)
            xi = ((lo + half)[:, None] + half * x).ravel()
            vals = ambient.fourier_rows(xi[:, None]) @ f
            inside += float(np.sum(np.tile(half * w, len(e)) * np.abs(vals) ** 2))
    else:
        from .spaces import continuous_gram

        G = continuous_gram(ambient, M, nodes_per_unit)
        inside = float(np.vdot(f, G @ f).real)
    Rmax = max(R_list)
    grid = gen_grid(1.0, d, Rmax)
    r = grid.radii()
    order = np.argsort(r, kind="stable")
    pts, r = grid.points[order], r[order]
    vals = np.abs(ambient.fourier_rows(pts) @ f) ** 2
    csum = np.cumsum(vals)
    rows = []
    for R in sorted(R_list):
        n = int(np.searchsorted(r, R * (1 + 1e-12), side="right"))
        E = max(0.0, inside - (csum[n - 1] if n else 0.0))
        rows.append({"R": float(R), "E": E, "scaled": E * R / M})
    good = [(row["R"], row["E"]) for row in rows if row["E"] > 0]
    slope = None
    if len(good) >= 2:
        lx = np.log([g[0] for g in good])
        ly = np.log([g[1] for g in good])
        slope = float(np.polyfit(lx, ly, 1)[0])
    return {
        "M": float(M),
        "energy_in_ball": inside,
        "rows": rows,
        "slope": slope,
        "sup_scaled": max(row["scaled"] for row in rows),
    }
