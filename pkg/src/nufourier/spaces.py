"""Reconstruction spaces with closed-form Fourier transforms.

Two families are provided, both with orthonormal bases:

* ``LegendreSpace(N)``: polynomials of degree ``<= N`` on ``D = [-1, 1]``,
  basis ``sqrt((2n+1)/2) P_n``.  Their transforms are
  ``sqrt((2n+1)/2) * 2 (-i)^n j_n(2 pi xi)``.
* ``HaarSpace(J, d)``: span of the Haar scaling functions at scale ``J`` on
  ``D = [-1/2, 1/2]^d`` (tensor products in 2D).  For ``p = 1`` the
  boundary-corrected Daubechies system needs no correction, so this is the
  wavelet space up to scale ``J`` exactly.

The Fourier transform convention is ``f^(xi) = ∫ f(x) exp(-2 pi i xi.x) dx``.
"""

import math
import re

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import eval_legendre, spherical_jn

from .geometry import box
from .special import hankel_envelope

__all__ = [
    "ReconstructionSpace",
    "LegendreSpace",
    "HaarSpace",
    "parse_space",
    "fourier_row",
    "continuous_gram",
    "continuous_tail_bound",
    "continuous_shell_grams",
    "discrete_gram",
    "shell_gram",
    "shell_grams",
    "is_structured",
    "tail_bound",
    "MIN_NODES_PER_UNIT",
]

MIN_NODES_PER_UNIT = 8
_ROW_CHUNK = 8192


class ReconstructionSpace:
    """Finite-dimensional subspace of ``L^2(D)`` with an orthonormal basis."""

    family = None
    dim = 0
    body = None

    def fourier_rows(self, xi):
        """Matrix ``[phi_n^(xi_i)]`` of shape ``(len(xi), dim)``."""
        raise NotImplementedError

    def evaluate(self, x):
        """Basis functions at points of ``D``, shape ``(len(x), dim)``."""
        raise NotImplementedError

    def embedding(self, finer):
        """Matrix with orthonormal columns mapping coefficients into ``finer``."""
        raise NotImplementedError

    def envelope(self, x):
        """Decreasing bound ``g`` on ``sum_n |phi_n^(xi)|^2`` along one axis."""
        raise NotImplementedError

    def envelope_integral(self, a):
        """``∫_a^inf envelope(x) dx`` (an upper bound)."""
        raise NotImplementedError

    def _xi(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 0:
            xi = xi.reshape(1, 1)
        elif xi.ndim == 1:
            xi = xi[:, None] if self.body.dim == 1 else xi[None, :]
        if xi.shape[1] != self.body.dim:
            raise ValueError(f"frequencies must have dimension {self.body.dim}")
        return xi

    def __eq__(self, other):
        return type(self) is type(other) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return f"{type(self).__name__}({self.spec!r})"


class LegendreSpace(ReconstructionSpace):
    """Algebraic polynomials of degree ``<= N`` on ``[-1, 1]``."""

    family = "legendre"

    def __init__(self, N):
        if N < 0:
            raise ValueError("degree must be nonnegative")
        self.N = int(N)
        self.dim = self.N + 1
        self.body = box(1.0, 1)
        self._norms = np.sqrt((2 * np.arange(self.dim) + 1) / 2.0)
        self._phase = (-1j) ** np.arange(self.dim)

    @property
    def spec(self):
        return f"legendre:{self.N}"

    def fourier_rows(self, xi):
        xi = self._xi(xi)[:, 0]
        j = spherical_jn(np.arange(self.dim), 2 * np.pi * xi[:, None])
        return 2.0 * j * (self._norms * self._phase)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        vals = np.stack([eval_legendre(n, x) for n in range(self.dim)], -1) * self._norms
        vals[np.abs(x) > 1] = 0.0
        return vals

    def embedding(self, finer):
        if not isinstance(finer, LegendreSpace) or finer.N < self.N:
            raise ValueError("Legendre spaces embed only into higher degree")
        return np.eye(finer.dim, self.dim)

    def envelope(self, x):
        # sum_n (2n+1) j_n^2 = 1 gives <= 2; the Hankel expansion gives the 1/x decay
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            far = self.dim**2 * hankel_envelope(self.N, 2 * np.pi * x) ** 2 / (
                2 * np.pi**2 * x**2
            )
        return np.minimum(2.0, far)

    def envelope_integral(self, a):
        if a <= 0:
            return math.inf
        e = float(hankel_envelope(self.N, 2 * np.pi * a))
        return self.dim**2 * e * e / (2 * np.pi**2 * a)

    def coefficients_of(self, func, nodes=None):
        """Orthonormal-Legendre coefficients of ``func`` by Gauss quadrature."""
        nodes = nodes or (2 * self.dim + 32)
        x, w = npleg.leggauss(nodes)
        return (self.evaluate(x) * w[:, None]).T @ func(x)


class HaarSpace(ReconstructionSpace):
    """Tensor Haar scaling space ``span(Phi_J)`` on ``[-1/2, 1/2]^d``.

    Basis index ``n`` runs over ``-2^(J-1) .. 2^(J-1)-1`` per axis (support
    ``[n 2^-J, (n+1) 2^-J]``); in 2D the flat index is ``i1 * 2^J + i2``.
    ``J0`` only records the base scale for wavelet-coefficient output.
    """

    family = "haar"

    def __init__(self, J, d=1, J0=None):
        if J < 0 or d not in (1, 2):
            raise ValueError("need J >= 0 and d in {1, 2}")
        self.J = int(J)
        self.d = int(d)
        self.J0 = int(J0) if J0 is not None else min(1, self.J)
        if not 0 <= self.J0 <= self.J:
            raise ValueError("base scale must satisfy 0 <= J0 <= J")
        self.n1 = 2**self.J
        self.dim = self.n1**self.d
        self.body = box(0.5, self.d)
        self._centers = (np.arange(self.n1) - self.n1 // 2 + 0.5) / self.n1
        if self.J == 0:
            self._centers = np.array([0.0])

    @property
    def spec(self):
        return f"haar:{self.J}:{self.d}:{self.J0}"

    def rows_1d(self, xi):
        xi = np.asarray(xi, dtype=float).reshape(-1)
        h = 1.0 / self.n1
        amp = math.sqrt(h) * np.sinc(xi * h)
        return amp[:, None] * np.exp(-2j * np.pi * np.outer(xi, self._centers))

    def fourier_rows(self, xi):
        xi = self._xi(xi)
        r = self.rows_1d(xi[:, 0])
        if self.d == 1:
            return r
        r2 = self.rows_1d(xi[:, 1])
        return (r[:, :, None] * r2[:, None, :]).reshape(len(xi), -1)

    def evaluate_1d(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        idx = np.floor((x + 0.5) * self.n1).astype(int)
        idx = np.where(x == 0.5, self.n1 - 1, idx)
        out = np.zeros((len(x), self.n1))
        ok = (idx >= 0) & (idx < self.n1) & (np.abs(x) <= 0.5)
        out[np.flatnonzero(ok), idx[ok]] = math.sqrt(self.n1)
        return out

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return self.evaluate_1d(x)
        x = x.reshape(-1, 2)
        a, b = self.evaluate_1d(x[:, 0]), self.evaluate_1d(x[:, 1])
        return (a[:, :, None] * b[:, None, :]).reshape(len(x), -1)

    def embedding_1d(self, J_fine):
        s = J_fine - self.J
        E = np.zeros((2**J_fine, self.n1))
        for i in range(self.n1):
            E[i * 2**s : (i + 1) * 2**s, i] = 2.0 ** (-s / 2)
        return E

    def embedding(self, finer):
        if not isinstance(finer, HaarSpace) or finer.d != self.d or finer.J < self.J:
            raise ValueError("Haar spaces embed only into finer scales of equal dimension")
        E = self.embedding_1d(finer.J)
        return E if self.d == 1 else np.kron(E, E)

    def envelope(self, x):
        # per axis: 4^J sin^2(pi x / 2^J) / (pi x)^2 <= min(1, c^2 / x^2)
        c = self.n1 / np.pi
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, c * c / (x * x))

    def envelope_integral(self, a):
        c = self.n1 / np.pi
        a = max(a, 0.0)
        return c * c / a if a >= c else (c - a) + c

    def to_wavelet_coefficients(self, coeffs):
        """Orthonormal Haar analysis from scale ``J`` down to ``J0``.

        Returns a flat vector: scaling coefficients at ``J0`` first, then
        detail coefficients scale by scale (in 2D each level stores the
        three detail blocks one after another).
        """
        coeffs = np.asarray(coeffs)
        if self.d == 1:
            a, parts = coeffs.copy(), []
            for _ in range(self.J - self.J0):
                even, odd = a[0::2], a[1::2]
                parts.append((even - odd) / math.sqrt(2))
                a = (even + odd) / math.sqrt(2)
            return np.concatenate([a] + parts[::-1])
        a = coeffs.reshape(self.n1, self.n1).copy()
        parts = []
        for _ in range(self.J - self.J0):
            lo = (a[0::2] + a[1::2]) / math.sqrt(2)
            hi = (a[0::2] - a[1::2]) / math.sqrt(2)
            ll, lh = (lo[:, 0::2] + lo[:, 1::2]) / math.sqrt(2), (lo[:, 0::2] - lo[:, 1::2]) / math.sqrt(2)
            hl, hh = (hi[:, 0::2] + hi[:, 1::2]) / math.sqrt(2), (hi[:, 0::2] - hi[:, 1::2]) / math.sqrt(2)
            parts.append(np.concatenate([lh.ravel(), hl.ravel(), hh.ravel()]))
            a = ll
        return np.concatenate([a.ravel()] + parts[::-1])


_SPEC = re.compile(r"^(legendre):(\d+)$|^(haar):(\d+)(?::(\d+))?(?::(\d+))?$")


def parse_space(text):
    """``"legendre:N"`` or ``"haar:J[:d[:J0]]"``."""
    m = _SPEC.match(text.strip())
    if not m:
        raise ValueError(f"bad space spec {text!r}")
    if m.group(1):
        return LegendreSpace(int(m.group(2)))
    d = int(m.group(5)) if m.group(5) else 1
    J0 = int(m.group(6)) if m.group(6) else None
    return HaarSpace(int(m.group(4)), d, J0)


def fourier_row(space, omega):
    """``(phi_n^(omega))_n`` for a single frequency."""
    return space.fourier_rows(np.asarray(omega, dtype=float).reshape(1, -1))[0]


def _accumulate(space, xi, w):
    G = np.zeros((space.dim, space.dim), dtype=complex)
    for s in range(0, len(w), _ROW_CHUNK):
        A = space.fourier_rows(xi[s : s + _ROW_CHUNK])
        G += (A.conj().T * w[s : s + _ROW_CHUNK]) @ A
    return 0.5 * (G + G.conj().T)


def discrete_gram(space, ws):
    """``sum_w mu_w conj(row(w))^T row(w)`` over the samples in ``ws``."""
    if len(ws) == 0:
        return np.zeros((space.dim, space.dim), dtype=complex)
    return _accumulate(space, ws.points, ws.weights)


def _lattice_count(h, R, d):
    # number of points of hZ^d with norm <= R, using the same comparison as restrict()
    if R < 0:
        return 0
    M = int(math.floor(R / h + 1e-9)) + 1
    k = h * np.arange(-M, M + 1)
    if d == 1:
        return int(np.sum(np.abs(k) <= R * (1 + 1e-12)))
    r = np.sqrt(k[:, None] ** 2 + k[None, :] ** 2)
    return int(np.sum(r <= R * (1 + 1e-12)))


def _lattice_disc_gram(space, h, R):
    """Gram of ``h Z^2 ∩ B_R`` with weights ``h^2`` for a 2D Haar space.

    The disc is a union of columns ``{k1} x [-m(k1), m(k1)]``, so the Gram
    is ``sum_k1 O(k1) ⊗ P(m(k1))`` with ``P`` a prefix sum along the
    second axis.
    """
    n1 = space.n1
    if R < 0:
        return np.zeros((space.dim, space.dim), dtype=complex)
    M = int(math.floor(R / h + 1e-9)) + 1
    k = np.arange(-M, M + 1)
    x = h * k
    rows = space.rows_1d(x)
    outer = h * rows.conj()[:, :, None] * rows[:, None, :]
    # m(k1): largest k2 with sqrt(x1^2 + x2^2) <= R(1 + 1e-12)
    ok = np.sqrt(x[:, None] ** 2 + x[None, :] ** 2) <= R * (1 + 1e-12)
    col = ok.sum(axis=1)
    center = M
    prefix = np.zeros((M + 2, n1, n1), dtype=complex)
    acc = np.zeros((n1, n1), dtype=complex)
    for m in range(0, M + 1):
        acc = acc + outer[center + m]
        if m > 0:
            acc = acc + outer[center - m]
        prefix[m + 1] = acc
    # col = 2m+1 points, or 0 for empty columns
    idx = np.where(col > 0, (col - 1) // 2 + 1, 0)
    sel = np.flatnonzero(idx > 0)
    Of = outer[sel].reshape(len(sel), -1)
    Pf = prefix[idx[sel]].reshape(len(sel), -1)
    T = Of.T @ Pf
    G = T.reshape(n1, n1, n1, n1).transpose(0, 2, 1, 3).reshape(space.dim, space.dim)
    return 0.5 * (G + G.conj().T)


def is_structured(space, ws):
    """True when Grams of ``ws`` can use the Kronecker lattice assembly."""
    return _lattice_step(space, ws) is not None and space.d == 2


def shell_gram(space, ws, lo=None, hi=None):
    """Gram over the samples with ``lo < |w| <= hi``.

    Full lattice shells of a 2D Haar space use the Kronecker-structured
    assembly; everything else is summed directly.
    """
    sub = ws.restrict(lo, hi)
    h = _lattice_step(space, ws)
    if h is not None and space.d == 2 and hi is not None:
        lo_ = -1.0 if lo is None else lo
        if len(sub) == _lattice_count(h, hi, 2) - _lattice_count(h, lo_, 2):
            G = _lattice_disc_gram(space, h, hi)
            if lo_ >= 0:
                G = G - _lattice_disc_gram(space, h, lo_)
            return G
    return discrete_gram(space, sub)


def shell_grams(space, ws, radii):
    """Cumulative Grams over ``|w| <= r`` for each ``r`` in sorted ``radii``.

    One pass over the samples; shell contributions are added in radius
    order so every entry is reproducible.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) < 0):
        raise ValueError("radii must be sorted")
    out = np.zeros((len(radii), space.dim, space.dim), dtype=complex)
    acc = np.zeros((space.dim, space.dim), dtype=complex)
    prev = None
    for i, r in enumerate(radii):
        acc = acc + shell_gram(space, ws, prev, r)
        out[i] = acc
        prev = r
    return out


def _gauss_panels(lo, hi, nodes_per_unit):
    n_pan = max(1, int(math.ceil(hi - lo)))
    x, w = npleg.leggauss(nodes_per_unit)
    edges = np.linspace(lo, hi, n_pan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def continuous_gram(space, K, nodes_per_unit=32):
    """``∫_{|xi| <= K} conj(phi^(xi))^T phi^(xi) dxi`` by product quadrature.

    Gauss-Legendre panels of unit length in 1D; in 2D the same radial
    panels with a trapezoidal rule in angle.
    """
    if nodes_per_unit < MIN_NODES_PER_UNIT:
        raise ValueError(f"need at least {MIN_NODES_PER_UNIT} nodes per unit length")
    if K <= 0:
        return np.zeros((space.dim, space.dim), dtype=complex)
    if space.body.dim == 1:
        xi, w = _gauss_panels(-K, K, nodes_per_unit)
        return _accumulate(space, xi[:, None], w)
    G = _polar_shell(space, 0.0, K, nodes_per_unit)
    return 0.5 * (G + G.conj().T)


def continuous_shell_grams(space, radii, nodes_per_unit=32):
    """Cumulative continuous Grams ``G_r`` for sorted ``radii``.

    Each shell ``r_{i-1} < |xi| <= r_i`` gets its own unit-length panels,
    so the result for ``radii[-1]`` matches :func:`continuous_gram` up to
    quadrature rounding.
    """
    if nodes_per_unit < MIN_NODES_PER_UNIT:
        raise ValueError(f"need at least {MIN_NODES_PER_UNIT} nodes per unit length")
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) < 0) or (len(radii) and radii[0] < 0):
        raise ValueError("radii must be sorted and nonnegative")
    out = np.zeros((len(radii), space.dim, space.dim), dtype=complex)
    acc = np.zeros((space.dim, space.dim), dtype=complex)
    prev = 0.0
    for i, r in enumerate(radii):
        if r > prev:
            if space.body.dim == 1:
                x, w = _gauss_panels(prev, r, nodes_per_unit)
                acc = acc + _accumulate(space, np.concatenate([x, -x])[:, None], np.concatenate([w, w]))
            else:
                acc = acc + _polar_shell(space, prev, r, nodes_per_unit)
        out[i] = 0.5 * (acc + acc.conj().T)
        prev = r
    return out


def _polar_shell(space, r0, r1, nodes_per_unit):
    r, wr = _gauss_panels(r0, r1, nodes_per_unit)
    G = np.zeros((space.dim, space.dim), dtype=complex)
    for ri, wi in zip(r, wr):
        n_th = max(64, int(math.ceil(nodes_per_unit * 2 * np.pi * ri)))
        th = 2 * np.pi * np.arange(n_th) / n_th
        pts = ri * np.stack([np.cos(th), np.sin(th)], -1)
        A = space.fourier_rows(pts)
        G += (A.conj().T * (wi * ri * 2 * np.pi / n_th)) @ A
    return G


def continuous_tail_bound(space, K):
    """Bound on ``lambda_max`` of ``∫_{|xi| > K}`` (so on ``||I - G_K||``)."""
    return tail_bound(space, K, cell_radius=0.0)


def _lattice_step(space, ws):
    # Omega = hZ^d with 1/h an integer, unit-covolume weights, Haar on the unit cube
    if ws is None or not isinstance(space, HaarSpace):
        return None
    gen = ws.generator or {}
    if gen.get("kind") != "grid" or space.body != ws.body:
        return None
    h = float(gen["h"])
    q = round(1.0 / h)
    if q < 1 or abs(q * h - 1.0) > 1e-12:
        return None
    if len(ws) and np.max(np.abs(ws.weights - h**space.d)) > 1e-9 * h**space.d:
        return None
    return h


def _haar_lattice_tail_1d(space, h, T):
    w0 = h * (math.floor(T / h + 1e-12) + 1)
    nJ = space.n1
    return 2.0 * nJ**2 / np.pi**2 * (1.0 / w0**2 + 1.0 / (nJ * w0))


def tail_bound(space, T, cell_radius, ws=None):
    """Upper bound on the weighted sample energy beyond ``|w| > T``.

    The bound holds for ``lambda_max`` of the Gram over ``|w| > T`` when
    every Voronoi cell has Euclidean radius ``<= cell_radius`` (cells meet
    the region ``|xi| > T - cell_radius`` only).  For Haar spaces sampled
    on a lattice ``(1/q) Z^d`` with unit-cell weights a sharper bound from
    discrete Parseval over periods is used.
    """
    rho = float(cell_radius)
    h = _lattice_step(space, ws)
    if h is not None:
        if space.d == 1:
            return _haar_lattice_tail_1d(space, h, T)
        return 2.0 * _haar_lattice_tail_1d(space, h, T / math.sqrt(2))
    d = space.body.dim
    if d == 1:
        return 2.0 * space.envelope_integral(T - 2 * rho)
    a = (T - rho) / math.sqrt(2) - rho
    line = 2 * rho * 1.0 + 2 * (2 * space.n1 / np.pi)
    return 2.0 * 2.0 * space.envelope_integral(a) * line
