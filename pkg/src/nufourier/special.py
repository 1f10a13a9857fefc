"""Decay envelope for spherical Bessel functions.

The Fourier transform of an orthonormal Legendre polynomial is a scaled
spherical Bessel function.  Values come from :func:`scipy.special.spherical_jn`;
this module only adds an explicit upper bound used by tail estimates.
"""

import numpy as np

__all__ = ["hankel_envelope"]


def hankel_envelope(n, x):
    """Upper bound for ``|x j_n(x)|`` valid for ``x > 0``.

    Uses the terminating Hankel expansion of the spherical Hankel
    function: ``|x j_n(x)| <= sum_k (n+k)! / (k! (n-k)! (2x)^k)``.
    The bound tends to 1 as ``x`` grows.
    """
    x = np.asarray(x, dtype=float)
    total = np.ones_like(x)
    coeff = 1.0
    for k in range(1, n + 1):
        coeff *= (n + k) * (n - k + 1) / k
        total = total + coeff / (2.0 * x) ** k
    return total
