"""Stable reconstruction from nonuniform Fourier samples.

Sampling-set geometry in polar norms, Voronoi weights, concentration and
residual measures for polynomial and Haar reconstruction spaces, explicit
frame and Bessel bounds, weighted least-squares reconstruction and the
scaling experiments built on them.
"""

from .geometry import (
    ConvexBody, GapEstimate, InsufficientExtentError, SamplingSet, ball, box,
    covering_number, gap, norm_D, norm_polar, separation, volumes,
)
from .sampling import gen_grid, gen_jittered, gen_radial, gen_spiral, truncate
from .spaces import (
    HaarSpace, LegendreSpace, continuous_gram, discrete_gram, fourier_row, parse_space,
)
from .weights import WeightedSamples, voronoi_weights, voronoi_weights_1d, voronoi_weights_nd

__version__ = "0.1.0"
