"""Reconstructing a smooth function from nonuniform Fourier samples.

The target lives on [-1, 1] and is known through its Fourier transform at
jittered frequencies up to K = 2 N^2.  Weighted least squares onto
polynomials of degree N gives an error close to the best approximation,
and always below the stability bound sqrt(W / V) times that best error.

    python3 demos/reconstruction.py [out_dir]
"""

import csv
import sys
from pathlib import Path

import numpy as np

from nufourier import LegendreSpace, box, gen_jittered, voronoi_weights_1d
from nufourier.nugs import error_report, reconstruct, sample_function


def main(out_dir="demo_output"):
    out = Path(out_dir)
    out.mkdir(exist_ok=True)
    amb = LegendreSpace(40)
    f = amb.coefficients_of(lambda x: np.exp(np.sin(3 * x)) / (1.5 + x))
    rows = []
    for N in (4, 8, 12, 16):
        K = 2 * N**2
        ws = voronoi_weights_1d(gen_jittered(0.45, 0.2, 1, K + 8, seed=3), box(1.0), K)
        space = LegendreSpace(N)
        res = reconstruct(sample_function(f, amb, ws), ws, space)
        rep = error_report(f, res, space, amb)
        rows.append({"N": N, "K": K, "samples": len(ws), "error": rep["error"],
                     "best": rep["best_approximation"], "bound": rep["bound"]})
        print(f"N = {N:2d}  K = {K:4d}  samples = {len(ws):4d}  error = {rep['error']:.2e}  "
              f"best = {rep['best_approximation']:.2e}  bound = {rep['bound']:.2e}")
    with open(out / "reconstruction.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main(*sys.argv[1:])
