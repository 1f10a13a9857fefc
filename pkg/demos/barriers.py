"""Sampling below the stable rate.

Two sequences collapse when the truncation radius grows too slowly:

* Legendre polynomials on (1/2)Z with K = N (linear instead of quadratic);
* 2D Haar spaces on Z^2 with K = 4 * 2^(J/2), where an explicit witness
  built from a concentration polynomial has almost no energy in B_K.

    python3 demos/barriers.py [out_dir]
"""

import json
import sys
from pathlib import Path

from nufourier import HaarSpace, LegendreSpace, box, gen_grid, voronoi_weights_1d
from nufourier.experiments import barrier_demo
from nufourier.weights import lattice_weights


def main(out_dir="demo_output"):
    out = Path(out_dir)
    out.mkdir(exist_ok=True)
    leg = barrier_demo(
        LegendreSpace, lambda N, T: voronoi_weights_1d(gen_grid(0.5, 1, T + 2), box(1.0), T),
        1.0, 1.0, [8, 16, 24, 32],
    )
    print("Legendre, K = N")
    for r in leg:
        print(f"  N = {r['param']:2d}   V = {r['V']:.3e}")
    wit = barrier_demo(
        lambda J: HaarSpace(J, 2),
        lambda J, K: lattice_weights(gen_grid(1.0, 2, K + 1), box(0.5, 2), K),
        0.5, 4.0, [3, 4, 5, 6], scale="linear", witness=True,
    )
    print("Haar 2D, K = 4 * 2^(J/2)")
    for r in wit:
        print(f"  J = {r['param']}   K = {r['K']:6.2f}   V = {r['V']:.3e}   "
              f"witness = {r['witness_rayleigh']:.3e}")
    (out / "barriers.json").write_text(json.dumps({"legendre": leg, "haar_witness": wit},
                                                  indent=2) + "\n")


if __name__ == "__main__":
    main(*sys.argv[1:])
