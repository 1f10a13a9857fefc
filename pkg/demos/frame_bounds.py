"""Explicit frame and Bessel bounds against measured stability constants.

For jittered one-dimensional sets of increasing density the script prints
the measured gap, the certified lower frame bound A, the measured
concentration V, the Bessel bound and the measured largest eigenvalue W.
The certified bound is far from sharp, but it holds on every set.

    python3 demos/frame_bounds.py [out_dir]
"""

import csv
import sys
from pathlib import Path

from nufourier import box, gap, gen_jittered, voronoi_weights_1d, LegendreSpace
from nufourier.measures import bessel_bound, frame_bound_A, measure_V, measure_W


def main(out_dir="demo_output"):
    out = Path(out_dir)
    out.mkdir(exist_ok=True)
    space = LegendreSpace(8)
    body = space.body
    K = 2 * 8**2
    rows = []
    for h in (0.15, 0.2, 0.25, 0.3, 0.35):
        sset = gen_jittered(h, 0.2, 1, K + 8, seed=1)
        delta = gap(sset, body, K, 0.01).upper
        ws = voronoi_weights_1d(sset, body, K + 4)
        W, W_bound = measure_W(space, ws, K)
        rows.append({
            "h": h, "delta": delta, "A": frame_bound_A(body, delta),
            "V": measure_V(space, ws, K), "W": W, "W_bound": W_bound,
        })
    print(f"{'h':>5} {'delta':>7} {'A':>10} {'V':>8} {'W':>8} {'W_bound':>8}")
    for r in rows:
        print(f"{r['h']:5.2f} {r['delta']:7.3f} {r['A']:10.3e} {r['V']:8.4f} {r['W']:8.4f} "
              f"{r['W_bound']:8.3f}")
    with open(out / "frame_bounds.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main(*sys.argv[1:])
