"""Measure vertical parallelism of the complex structure on complex Minkowski norms.

Whether the vertical condition holds for every strongly convex complex
Minkowski metric is left open; this sweep only reports the residuals.
"""

import argparse

from kbfinsler.classify import residual_J_horizontal, residual_J_vertical
from kbfinsler.connections import PointTables
from kbfinsler.metrics import SamplePlan, make_metric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=16)
    ap.add_argument("--t", type=float, nargs="+", default=[0.0, 0.1, 0.5, 1.0, 2.0])
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3])
    args = ap.parse_args()
    plan = SamplePlan(args.samples)
    print(f"{'t':>5s} {'k':>3s} {'max J_horizontal':>18s} {'max J_vertical':>16s}")
    for k in args.k:
        for t in args.t:
            m = make_metric("minkowski_tk", n=2, t=t, k=k)
            jh = jv = 0.0
            for p in plan.points(m):
                T = PointTables(m, p, order=3)
                jh, jv = max(jh, residual_J_horizontal(T)), max(jv, residual_J_vertical(T))
            print(f"{t:5.2f} {k:3d} {jh:18.2e} {jv:16.2e}")


if __name__ == "__main__":
    main()
