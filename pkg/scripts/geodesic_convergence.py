"""Step-halving study of the RK4 geodesic integrator on the Poincare disk (x(t) = tanh t)."""

import argparse

import numpy as np

from kbfinsler.metrics import make_metric
from kbfinsler.transport import integrate_geodesic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, nargs="+", default=[10, 20, 40, 80, 160, 320])
    ap.add_argument("--T", type=float, default=1.0)
    args = ap.parse_args()
    m = make_metric("bergman", n=1, c=-4)
    prev = None
    print(f"{'steps':>6s} {'error':>12s} {'ratio':>8s} {'energy drift':>14s}")
    for s in args.steps:
        rec = integrate_geodesic(m, [0, 0], [1, 0], args.T, s)
        err = abs(rec.x[-1, 0] - np.tanh(args.T))
        ratio = f"{prev / err:8.2f}" if prev else " " * 8
        print(f"{s:6d} {err:12.3e} {ratio} {rec.energy_drift:14.3e}")
        prev = err


if __name__ == "__main__":
    main()
