"""Per-order deviation between jet partials and finite differences, with a step-size sweep."""

import argparse

import numpy as np

from kbfinsler.calculus import FD_STEP, fd_agreement
from kbfinsler.metrics import CATALOG, SamplePlan, make_metric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=32)
    ap.add_argument("--steps", type=float, nargs="+", default=[0.02, FD_STEP, 0.04])
    args = ap.parse_args()
    plan = SamplePlan(args.samples)
    for h in args.steps:
        print(f"h = {h:g}")
        for name in CATALOG:
            m = make_metric(name)
            worst = np.zeros(5)
            for p in plan.points(m):
                e = fd_agreement(m, p, h=h)
                worst = np.maximum(worst, [e[k] for k in range(5)])
            print(f"  {name:22s} " + " ".join(f"{w:9.1e}" for w in worst))
        print()


if __name__ == "__main__":
    main()
