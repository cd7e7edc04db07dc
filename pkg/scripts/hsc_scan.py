"""Holomorphic sectional curvature statistics for every catalog metric."""

import argparse

from kbfinsler.curvature import constant_hsc_scan
from kbfinsler.metrics import CATALOG, SamplePlan, make_metric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=64)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--mode", choices=("jet", "fd"), default="jet")
    args = ap.parse_args()
    plan = SamplePlan(args.samples, args.seed)
    print(f"{'metric':22s} {'min':>12s} {'max':>12s} {'mean':>12s} {'spread':>10s}  constant")
    for name in CATALOG:
        scan = constant_hsc_scan(make_metric(name), plan, mode=args.mode)
        s = scan.stats
        print(f"{name:22s} {s['min']:12.6f} {s['max']:12.6f} {s['mean']:12.6f} {s['spread']:10.2e}  {scan.constant}")


if __name__ == "__main__":
    main()
