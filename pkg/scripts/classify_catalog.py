"""Verdict matrix: every predicate against every catalog metric."""

import argparse

from kbfinsler.classify import PREDICATES, classify
from kbfinsler.metrics import CATALOG, SamplePlan, make_metric

SHORT = {"holds": "+", "fails": ".", "indeterminate": "?"}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=32)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--residuals", action="store_true", help="print max residuals instead of symbols")
    args = ap.parse_args()
    plan = SamplePlan(args.samples, args.seed)
    reports = {name: classify(make_metric(name), plan) for name in CATALOG}
    width = max(map(len, PREDICATES))
    print(" " * width + "  " + "  ".join(f"{n[:10]:>10s}" for n in reports))
    for pred in PREDICATES:
        cells = []
        for rep in reports.values():
            r = rep.get(pred)
            cells.append(f"{r.max_residual:10.1e}" if args.residuals else f"{SHORT[r.verdict]:>10s}")
        print(f"{pred:{width}s}  " + "  ".join(cells))
    print("\n+ holds   . fails   ? within 10x tolerance")


if __name__ == "__main__":
    main()
