"""Sweep the off-interval Chebyshev growth bounds over a grid and report failures."""

import argparse
import csv
import sys
from fractions import Fraction

from hypercube_sos.cheb_bounds import refinement_threshold, verify_growth_bounds


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=200)
    ap.add_argument("--d-step", type=int, default=10)
    ap.add_argument("--csv", default=None, help="write one row per check")
    args = ap.parse_args()

    rows = []
    for n in range(2, args.n_max + 1):
        for d in range(2, n + 1, args.d_step):
            for c in (0, 1, Fraction(n, 4), Fraction(n, 2), n, 2 * n, 5 * n):
                chk = verify_growth_bounds(n, d, c, include_refined=c <= n)
                rows.append((n, d, str(c), chk.case, chk.passed, chk.verdicts.get("refined_upper")))
    fails = [r for r in rows if not r[4]]
    refined_fails = [r for r in rows if r[5] is False]
    print(f"{len(rows)} checks, {len(fails)} failures of the proven bounds")
    print(f"sharper large-n upper bound fails at {len(refined_fails)} grid points")
    for c in (0, 1, 2):
        print(f"  c={c}: sharper bound holds from n = {refinement_threshold(c, range(2, args.n_max + 1))} (d = n)")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "d", "c", "case", "passed", "refined_upper"])
            w.writerows(rows)
    sys.exit(1 if fails else 0)


if __name__ == "__main__":
    main()
