"""Build both set-cover certificates for a list of sizes and report degrees and timings."""

import argparse
import math
import time

from hypercube_sos.setcover_cert import assemble_sc_appendix, assemble_sc_main


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[12, 25, 49])
    ap.add_argument("--route", choices=["main", "appendix", "both"], default="both")
    args = ap.parse_args()

    print(f"{'route':>9} {'n':>5} {'passed':>7} {'degree':>7} {'sqrt(n)log2(n)':>15} {'sec':>7}")
    for n in args.n:
        ref = math.sqrt(n) * math.log2(n)
        for route, build in (("main", assemble_sc_main), ("appendix", assemble_sc_appendix)):
            if args.route not in (route, "both"):
                continue
            t0 = time.perf_counter()
            c = build(n)
            failed = [r.name for r in getattr(c, "property_reports", []) + getattr(c, "lemma_reports", []) + c.condition_reports if not r.verdict]
            print(f"{route:>9} {n:>5} {str(c.passed):>7} {c.total_degree:>7} {ref:>15.1f} {time.perf_counter() - t0:>7.1f}" + (f"  failed: {failed}" if failed else ""))


if __name__ == "__main__":
    main()
