"""Tabulate the knapsack certificate's exponent and degree as the capacity gap grows."""

import argparse
import math
import time

from hypercube_sos.knapsack_cert import assemble_mk_certificate, choose_params


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[25, 49, 100])
    ap.add_argument("--P", type=int, nargs="+", default=[2, 10, 1000, 10**6])
    ap.add_argument("--params-only", action="store_true", help="skip building certificates")
    args = ap.parse_args()

    print(f"{'n':>5} {'P':>8} {'d':>4} {'m':>4} {'m_oracle':>9} {'degree':>7} {'deg/sqrt(n)lnP':>15} {'passed':>7} {'sec':>6}")
    for n in args.n:
        for P in args.P:
            t0 = time.perf_counter()
            if args.params_only:
                p = choose_params(n, P)
                deg, m_or, ok = p.d * p.m, "-", "-"
            else:
                c = assemble_mk_certificate(n, P)
                p, deg, m_or, ok = c.params, c.total_degree, c.m_oracle, c.passed
            scale = deg / (math.sqrt(n) * math.log(P))
            print(f"{n:>5} {P:>8} {p.d:>4} {p.m:>4} {m_or:>9} {deg:>7} {scale:>15.2f} {str(ok):>7} {time.perf_counter() - t0:>6.1f}")


if __name__ == "__main__":
    main()
