"""Run the parameter search for the shifted quadratic certificate and tabulate degrees."""

import argparse
import time

from hypercube_sos.sqf_cert import search_sqf_certificate

DEFAULT = [(10, 2), (20, 2), (30, 2), (30, 3), (40, 4)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("pairs", nargs="*", help="n,k pairs such as 30,3")
    args = ap.parse_args()
    pairs = [tuple(int(v) for v in p.split(",")) for p in args.pairs] or DEFAULT

    print(f"{'n':>4} {'k':>3} {'passed':>7} {'deg s':>6} {'deg cert':>9} {'e_g':>4} {'d_H':>4} {'e_p':>4} {'m_s2':>5} {'tried':>6} {'sec':>6}")
    for n, k in pairs:
        t0 = time.perf_counter()
        c = search_sqf_certificate(n, k)
        p = c.params
        print(
            f"{n:>4} {k:>3} {str(c.passed):>7} {c.total_degree:>6} {c.certificate_degree:>9} "
            f"{p.e_g:>4} {p.d_H:>4} {p.e_p:>4} {p.m_s2:>5} {c.searched:>6} {time.perf_counter() - t0:>6.1f}"
        )


if __name__ == "__main__":
    main()
