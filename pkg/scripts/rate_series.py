"""Lifted rate for N=10, r=7 over M=2..10, next to the capacity of a T=7 replicated system."""

import argparse

from oneshot_pir.rates import capacity, decimal6, exact, lifted_rate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=10)
    ap.add_argument("--r", type=int, default=7)
    ap.add_argument("--max-M", type=int, default=10)
    args = ap.parse_args()
    print(f"{'M':>3} {'lifted':>10} {'capacity(T=r)':>14}  exact")
    for M in range(2, args.max_M + 1):
        rate = lifted_rate(args.N, args.r, M)
        print(f"{M:>3} {decimal6(rate):>10} {decimal6(capacity(args.N, args.r, M)):>14}  {exact(rate)}")


if __name__ == "__main__":
    main()
