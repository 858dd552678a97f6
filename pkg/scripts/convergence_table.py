#!/usr/bin/env python3
"""Print e_n for n = 1..n_max next to the closed-form bounds, for one state and order.

Example::

    python3 scripts/convergence_table.py --state w:k=3 --alpha 0.75 --n-max 5
"""

import argparse

from entmono.cli import DEFAULT_SEED, build_spec, parse_state
from entmono.functionals import closed_lower_bound, closed_upper_bound, finite_n_log_value, spec_theta


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--state", default="ghz:level=2,k=3")
    parser.add_argument("--alpha", type=float, default=0.5)
    parser.add_argument("--n-max", type=int, default=5)
    parser.add_argument("--bipartitions", default=None)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args()

    psi = parse_state(args.state, args.seed)
    spec = build_spec(psi.k, args.bipartitions, None, "balanced")
    theta = spec_theta(spec, psi.k)
    upper = closed_upper_bound(psi, theta, args.alpha)
    lower = closed_lower_bound(psi, theta, args.alpha) if args.alpha >= 0.5 else float("nan")
    print(f"state {args.state}  alpha {args.alpha}  closed bounds [{lower:.6f}, {upper:.6f}]")
    print(f"{'n':>3} {'e_n':>12} {'n e_n - (n-1) e_(n-1)':>24} {'upper - e_n':>12}")
    prev = 0.0
    for n in range(1, args.n_max + 1):
        e = finite_n_log_value(psi, spec, args.alpha, n)
        increment = n * e - (n - 1) * prev
        print(f"{n:>3} {e:>12.6f} {increment:>24.6f} {upper - e:>12.6f}")
        prev = e


if __name__ == "__main__":
    main()
