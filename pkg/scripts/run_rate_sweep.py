#!/usr/bin/env python3
"""Print a gap-versus-n table for a corpus family and a catalog shape function."""

import argparse

from sublln.corpus import catalog_for, corpus_families
from sublln.lln_rates import rate_sweep


def main() -> int:
    families = corpus_families()
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--family", choices=sorted(families), default="three_atom")
    parser.add_argument("--phi", default="abs_dev", help="catalog name prefix (e.g. linear, abs_dev, clip)")
    parser.add_argument("--n-max", type=int, default=1024)
    parser.add_argument("--alpha", type=float, default=1.0)
    args = parser.parse_args()

    family = families[args.family]
    matches = [phi for phi in catalog_for(family) if phi.name.startswith(args.phi)]
    if not matches:
        parser.error(f"no catalog entry starting with {args.phi!r}")
    phi = matches[0]
    schedule = [n for n in (2**k for k in range(11)) if n <= args.n_max]
    reports = rate_sweep(family, phi, schedule, alphas=(args.alpha,))

    print(f"family={args.family}  phi={phi.name}  L={phi.lipschitz_constant:g}")
    header = f"{'n':>6} {'expectation':>14} {'limit':>10} {'gap':>12} {'rate bound':>12} {'corollary':>12}"
    print(header)
    print("-" * len(header))
    for rep in reports:
        corollary = f"{rep.bound_corollary:12.6f}" if rep.bound_corollary is not None else " " * 12
        print(
            f"{rep.n:>6} {rep.expectation:14.8f} {rep.limit:10.6f} {rep.gap:12.8f} "
            f"{rep.bound_theorem3[args.alpha]:12.6f} {corollary}"
            + ("" if rep.all_hold else "  VIOLATION")
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
