#!/usr/bin/env python3
"""Run an information-structure sweep and print a mean-CI table.

Examples:
    python3 scripts/run_entropy_sweep.py --preset symmetric-entropy --desk
    python3 scripts/run_entropy_sweep.py --preset entropy-grid --desk \
        --sessions 20 --out results/grid
"""

import argparse

from bertrandq import metrics
from bertrandq.harness import sweep
from bertrandq.io import emit_results


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="symmetric-entropy")
    ap.add_argument("--master-seed", type=int, default=0)
    ap.add_argument("--sessions", type=int, default=None)
    ap.add_argument("--desk", action="store_true",
                    help="coarse grid, nu=100, 2e7-period cap")
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--out", default=None, help="emit CSV tables here")
    args = ap.parse_args()

    results = sweep(
        args.preset,
        master_seed=args.master_seed,
        sessions=args.sessions,
        desk=args.desk,
        parallel=args.parallel,
    )
    print(f"{'experiment':<14} {'mean CI':>8} {'unconverged':>12} {'periods':>12}")
    for label, summary in results.items():
        em = metrics.summarize(summary)
        print(
            f"{label:<14} {em.mean_ci:8.4f} {em.n_unconverged:>12d} "
            f"{int(em.periods.mean()):>12d}"
        )
    if args.out:
        emit_results(results, args.out, args.master_seed)
        print(f"tables written to {args.out}")


if __name__ == "__main__":
    main()
