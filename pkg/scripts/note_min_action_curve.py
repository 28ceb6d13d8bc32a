#!/usr/bin/env python3
"""Trace the collusion collapse as the price floor rises (single-state lab).

Sweeps the minimum action of the 20-price single-state grid and prints mean
CI per floor plus the estimated collapse threshold (largest crossing of half
the maximum CI).
"""

import argparse
from dataclasses import replace

from bertrandq import metrics
from bertrandq.harness import NOTE_BASE, run_experiment
from bertrandq.note_lab import threshold_estimate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--floors", type=float, nargs="+",
                    default=[0.20, 0.25, 0.30, 0.35, 0.40])
    ap.add_argument("--sessions", type=int, default=30)
    ap.add_argument("--master-seed", type=int, default=0)
    ap.add_argument("--alpha", type=float, default=0.15,
                    help="learning rate (near 1 the bubble is overwritten "
                         "and no collapse threshold is observable)")
    args = ap.parse_args()

    curve = {}
    for f in args.floors:
        cfg = replace(NOTE_BASE, alpha=args.alpha, note_min_action=f)
        em = metrics.summarize(
            run_experiment(cfg, args.sessions, master_seed=args.master_seed)
        )
        curve[f] = em.mean_ci
        print(f"floor {f:.2f}: mean CI {em.mean_ci:.4f}")
    if len(curve) >= 2:
        print(f"collapse threshold estimate: {threshold_estimate(curve):.3f}")


if __name__ == "__main__":
    main()
