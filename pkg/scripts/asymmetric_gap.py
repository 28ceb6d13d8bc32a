#!/usr/bin/env python3
"""Measure the informed-firm collusion premium at the fine price grid.

Runs the two endpoints of the asymmetric sweep — both firms fully informed
versus one firm fully uninformed — at l = 200 with winner-take-all ties and
prints the mean-CI gap. The premium needs fine price steps: on the coarse
desk grid the informed firm cannot "teach" with small upward deviations and
the gap vanishes.
"""

import argparse
import time
from dataclasses import replace

from bertrandq import metrics
from bertrandq.harness import preset_points, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sessions", type=int, default=20)
    ap.add_argument("--master-seed", type=int, default=0)
    ap.add_argument("--nu", type=float, default=100.0,
                    help="expected exploration visits per Q cell")
    ap.add_argument("--max-periods", type=int, default=20_000_000)
    args = ap.parse_args()

    points = dict(preset_points("asymmetric-entropy"))
    ci = {}
    for h in (0, 4):
        cfg = replace(
            points[f"H(0,{h})"],
            beta=None,
            nu=args.nu,
            max_periods=args.max_periods,
        )
        t0 = time.time()
        em = metrics.summarize(
            run_experiment(cfg, args.sessions, master_seed=args.master_seed)
        )
        ci[h] = em.mean_ci
        print(
            f"H(0,{h}): mean CI {em.mean_ci:.4f} "
            f"({em.n_unconverged} unconverged, {time.time() - t0:.0f}s)"
        )
    print(f"gap (0,4) - (0,0): {ci[4] - ci[0]:+.4f}")


if __name__ == "__main__":
    main()
