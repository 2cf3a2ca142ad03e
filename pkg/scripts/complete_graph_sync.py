#!/usr/bin/env python
"""Sync-time statistics on all-to-all networks for a range of sizes and b."""
from __future__ import annotations

import argparse

import numpy as np

from tradesync.dynamics import run_ensemble
from tradesync.generators import complete


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[5, 10, 20, 40])
    p.add_argument("--b", type=float, nargs="+", default=[0.5, 1.0, 3.0])
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    print("N    b     synced  mean_sync  p90_sync  mean_cascades")
    for n in args.sizes:
        net = complete(n)
        for b in args.b:
            runs = run_ensemble(net, b, range(args.seed, args.seed + args.replicas),
                                sync_fraction=1.0, sample_interval=None, max_cycles=1e4)
            times = np.array([r.sync_time for r in runs if r.synced])
            n_casc = np.mean([len(r.cascades) for r in runs])
            print(f"{n:<4} {b:<5g} {times.size:>6}  {times.mean():>9.3f}  "
                  f"{np.percentile(times, 90):>8.3f}  {n_casc:>13.1f}")


if __name__ == "__main__":
    main()
