#!/usr/bin/env python3
"""Run one V-configuration trajectory and show the telegraph signal.

Usage: python scripts/telegraph_demo.py [duration] [seed]
"""

import sys

import telegraphsim as ts
from telegraphsim.config import RunConfig
from telegraphsim.runner import derive_rng, run_trajectory_renewal


def main() -> None:
    duration = float(sys.argv[1]) if len(sys.argv) > 1 else 2e5
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 42
    cfg = RunConfig(kind="v", duration=duration, master_seed=seed)

    result = run_trajectory_renewal(cfg, derive_rng(seed, 0))
    seg = ts.segment_telegraph(result.records, cfg.resolved_threshold())
    stats = ts.interval_stats(seg)

    print(f"V configuration, duration {duration:g}, seed {seed}")
    print(f"  epochs: {result.epochs}, hits: {len(ts.hits(result.records))}")
    print(f"  bright intervals: {stats.bright_count} (mean {stats.bright_mean:.1f})")
    print(f"  dark intervals:   {stats.dark_count}", end="")
    if stats.dark_count:
        print(f" (mean {stats.dark_mean:.1f}, fitted rate {stats.dark_rate_estimate:.2e})")
    else:
        print()

    # coarse strip chart: one character per bin, # = fluorescing
    bins = 100
    span = seg.intervals[-1].end - seg.intervals[0].start
    strip = []
    for i in range(bins):
        t = seg.intervals[0].start + (i + 0.5) * span / bins
        phase = next(
            (iv.phase for iv in seg.intervals if iv.start <= t <= iv.end), None
        )
        strip.append("#" if phase is ts.Phase.BRIGHT else ".")
    print("  signal: " + "".join(strip))


if __name__ == "__main__":
    main()
