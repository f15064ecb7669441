"""Uncontrolled cascades on random coupled networks.

Compares three views of the same damage:
  * the grid alone with overload tripping,
  * the coupled system with overload tripping and dependency failures,
  * the pure connectivity model, where only graph structure matters.

Run with --seeds 30 --n-power 500 for the full-size setting (slow).
"""

import argparse

from intercascade import ExperimentConfig, ScenarioParams, run_sweep

parser = argparse.ArgumentParser()
parser.add_argument("--seeds", type=int, default=5)
parser.add_argument("--n-power", type=int, default=100)
args = parser.parse_args()

fractions = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
config = ExperimentConfig(params=ScenarioParams(n_power=args.n_power), removal_fractions=fractions,
                          seeds=tuple(range(args.seeds)),
                          policies=("isolated_none", "none", "connectivity_only"))
rows, summary = run_sweep(config)
table = {(s["removal_fraction"], s["policy"]): s for s in summary}

print(f"{'removed':>8} {'isolated yield':>15} {'coupled yield':>14} {'coupled lcc':>12} {'connectivity lcc':>17}")
for f in fractions:
    iso, cou, con = (table[(f, p)] for p in ("isolated_none", "none", "connectivity_only"))
    print(f"{f:8.2f} {iso['mean_yield']:15.3f} {cou['mean_yield']:14.3f} {cou['mean_lcc_ratio']:12.3f}"
          f" {con['mean_lcc_ratio']:17.3f}")
