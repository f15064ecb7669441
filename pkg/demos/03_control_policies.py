"""Simple shedding against two-phase load control.

The simple policy sheds load without looking at which loads feed the
communication network, so it tends to starve comm nodes and lose control of
generators. Load control first prunes what cannot be saved and then keeps
every remaining comm node powered. The isolated-grid LP gives a reference
ceiling.
"""

import argparse

from intercascade import ExperimentConfig, ScenarioParams, run_sweep

parser = argparse.ArgumentParser()
parser.add_argument("--seeds", type=int, default=5)
parser.add_argument("--n-power", type=int, default=100)
args = parser.parse_args()

fractions = (0.02, 0.05, 0.1, 0.15, 0.2, 0.3)
policies = ("none", "simple", "load_control", "isolated_bound")
config = ExperimentConfig(params=ScenarioParams(n_power=args.n_power), removal_fractions=fractions,
                          seeds=tuple(range(args.seeds)), policies=policies, count_infeasible=True)
rows, summary = run_sweep(config)
table = {(s["removal_fraction"], s["policy"]): s["mean_yield"] for s in summary}

print("mean yield (networks lost in pruning count as 0)")
print(f"{'removed':>8}" + "".join(f"{p:>16}" for p in policies))
for f in fractions:
    print(f"{f:8.2f}" + "".join(f"{table[(f, p)]:16.3f}" for p in policies))

statuses = {}
for r in rows:
    if r.policy == "load_control":
        statuses[r.lp_status] = statuses.get(r.lp_status, 0) + 1
print("load-control outcomes:", statuses)
