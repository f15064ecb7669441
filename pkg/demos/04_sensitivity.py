"""How the load-control yield responds to the coupling parameters.

Sweeps the load factor (comm demand relative to total load), the number of
comm nodes, and the two interdependence degrees at 10% initial removal.
Means are over networks that survive the pruning phase.
"""

import argparse

from intercascade import ExperimentConfig, ScenarioParams, run_sweep

parser = argparse.ArgumentParser()
parser.add_argument("--seeds", type=int, default=5)
parser.add_argument("--n-power", type=int, default=100)
args = parser.parse_args()

seeds = tuple(range(args.seeds))


def sweep(axis, values, **params):
    config = ExperimentConfig(params=ScenarioParams(n_power=args.n_power, **params), removal_fractions=(0.1,),
                              seeds=seeds, axis=axis, values=values)
    _, summary = run_sweep(config)
    print(f"\n{axis} ({', '.join(f'{k}={v}' for k, v in params.items()) or 'defaults'})")
    for s in summary:
        mean = "no data" if s["mean_yield"] is None else f"{s['mean_yield']:.3f}"
        print(f"  {s['axis_value']:>8}  yield {mean}  feasible {s['n_feasible']}/{s['n_rows']}")


sweep("load_factor", (1e-4, 1e-3, 1e-2, 1e-1))
n = args.n_power
sweep("n_comm", (n // 2, n, 2 * n), load_factor=0.1)
sweep("comm_interdep_degree", (1, 2, 3, 4), load_factor=0.1)
sweep("power_interdep_degree", (1, 2, 3, 4), load_factor=0.1)
