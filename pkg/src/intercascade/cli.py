"""Command-line driver.

    intercascade generate --seed 3 --out scenario.json
    intercascade run --seed 3 --removal-fraction 0.1 --policy none,load_control
    intercascade compare --seeds 10 --removal-fraction 0.05,0.1,0.2
    intercascade sweep --axis load_factor --values 1e-4,1e-2,1e-1 --out rows.csv
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from .experiments import AXES, CSV_HEADER, POLICIES, ExperimentConfig, run_sweep
from .lp import LpSolverError
from .scenarios import ScenarioParams, build_scenario
from .serialization import load_scenario, save_scenario, scenario_to_dict

PAPER_SCALE = {"n_power": 500, "seeds": 30}
COMPARE_POLICIES = ("none", "simple", "load_control", "isolated_bound")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text: str) -> list[str]:
    names = [v.strip() for v in text.split(",") if v.strip()]
    bad = [n for n in names if n not in POLICIES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown policy {bad[0]!r}; choose from {', '.join(POLICIES)}")
    return names


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--seed", type=int, default=0, help="scenario seed (first seed with --seeds)")
    g.add_argument("--n-power", type=int, default=None, help="power buses (default 100)")
    g.add_argument("--n-comm", type=int, default=None, help="comm nodes (default: same as --n-power)")
    g.add_argument("--degree", type=float, default=4.0, help="expected degree of both graphs")
    g.add_argument("--comm-degree", type=float, default=None, help="expected degree of the comm graph")
    g.add_argument("--lf", type=float, default=1e-4, help="load factor: comm demand over total load")
    g.add_argument("--fos", type=float, default=1.2, help="line capacity factor of safety")
    g.add_argument("--comm-interdep-degree", type=float, default=1.0)
    g.add_argument("--power-interdep-degree", type=float, default=1.0)
    g.add_argument("--paper-scale", action="store_true", help="500 buses and 30 seeds")


def _add_run_args(p: argparse.ArgumentParser, default_policies, default_seeds: int) -> None:
    _add_scenario_args(p)
    p.add_argument("--scenario", metavar="PATH", help="use a saved scenario instead of generating one")
    p.add_argument("--seeds", type=int, default=default_seeds, metavar="N",
                   help=f"number of consecutive seeds (default {default_seeds})")
    p.add_argument("--removal-fraction", type=_floats, default=[0.1], metavar="F[,F...]")
    p.add_argument("--removal-mode", choices=("power", "joint"), default="power",
                   help="remove power nodes only, or the same fraction from both networks")
    p.add_argument("--policy", type=_names, default=list(default_policies), metavar="P[,P...]",
                   help=f"any of {', '.join(POLICIES)}")
    p.add_argument("--out", metavar="PATH", help="result rows as CSV (default: stdout for run)")
    p.add_argument("--summary", metavar="PATH", help="aggregate rows as CSV")
    p.add_argument("--trace", metavar="PATH", help="append per-round JSON lines of uncontrolled cascades")
    p.add_argument("--count-infeasible", action="store_true",
                   help="count infeasible networks as yield 0 in the means")
    p.add_argument("--method", choices=("highs", "simplex"), default="highs", help="LP backend")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="intercascade", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a scenario JSON document")
    _add_scenario_args(gen)
    gen.add_argument("--out", metavar="PATH", help="output file (default: stdout)")

    run = sub.add_parser("run", help="all requested policies on one scenario point")
    _add_run_args(run, POLICIES, 1)

    cmp_ = sub.add_parser("compare", help="policy table over seeds and removal fractions")
    _add_run_args(cmp_, COMPARE_POLICIES, 10)

    sweep = sub.add_parser("sweep", help="mean yield along one parameter axis")
    _add_run_args(sweep, ("load_control",), 10)
    sweep.add_argument("--axis", choices=AXES, required=True)
    sweep.add_argument("--values", type=_floats, required=True, metavar="V[,V...]")
    return parser


def _params(args) -> ScenarioParams:
    n_power = args.n_power
    if n_power is None:
        n_power = PAPER_SCALE["n_power"] if args.paper_scale else 100
    return ScenarioParams(
        n_power=n_power, n_comm=args.n_comm, expected_degree=args.degree,
        comm_expected_degree=args.comm_degree, load_factor=args.lf, fos=args.fos,
        comm_interdep_degree=args.comm_interdep_degree, power_interdep_degree=args.power_interdep_degree,
        seed=args.seed,
    )


def _config(args) -> ExperimentConfig:
    n_seeds = args.seeds
    if args.paper_scale and n_seeds < PAPER_SCALE["seeds"]:
        n_seeds = PAPER_SCALE["seeds"]
    scenario = load_scenario(args.scenario) if args.scenario else None
    axis = getattr(args, "axis", None)
    if scenario is not None and axis not in (None, "removal_fraction"):
        raise ValueError(f"--axis {axis} changes generation parameters and cannot apply to --scenario")
    return ExperimentConfig(
        params=_params(args), removal_fractions=args.removal_fraction, policies=args.policy,
        seeds=tuple(range(args.seed, args.seed + n_seeds)), axis=axis, values=getattr(args, "values", ()),
        removal_mode=args.removal_mode, scenario=scenario, count_infeasible=args.count_infeasible,
        lp_method=args.method, jobs=args.jobs, trace_path=args.trace,
    )


def _print_summary(summary, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["axis_value", "removal_fraction", "policy", "n_rows", "n_feasible", "mean_yield",
                "mean_lcc_ratio"])
    for s in summary:
        mean = "no-data" if s["mean_yield"] is None else f"{s['mean_yield']:.4f}"
        lcc = "" if s["mean_lcc_ratio"] is None else f"{s['mean_lcc_ratio']:.4f}"
        w.writerow([s["axis_value"], s["removal_fraction"], s["policy"], s["n_rows"], s["n_feasible"], mean, lcc])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            scenario = build_scenario(_params(args))
            if args.out:
                save_scenario(scenario, args.out)
            else:
                json.dump(scenario_to_dict(scenario), sys.stdout, indent=1, sort_keys=True)
                sys.stdout.write("\n")
            return 0

        config = _config(args)
        rows, summary = run_sweep(config, args.out, args.summary)
        if args.command == "run" and not args.out:
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(CSV_HEADER)
            w.writerows(r.csv_row() for r in rows)
        else:
            _print_summary(summary, sys.stdout)
        failed = [r for r in rows if r.error]
        for r in failed:
            print(f"error: seed {r.seed} fraction {r.removal_fraction} {r.policy}: {r.error}", file=sys.stderr)
        return 1 if failed else 0
    except (ValueError, OSError, LpSolverError) as exc:
        print(f"intercascade: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
