"""Experiment runner: scenario points, policy comparisons and sweeps."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .cascade import CapacityRule, assign_capacities, run_interdependent_cascade, run_power_cascade, yield_of
from .interdependency import connectivity_cascade
from .mitigation import (
    DEFAULT_LP_METHOD,
    isolated_grid_state,
    iterative_simple_policy,
    load_control_policy,
)
from .network_model import PowerGrid, largest_component_size
from .scenarios import Scenario, ScenarioParams, build_scenario, draw_removals, removal_rng

log = logging.getLogger(__name__)

POLICIES = ("none", "isolated_none", "simple", "load_control", "isolated_bound", "connectivity_only")
AXES = ("load_factor", "n_comm", "comm_interdep_degree", "power_interdep_degree", "removal_fraction")
CSV_HEADER = ["seed", "removal_fraction", "policy", "axis", "axis_value", "yield", "feasible",
              "lcc_ratio", "iterations", "wall_ms"]
SUMMARY_HEADER = ["axis", "axis_value", "removal_fraction", "policy", "n_rows", "n_feasible",
                  "mean_yield", "mean_lcc_ratio"]


@dataclass
class ScenarioResult:
    seed: int
    removal_fraction: float
    policy: str
    axis: str = ""
    axis_value: float | str = ""
    yield_: float = math.nan
    feasible: bool = False
    lcc_ratio: float = math.nan
    iterations: int = 0
    wall_ms: float = 0.0
    error: str = ""
    lp_status: str = ""  # load_control only; not part of the CSV

    def csv_row(self) -> list:
        return [self.seed, _fmt(self.removal_fraction), self.policy, self.axis, _fmt(self.axis_value),
                _fmt(self.yield_), int(self.feasible), _fmt(self.lcc_ratio), self.iterations,
                f"{self.wall_ms:.3f}"]


@dataclass
class ExperimentConfig:
    params: ScenarioParams = field(default_factory=ScenarioParams)
    removal_fractions: Sequence[float] = (0.1,)
    policies: Sequence[str] = ("load_control",)
    seeds: Sequence[int] = tuple(range(10))
    axis: str | None = None
    values: Sequence[float] = ()
    removal_mode: str = "power"
    scenario: Scenario | None = None  # fixed scenario instead of generated ones
    count_infeasible: bool = False
    lp_method: str = DEFAULT_LP_METHOD
    jobs: int = 1
    trace_path: str | None = None

    def __post_init__(self):
        if not self.policies:
            raise ValueError("at least one policy is required")
        bad = [p for p in self.policies if p not in POLICIES]
        if bad:
            raise ValueError(f"unknown policies {bad}; choose from {POLICIES}")
        if any(not 0 <= f <= 1 for f in self.removal_fractions):
            raise ValueError("removal fractions must lie in [0, 1]")
        if self.axis is not None and self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; choose from {AXES}")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def _lcc_ratio(grid: PowerGrid, n_removed: int) -> float:
    remaining = grid.n_buses - n_removed
    if remaining <= 0:
        return 0.0
    return largest_component_size(grid.graph()) / remaining


def _run_policy(policy: str, scenario: Scenario, power: list[int], comm: list[int], method: str,
                trace_path: str | None, tag: dict):
    """Returns (yield, feasible, final grid, iterations, lp status)."""
    inet = scenario.inet
    base = inet.grid
    if policy in ("none", "isolated_none"):
        work = inet.copy()
        work.apply_removals(power, comm)
        trace = run_interdependent_cascade(work) if policy == "none" else run_power_cascade(work.grid)
        if trace_path:
            trace.write_jsonl(trace_path, mode="a", policy=policy, **tag)
        return yield_of(trace.grid, base), True, trace.grid, trace.n_rounds, ""
    if policy == "simple":
        out = iterative_simple_policy(inet, power, comm, method)
        return out.yield_, out.feasible, out.grid, out.iterations, ""
    if policy == "load_control":
        out = load_control_policy(inet, power, comm, method)
        status = out.lp_status.value if out.lp_status is not None else "collapsed"
        return out.yield_, out.feasible, out.grid, out.iterations, status
    if policy == "isolated_bound":
        work = isolated_grid_state(base, power, method)
        return yield_of(work, base), True, work, 1, ""
    if policy == "connectivity_only":
        lost_p, lost_c = connectivity_cascade(inet, power, comm)
        work = base.copy()
        work.fail_buses(list(power) + sorted(lost_p))
        survived = bool(work.bus_alive.any())
        return yield_of(work, base), survived, work, 1, ""
    raise ValueError(f"unknown policy {policy!r}")


def _prepare(config: ExperimentConfig, params: ScenarioParams) -> Scenario:
    if config.scenario is not None:
        scenario = config.scenario
        grid = scenario.inet.grid
        if np.any(np.isnan(grid.capacity)):
            scenario.inet.grid = assign_capacities(grid, CapacityRule(scenario.params.fos))
        return scenario
    return build_scenario(params)


def run_point(config: ExperimentConfig, params: ScenarioParams, seed: int, fraction: float,
              axis: str = "", axis_value="") -> list[ScenarioResult]:
    """All requested policies on one (scenario, seed, removal fraction)."""
    rows = []
    tag = {"seed": seed, "removal_fraction": fraction, "axis": axis, "axis_value": axis_value}
    try:
        scenario = _prepare(config, params.with_(seed=seed))
        power, comm = draw_removals(scenario.inet, fraction, removal_rng(seed, fraction), config.removal_mode)
    except Exception as exc:  # noqa: BLE001 - recorded per row
        log.warning("scenario generation failed for seed %s: %s", seed, exc)
        return [ScenarioResult(seed, fraction, p, axis, axis_value, error=str(exc)) for p in config.policies]
    for policy in config.policies:
        t0 = time.perf_counter()
        row = ScenarioResult(seed, fraction, policy, axis, axis_value)
        try:
            y, ok, final, iters, status = _run_policy(policy, scenario, power, comm, config.lp_method,
                                                      config.trace_path, tag)
            row.yield_, row.feasible, row.iterations, row.lp_status = y, ok, iters, status
            row.lcc_ratio = _lcc_ratio(final, len(power))
        except Exception as exc:  # noqa: BLE001 - recorded per row
            log.warning("policy %s failed (seed %s, fraction %s): %s", policy, seed, fraction, exc)
            row.error = str(exc)
        row.wall_ms = 1000 * (time.perf_counter() - t0)
        rows.append(row)
    return rows


def _work_items(config: ExperimentConfig):
    if config.axis is None:
        for fraction in config.removal_fractions:
            for seed in config.seeds:
                yield config.params, seed, fraction, "", ""
        return
    for value in config.values:
        if config.axis == "removal_fraction":
            for seed in config.seeds:
                yield config.params, seed, float(value), config.axis, value
            continue
        cast = int(value) if config.axis == "n_comm" else float(value)
        params = config.params.with_(**{config.axis: cast})
        for fraction in config.removal_fractions:
            for seed in config.seeds:
                yield params, seed, fraction, config.axis, value


def _run_item(args):
    config, params, seed, fraction, axis, value = args
    return run_point(config, params, seed, fraction, axis, value)


def iter_results(config: ExperimentConfig) -> Iterator[list[ScenarioResult]]:
    """Yield row groups in a fixed order, whatever ``config.jobs`` is."""
    items = [(config, *item) for item in _work_items(config)]
    if config.jobs <= 1 or config.trace_path:
        for item in items:
            yield _run_item(item)
        return
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        yield from pool.map(_run_item, items)


def run_scenario(config: ExperimentConfig, seed: int | None = None, fraction: float | None = None
                 ) -> list[ScenarioResult]:
    """One row per policy for a single (seed, removal fraction)."""
    seed = config.seeds[0] if seed is None else seed
    fraction = config.removal_fractions[0] if fraction is None else fraction
    return run_point(config, config.params, seed, fraction)


def run_sweep(config: ExperimentConfig, out_path=None, summary_path=None):
    """Run every work item; returns (rows, summary rows).

    Rows are appended and flushed to ``out_path`` as they complete, so an
    interrupted batch keeps what it already computed.
    """
    rows: list[ScenarioResult] = []
    writer = fh = None
    if out_path is not None:
        fh = open(out_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        fh.flush()
    try:
        for group in iter_results(config):
            rows.extend(group)
            if writer is not None:
                writer.writerows(r.csv_row() for r in group)
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    summary = aggregate(rows, config.count_infeasible)
    if summary_path is not None:
        write_summary(summary, summary_path)
    return rows, summary


def aggregate(rows: Iterable[ScenarioResult], count_infeasible: bool = False) -> list[dict]:
    """Mean yield per (axis value, removal fraction, policy).

    By default only feasible rows enter the mean; with ``count_infeasible``
    infeasible rows count as yield 0. Groups without usable rows report
    ``mean_yield = None`` (no data).
    """
    groups: dict[tuple, list[ScenarioResult]] = {}
    for r in rows:
        groups.setdefault((r.axis, str(r.axis_value), r.removal_fraction, r.policy), []).append(r)
    out = []
    for (axis, value, fraction, policy), members in groups.items():
        ok = [r for r in members if r.feasible and not math.isnan(r.yield_)]
        if count_infeasible:
            yields = [r.yield_ if (r.feasible and not math.isnan(r.yield_)) else 0.0 for r in members]
        else:
            yields = [r.yield_ for r in ok]
        lccs = [r.lcc_ratio for r in members if not math.isnan(r.lcc_ratio)]
        out.append({
            "axis": axis, "axis_value": members[0].axis_value, "removal_fraction": fraction, "policy": policy,
            "n_rows": len(members), "n_feasible": len(ok),
            "mean_yield": float(np.mean(yields)) if yields else None,
            "mean_lcc_ratio": float(np.mean(lccs)) if lccs else None,
        })
    return out


def write_summary(summary: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for s in summary:
            w.writerow([s["axis"], _fmt(s["axis_value"]), _fmt(s["removal_fraction"]), s["policy"],
                        s["n_rows"], s["n_feasible"],
                        "" if s["mean_yield"] is None else repr(s["mean_yield"]),
                        "" if s["mean_lcc_ratio"] is None else repr(s["mean_lcc_ratio"])])


def write_rows(rows: Iterable[ScenarioResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        w.writerows(r.csv_row() for r in rows)


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
