"""Overload cascades in the grid and the uncontrolled interdependent cascade."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .interdependency import (
    InterdependentNetwork,
    allocate_comm_power,
    disconnected_comm_nodes,
    unsupported_power_nodes,
)
from .network_model import BusRole, PowerGrid
from .power_flow import BalanceReport, FlowSolution, FlowSolverError, balance_grid, solve_grid_flow

TRIP_SLACK = 1e-9


@dataclass(frozen=True)
class CapacityRule:
    factor_of_safety: float = 1.2
    # zero-flow lines get floor_fraction * (largest base flow)
    floor_fraction: float = 1e-6

    def __post_init__(self):
        if not self.factor_of_safety > 1:
            raise ValueError("factor_of_safety must be > 1")


@dataclass
class CascadeRound:
    balance: list[BalanceReport]
    flows: FlowSolution
    tripped_lines: list[int]
    failed_power: list[int] = field(default_factory=list)
    failed_comm: list[int] = field(default_factory=list)
    served_load: float = 0.0
    power_rounds: int = 1


@dataclass
class CascadeTrace:
    rounds: list[CascadeRound]
    terminated: bool
    grid: PowerGrid
    comm_alive: np.ndarray | None = None

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def tripped_lines(self) -> set[int]:
        return {k for r in self.rounds for k in r.tripped_lines}

    def failed_power(self) -> set[int]:
        return {k for r in self.rounds for k in r.failed_power}

    def failed_comm(self) -> set[int]:
        return {k for r in self.rounds for k in r.failed_comm}

    def json_lines(self, **extra) -> list[str]:
        """One JSON object per round, for logs and regression fixtures."""
        lines = []
        for k, r in enumerate(self.rounds):
            usable = np.flatnonzero(r.flows.flows != 0)
            rec = dict(extra)
            rec.update(
                round=k,
                tripped_lines=sorted(int(i) for i in r.tripped_lines),
                failed_power=sorted(int(i) for i in r.failed_power),
                failed_comm=sorted(int(i) for i in r.failed_comm),
                served_load=float(r.served_load),
                power_rounds=r.power_rounds,
                balance=[{"island": b.island, "side": b.side, "factor": b.factor} for b in r.balance],
                flows={str(int(i)): float(r.flows.flows[i]) for i in usable},
                residual=float(r.flows.residual),
                terminated=self.terminated and k == len(self.rounds) - 1,
            )
            lines.append(json.dumps(rec, sort_keys=True))
        return lines

    def write_jsonl(self, path, mode: str = "w", **extra):
        with open(path, mode) as fh:
            for line in self.json_lines(**extra):
                fh.write(line + "\n")


def assign_capacities(grid: PowerGrid, rule: CapacityRule = CapacityRule()) -> PowerGrid:
    """Balance every island, solve the base case and set line capacities.

    The returned grid carries the balanced base-case injections; that state
    is the operating point all later cascades start from.
    """
    out = grid.copy()
    out.injection, _ = balance_grid(out)
    try:
        sol = solve_grid_flow(out)
    except FlowSolverError as exc:
        raise ValueError(f"base case is not solvable: {exc}") from exc
    mag = np.abs(sol.flows)
    floor = rule.floor_fraction * (mag.max() if len(mag) else 0.0)
    out.capacity = np.maximum(rule.factor_of_safety * mag, floor)
    return out


def overloaded_lines(grid: PowerGrid, flows: np.ndarray) -> np.ndarray:
    usable = grid.usable_lines()
    return np.flatnonzero(usable & (np.abs(flows) > grid.capacity * (1 + TRIP_SLACK)))


def _power_cascade(grid: PowerGrid, max_rounds: int | None = None):
    """Mutates ``grid``; returns the list of rounds and a termination flag."""
    if np.any(np.isnan(grid.capacity[grid.usable_lines()])):
        raise ValueError("line capacities are not assigned")
    limit = grid.n_lines + 1 if max_rounds is None else max_rounds
    rounds = []
    for k in range(limit):
        grid.injection, reports = balance_grid(grid)
        try:
            sol = solve_grid_flow(grid)
        except FlowSolverError as exc:
            raise FlowSolverError(f"round {k}: {exc}", exc.island) from exc
        tripped = overloaded_lines(grid, sol.flows)
        grid.fail_lines(tripped)
        rounds.append(CascadeRound(reports, sol, tripped.tolist(), served_load=float(grid.served_load().sum())))
        if len(tripped) == 0:
            return rounds, True
    return rounds, False


def run_power_cascade(grid: PowerGrid, max_rounds: int | None = None) -> CascadeTrace:
    """Balance, solve, trip overloaded lines; repeat until nothing trips.

    The input grid is not modified; the final state is ``trace.grid``.
    """
    work = grid.copy()
    rounds, done = _power_cascade(work, max_rounds)
    return CascadeTrace(rounds, done, work)


def run_interdependent_cascade(inet: InterdependentNetwork, max_rounds: int | None = None) -> CascadeTrace:
    """Uncontrolled cascade across both networks.

    Each macro-round runs, in order: the grid overload cascade to quiescence,
    the comm power check, the comm connectivity check, and the control check
    on power nodes. Stops at the first macro-round with no new failure.
    """
    work = inet.copy()
    grid, comm, coupling = work.grid, work.comm, work.coupling
    limit = grid.n_buses + comm.n_nodes + 1 if max_rounds is None else max_rounds
    rounds = []
    for _ in range(limit):
        inner, _ = _power_cascade(grid)
        tripped = [k for r in inner for k in r.tripped_lines]

        alloc = allocate_comm_power(grid.served_load(), coupling, comm.alive, grid.bus_alive)
        unpowered = np.flatnonzero(comm.alive & ~alloc.powered)
        comm.fail(unpowered)
        cut_off = sorted(disconnected_comm_nodes(comm))
        comm.fail(cut_off)
        uncontrolled = sorted(unsupported_power_nodes(grid.bus_alive, comm.alive, coupling))
        grid.fail_buses(uncontrolled)

        failed_comm = sorted(set(unpowered.tolist()) | set(cut_off))
        rounds.append(CascadeRound(
            inner[-1].balance, inner[-1].flows, tripped, uncontrolled, failed_comm,
            served_load=float(grid.served_load().sum()), power_rounds=len(inner),
        ))
        if not tripped and not failed_comm and not uncontrolled:
            return CascadeTrace(rounds, True, grid, comm.alive.copy())
    return CascadeTrace(rounds, False, grid, comm.alive.copy())


def yield_of(final: PowerGrid, baseline: PowerGrid) -> float:
    """Served fraction of the baseline load.

    The final state is re-balanced per island first, so loads that are dead
    or sit in an island without generation count as zero.
    """
    base = float(-baseline.injection[(baseline.roles == BusRole.LOAD) & baseline.bus_alive].sum())
    if base <= 0:
        raise ValueError("baseline grid has no load")
    inj, _ = balance_grid(final)
    served = -inj[(final.roles == BusRole.LOAD) & final.bus_alive]
    return float(np.clip(served.sum() / base, 0.0, 1.0))
