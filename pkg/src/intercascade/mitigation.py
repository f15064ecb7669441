"""Load-shedding control policies.

Both policies solve a shedding LP over DC-flow constraints: injections may
only move toward zero (generators ramp down, loads are shed), every alive
line stays within its capacity in either direction, and each island has one
phase pinned to zero. The load-control policy adds the distribution-side
flow that keeps every surviving comm node powered.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cascade import yield_of
from .interdependency import (
    InterdependentNetwork,
    allocate_comm_power,
    connectivity_cascade,
    disconnected_comm_nodes,
    unsupported_power_nodes,
)
from .lp import LinearProgram, LpSolverError, LpStatus, solve
from .network_model import BusRole, PowerGrid

DEFAULT_LP_METHOD = "highs"


@dataclass
class InjectionPlan:
    injection: np.ndarray  # P_new per bus, zero on dead buses
    shed: np.ndarray  # |P_new - P_old| per bus
    objective: float
    flows: np.ndarray
    h: np.ndarray | None = None  # per supply edge, load-control LP only


@dataclass
class PolicyOutcome:
    grid: PowerGrid
    comm_alive: np.ndarray
    yield_: float
    feasible: bool  # False only when nothing survives the pruning phase
    iterations: int = 1
    phases: dict = field(default_factory=dict)
    lp_status: LpStatus | None = None

    @property
    def optimal(self) -> bool:
        return self.lp_status is LpStatus.OPTIMAL

    @property
    def injection(self) -> np.ndarray:
        return self.grid.injection


def build_shedding_lp(grid: PowerGrid, inet: InterdependentNetwork | None = None, comm_alive=None):
    """Assemble the shedding LP for the alive part of ``grid``.

    With ``inet`` the comm-power rows are added: a flow ``h >= 0`` on every
    usable supply edge, each load bus sending at most what it serves and each
    alive comm node receiving at least ``p_req``. Returns the LP and the
    variable index arrays ``(p, theta, f, h, edges)``.
    """
    n, m = grid.n_buses, grid.n_lines
    alive = grid.bus_alive
    usable = grid.usable_lines()
    p_old = np.where(alive, grid.injection, 0.0)
    gen = alive & (grid.roles == BusRole.GENERATOR)
    load = alive & (grid.roles == BusRole.LOAD)

    lp = LinearProgram("shedding")
    lo = np.where(load, p_old, 0.0)
    hi = np.where(gen, p_old, 0.0)
    # objective sum_gen (P_old - P) + sum_load (P - P_old): exact |dP| under the bounds
    cost = np.where(gen, -1.0, 0.0) + np.where(load, 1.0, 0.0)
    p = lp.add_variables(n, lo, hi, cost, prefix="p")
    lp.objective_constant = float(p_old[gen].sum() - p_old[load].sum())

    pinned = ~alive
    pinned[[int(isl[0]) for isl in grid.islands()]] = True
    theta = lp.add_variables(n, np.where(pinned, 0.0, -np.inf), np.where(pinned, 0.0, np.inf), 0.0,
                             prefix="theta")
    cap = np.where(usable, grid.capacity, 0.0)
    f = lp.add_variables(m, -cap, cap, 0.0, prefix="f")

    # node balance: out-flows minus in-flows equals injection
    terms = [[] for _ in range(n)]
    for k in np.flatnonzero(usable):
        terms[grid.line_from[k]].append((f[k], 1.0))
        terms[grid.line_to[k]].append((f[k], -1.0))
    for i in np.flatnonzero(alive):
        idx = [v for v, _ in terms[i]] + [p[i]]
        val = [c for _, c in terms[i]] + [-1.0]
        lp.add_constraint((idx, val), "==", 0.0)
    # Ohm: theta_from - theta_to = x f
    for k in np.flatnonzero(usable):
        lp.add_constraint(
            ([theta[grid.line_from[k]], theta[grid.line_to[k]], f[k]], [1.0, -1.0, -grid.reactance[k]]),
            "==", 0.0,
        )

    h = np.zeros(0, dtype=np.int64)
    edges = np.zeros(0, dtype=np.int64)
    if inet is not None:
        coupling = inet.coupling
        comm_alive = inet.comm.alive if comm_alive is None else np.asarray(comm_alive, dtype=bool)
        sup = coupling.supply_edges
        if len(sup):
            edges = np.flatnonzero(load[sup[:, 0]] & comm_alive[sup[:, 1]])
        h = lp.add_variables(len(edges), 0.0, np.inf, 0.0, prefix="h")
        by_bus: dict[int, list[int]] = {}
        by_comm: dict[int, list[int]] = {}
        for var, e in zip(h, edges):
            by_bus.setdefault(int(sup[e, 0]), []).append(int(var))
            by_comm.setdefault(int(sup[e, 1]), []).append(int(var))
        for i, vars_ in sorted(by_bus.items()):
            # sum_j h(i->j) <= -P_i
            lp.add_constraint((vars_ + [p[i]], [1.0] * len(vars_) + [1.0]), "<=", 0.0)
        for j in np.flatnonzero(comm_alive):
            vars_ = by_comm.get(int(j), [])
            lp.add_constraint((vars_, [1.0] * len(vars_)), ">=", coupling.p_req)
    return lp, (p, theta, f, h, edges)


def _plan_from(lp, sol, idx, grid: PowerGrid) -> InjectionPlan:
    p, _, f, h, _ = idx
    p_new = sol.x[p].copy()
    p_new[~grid.bus_alive] = 0.0
    p_old = np.where(grid.bus_alive, grid.injection, 0.0)
    return InjectionPlan(
        injection=p_new,
        shed=np.abs(p_new - p_old),
        objective=float(sol.objective),
        flows=sol.x[f].copy(),
        h=sol.x[h].copy() if len(h) else None,
    )


def _solve_plan(grid, inet=None, comm_alive=None, method=DEFAULT_LP_METHOD):
    lp, idx = build_shedding_lp(grid, inet, comm_alive)
    sol = solve(lp, method)
    if sol.status is LpStatus.INFEASIBLE:
        return None
    if sol.status is not LpStatus.OPTIMAL:
        raise LpSolverError(f"shedding LP ended with status {sol.status.value}")
    return _plan_from(lp, sol, idx, grid)


def simple_mitigation_lp(grid: PowerGrid, method: str = DEFAULT_LP_METHOD) -> InjectionPlan:
    """Minimum-shed injections that keep every alive line within capacity.

    All-zero injections are always feasible, so an infeasible LP here means
    the grid was built wrong and raises.
    """
    plan = _solve_plan(grid, method=method)
    if plan is None:
        raise LpSolverError("simple shedding LP reported infeasible")
    return plan


def apply_plan(grid: PowerGrid, plan: InjectionPlan):
    """Write ``plan`` into ``grid.injection`` in place."""
    inj = plan.injection.copy()
    gen = grid.roles == BusRole.GENERATOR
    load = grid.roles == BusRole.LOAD
    # clip solver round-off back into the ramp-down box
    inj[gen] = np.clip(inj[gen], 0.0, np.maximum(grid.injection[gen], 0.0))
    inj[load] = np.clip(inj[load], np.minimum(grid.injection[load], 0.0), 0.0)
    inj[grid.roles == BusRole.SUBSTATION] = 0.0
    inj[~grid.bus_alive] = 0.0
    grid.injection = inj


def iterative_simple_policy(inet: InterdependentNetwork, power_removals=(), comm_removals=(),
                            method: str = DEFAULT_LP_METHOD) -> PolicyOutcome:
    """Shed with the simple LP, let dependency failures happen, repeat.

    Each iteration: shedding LP on the current grid, then comm nodes without
    power or without a control-center path fail, then power nodes left
    without control fail. Ends when an iteration causes no new failure.
    """
    baseline = inet.grid
    work = inet.copy()
    work.apply_removals(power_removals, comm_removals)
    grid, comm, coupling = work.grid, work.comm, work.coupling
    history = []
    iterations = 0
    for iterations in range(1, grid.n_buses + comm.n_nodes + 2):
        plan = simple_mitigation_lp(grid, method)
        apply_plan(grid, plan)
        alloc = allocate_comm_power(grid.served_load(), coupling, comm.alive, grid.bus_alive)
        unpowered = np.flatnonzero(comm.alive & ~alloc.powered)
        comm.fail(unpowered)
        cut_off = sorted(disconnected_comm_nodes(comm))
        comm.fail(cut_off)
        uncontrolled = sorted(unsupported_power_nodes(grid.bus_alive, comm.alive, coupling))
        grid.fail_buses(uncontrolled)
        history.append({"objective": plan.objective, "failed_comm": len(unpowered) + len(cut_off),
                        "failed_power": len(uncontrolled)})
        if len(unpowered) == 0 and not cut_off and not uncontrolled:
            break
    return PolicyOutcome(grid, comm.alive.copy(), yield_of(grid, baseline), True, iterations,
                         {"iterations": history}, LpStatus.OPTIMAL)


def load_control_policy(inet: InterdependentNetwork, power_removals=(), comm_removals=(),
                        method: str = DEFAULT_LP_METHOD) -> PolicyOutcome:
    """Two-phase control: prune unavoidable failures, then one shedding LP
    that also keeps every surviving comm node powered.

    A network whose first phase wipes out the grid is not feasible. An
    infeasible LP in the second phase means the policy cannot hold the
    network: the yield is 0, ``lp_status`` is INFEASIBLE, and the network
    still counts as feasible so averages over feasible networks include it.
    """
    baseline = inet.grid
    work = inet.copy()
    work.apply_removals(power_removals, comm_removals)
    lost_p, lost_c = connectivity_cascade(work)
    work.apply_removals(sorted(lost_p), sorted(lost_c))
    grid, comm = work.grid, work.comm
    phases = {"phase1_power": sorted(lost_p), "phase1_comm": sorted(lost_c)}

    if not grid.bus_alive.any():
        grid.injection[:] = 0.0
        return PolicyOutcome(grid, comm.alive.copy(), 0.0, False, 1, phases)

    plan = _solve_plan(grid, work, comm.alive, method)
    if plan is None:
        phases["phase2"] = "infeasible"
        collapsed = grid.copy()
        collapsed.fail_buses(np.flatnonzero(collapsed.bus_alive))
        return PolicyOutcome(collapsed, np.zeros_like(comm.alive), 0.0, True, 1, phases, LpStatus.INFEASIBLE)
    apply_plan(grid, plan)
    phases["phase2"] = "optimal"
    phases["objective"] = plan.objective
    return PolicyOutcome(grid, comm.alive.copy(), yield_of(grid, baseline), True, 1, phases, LpStatus.OPTIMAL)


def isolated_grid_state(grid: PowerGrid, power_removals=(), method: str = DEFAULT_LP_METHOD) -> PowerGrid:
    """Grid after removals and one simple shedding LP, comm network ignored."""
    work = grid.copy()
    work.fail_buses(power_removals)
    apply_plan(work, simple_mitigation_lp(work, method))
    return work


def isolated_grid_upper_bound(grid: PowerGrid, power_removals=(), method: str = DEFAULT_LP_METHOD) -> float:
    """Yield of the simple LP on the grid alone, ignoring the comm network."""
    return yield_of(isolated_grid_state(grid, power_removals, method), grid)
