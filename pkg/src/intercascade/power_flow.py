"""DC power flow and per-island supply/demand balancing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .network_model import BusRole, PowerGrid


class FlowSolverError(RuntimeError):
    """Raised when the reduced Laplacian of an island cannot be factored."""

    def __init__(self, message: str, island: int | None = None):
        super().__init__(message if island is None else f"island {island}: {message}")
        self.island = island


@dataclass
class BalanceReport:
    island: int
    side: str  # "loads", "generators" or "none"
    factor: float


@dataclass
class FlowSolution:
    flows: np.ndarray
    phases: np.ndarray
    residual: float


def balance_island(injection: np.ndarray, roles: np.ndarray, island: int = 0):
    """Scale one side of an island so that supply equals demand.

    If load exceeds generation every load is multiplied by g/l, otherwise
    every generator is multiplied by l/g. A side facing an empty other side
    goes to zero. Returns ``(new_injection, BalanceReport)``.
    """
    injection = np.asarray(injection, dtype=float)
    roles = np.asarray(roles)
    gen = roles == BusRole.GENERATOR
    load = roles == BusRole.LOAD
    g = injection[gen].sum()
    ell = -injection[load].sum()
    out = injection.copy()
    if ell > g:
        factor = g / ell
        out[load] = injection[load] * factor
        return out, BalanceReport(island, "loads", factor)
    if g > ell:
        factor = ell / g
        out[gen] = injection[gen] * factor
        return out, BalanceReport(island, "generators", factor)
    return out, BalanceReport(island, "none", 1.0)


def balance_grid(grid: PowerGrid, injection: np.ndarray | None = None):
    """Apply :func:`balance_island` to every alive island of ``grid``.

    Returns the new injection vector (dead buses zeroed) and one report per
    island, the island id being its smallest bus id.
    """
    p = grid.injection if injection is None else injection
    out = np.where(grid.bus_alive, p, 0.0)
    reports = []
    for island in grid.islands():
        out[island], rep = balance_island(out[island], grid.roles[island], int(island[0]))
        reports.append(rep)
    return out, reports


def solve_dc_flow(grid: PowerGrid, island: np.ndarray, injection: np.ndarray | None = None) -> FlowSolution:
    """Solve ``A f = P``, ``A^T theta = X f`` on one connected island.

    The smallest bus id of the island is the phase reference. Flows and
    phases of elements outside the island are left at zero.
    """
    p = grid.injection if injection is None else np.asarray(injection, dtype=float)
    island = np.sort(np.asarray(island, dtype=np.int64))
    flows = np.zeros(grid.n_lines)
    phases = np.zeros(grid.n_buses)
    if len(island) == 0:
        return FlowSolution(flows, phases, 0.0)

    local = np.full(grid.n_buses, -1, dtype=np.int64)
    local[island] = np.arange(len(island))
    usable = grid.usable_lines()
    lines = np.flatnonzero(usable & (local[grid.line_from] >= 0) & (local[grid.line_to] >= 0))
    a, b = local[grid.line_from[lines]], local[grid.line_to[lines]]
    y = 1.0 / grid.reactance[lines]

    n = len(island)
    lap = np.zeros((n, n))
    np.add.at(lap, (a, a), y)
    np.add.at(lap, (b, b), y)
    np.add.at(lap, (a, b), -y)
    np.add.at(lap, (b, a), -y)

    p_isl = p[island]
    theta = np.zeros(n)
    if n > 1:
        try:
            theta[1:] = scipy.linalg.solve(lap[1:, 1:], p_isl[1:], assume_a="sym")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise FlowSolverError(f"singular reduced Laplacian ({exc})", int(island[0])) from exc
        if not np.all(np.isfinite(theta)):
            raise FlowSolverError("non-finite phase angles", int(island[0]))

    f = (theta[a] - theta[b]) * y
    net = np.zeros(n)
    np.add.at(net, a, f)
    np.add.at(net, b, -f)
    flows[lines] = f
    phases[island] = theta
    return FlowSolution(flows, phases, float(np.max(np.abs(net - p_isl))))


def solve_grid_flow(grid: PowerGrid, injection: np.ndarray | None = None) -> FlowSolution:
    """Solve every island independently and merge the results.

    Islands are expected to be balanced already (see :func:`balance_grid`).
    """
    p = grid.injection if injection is None else np.asarray(injection, dtype=float)
    flows = np.zeros(grid.n_lines)
    phases = np.zeros(grid.n_buses)
    residual = 0.0
    for island in grid.islands():
        try:
            sol = solve_dc_flow(grid, island, p)
        except FlowSolverError as exc:
            if exc.island is None:
                raise FlowSolverError(str(exc), int(island[0])) from exc
            raise
        flows += sol.flows
        phases[island] = sol.phases[island]
        residual = max(residual, sol.residual)
    return FlowSolution(flows, phases, residual)
