"""Seeded random interdependent networks.

Both networks are Erdos-Renyi graphs. A fifth of the buses generate and a
fifth of the comm nodes are control centers by default; every other bus is a
load. Supply and control wiring prefers one-to-one pairs (a load feeds the
comm node that controls it) and then adds random extra edges until each
node reaches its target degree.

Generated scenarios are operational before any removal: only loads served in
the balanced base case feed comm nodes, and a comm component without a
control center is joined to one by a single extra link.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .cascade import CapacityRule, assign_capacities
from .interdependency import Coupling, InterdependentNetwork
from .network_model import BusRole, CommNetwork, CommRole, Graph, PowerGrid, components
from .power_flow import balance_grid


@dataclass(frozen=True)
class ScenarioParams:
    n_power: int = 100
    n_comm: int | None = None  # defaults to n_power
    expected_degree: float = 4.0
    comm_expected_degree: float | None = None  # defaults to expected_degree
    generator_fraction: float = 0.2
    control_center_fraction: float = 0.2
    substation_fraction: float = 0.0
    injection_range: tuple[float, float] = (1000.0, 2000.0)
    reactance: float = 1.0
    fos: float = 1.2
    load_factor: float = 1e-4
    comm_interdep_degree: float = 1.0
    power_interdep_degree: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("generator_fraction", "control_center_fraction"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if not 0 <= self.substation_fraction < 1:
            raise ValueError("substation_fraction must be in [0, 1)")
        if self.expected_degree <= 0 or self.comm_degree <= 0:
            raise ValueError("expected degrees must be positive")
        if self.comm_interdep_degree < 1 or self.power_interdep_degree < 1:
            raise ValueError("interdependence degrees must be >= 1")
        lo, hi = self.injection_range
        if lo > hi or lo < 0:
            raise ValueError("injection_range must satisfy 0 <= low <= high")
        if self.load_factor < 0:
            raise ValueError("load_factor must be >= 0")

    @property
    def comm_size(self) -> int:
        return self.n_power if self.n_comm is None else self.n_comm

    @property
    def comm_degree(self) -> float:
        return self.expected_degree if self.comm_expected_degree is None else self.comm_expected_degree

    def to_dict(self) -> dict:
        d = asdict(self)
        d["injection_range"] = list(self.injection_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioParams:
        d = dict(d)
        if "injection_range" in d:
            d["injection_range"] = tuple(d["injection_range"])
        return cls(**d)

    def with_(self, **changes) -> ScenarioParams:
        return replace(self, **changes)


@dataclass
class Scenario:
    inet: InterdependentNetwork
    params: ScenarioParams
    metadata: dict = field(default_factory=dict)

    @property
    def grid(self) -> PowerGrid:
        return self.inet.grid


def gen_erdos_renyi(n: int, expected_degree: float, rng: np.random.Generator) -> Graph:
    """G(n, p) with p = expected_degree / (n - 1)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > 0 and expected_degree >= n:
        raise ValueError(f"expected_degree {expected_degree} must be < n = {n}")
    if n < 2:
        return Graph(n, [], [])
    p = expected_degree / (n - 1)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph(n, iu[keep], ju[keep])


def gen_power_grid(params: ScenarioParams, rng: np.random.Generator) -> PowerGrid:
    n = params.n_power
    g = gen_erdos_renyi(n, params.expected_degree, rng)
    roles = np.full(n, BusRole.LOAD, dtype=np.int8)
    n_gen = math.floor(params.generator_fraction * n)
    gens = rng.choice(n, n_gen, replace=False)
    roles[gens] = BusRole.GENERATOR
    others = np.flatnonzero(roles != BusRole.GENERATOR)
    n_sub = math.floor(params.substation_fraction * n)
    if n_sub:
        roles[rng.choice(others, n_sub, replace=False)] = BusRole.SUBSTATION
    if not np.any(roles == BusRole.LOAD):
        raise ValueError("grid has no load buses (total load is zero)")

    lo, hi = params.injection_range
    mag = rng.uniform(lo, hi, n)
    inj = np.where(roles == BusRole.GENERATOR, mag, np.where(roles == BusRole.LOAD, -mag, 0.0))
    grid = PowerGrid(roles, inj, g.src, g.dst, reactance=np.full(len(g.src), params.reactance))
    grid.injection, _ = balance_grid(grid)
    return grid


def _exact_degrees(count: int, mean: float, cap: int, rng: np.random.Generator) -> np.ndarray:
    base = math.floor(mean)
    degs = np.full(count, base, dtype=np.int64)
    n_up = int(round((mean - base) * count))
    if n_up:
        degs[rng.choice(count, n_up, replace=False)] += 1
    return np.clip(degs, 1, max(cap, 1))


def _fill(primary: int, pool: np.ndarray, degree: int, rng: np.random.Generator) -> list[int]:
    picked = [primary]
    if degree > 1:
        rest = pool[pool != primary]
        picked += rng.choice(rest, min(degree - 1, len(rest)), replace=False).tolist()
    return picked


def _stitch_to_control(g: Graph, roles: np.ndarray, rng: np.random.Generator):
    """Link every control-center-free component to the largest component
    that has a control center."""
    comps = components(g, alive_only=False)
    has_cc = [bool(np.any(roles[c] == CommRole.CONTROL_CENTER)) for c in comps]
    if all(has_cc):
        return g.src, g.dst
    hub = max((c for c, ok in zip(comps, has_cc) if ok), key=len)
    src, dst = g.src.tolist(), g.dst.tolist()
    for comp, ok in zip(comps, has_cc):
        if not ok:
            a, b = int(rng.choice(comp)), int(rng.choice(hub))
            src.append(min(a, b))
            dst.append(max(a, b))
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


def gen_interdependent_network(params: ScenarioParams, rng: np.random.Generator) -> InterdependentNetwork:
    grid = gen_power_grid(params, rng)
    n_p, n_c = grid.n_buses, params.comm_size

    cg = gen_erdos_renyi(n_c, params.comm_degree, rng) if n_c else Graph(0, [], [])
    comm_roles = np.full(n_c, CommRole.ROUTER, dtype=np.int8)
    if n_c:
        n_cc = max(1, math.floor(params.control_center_fraction * n_c))
        comm_roles[rng.choice(n_c, n_cc, replace=False)] = CommRole.CONTROL_CENTER
    src, dst = _stitch_to_control(cg, comm_roles, rng)
    comm = CommNetwork(comm_roles, src, dst)

    # a load that is not served in the base case cannot feed anything
    loads = np.flatnonzero((grid.roles == BusRole.LOAD) & (grid.injection < 0))
    non_loads = np.setdiff1d(np.arange(n_p), loads)
    feeds = np.zeros(n_p, dtype=bool)
    feeds[loads] = True
    if n_c and len(loads) == 0:
        raise ValueError(f"{n_c} comm nodes need power but the grid has no served load bus")

    # one-to-one pairs first: loads, then the remaining buses
    comm_order = rng.permutation(n_c)
    power_order = np.r_[rng.permutation(loads), rng.permutation(non_loads)].astype(np.int64)
    n_pairs = min(n_p, n_c)
    paired_comm_of_bus = np.full(n_p, -1, dtype=np.int64)
    paired_bus_of_comm = np.full(n_c, -1, dtype=np.int64)
    paired_comm_of_bus[power_order[:n_pairs]] = comm_order[:n_pairs]
    paired_bus_of_comm[comm_order[:n_pairs]] = power_order[:n_pairs]

    supply = []
    sup_deg = _exact_degrees(n_c, params.comm_interdep_degree, len(loads), rng) if n_c else []
    for j in range(n_c):
        b = paired_bus_of_comm[j]
        primary = int(b) if b >= 0 and feeds[b] else int(rng.choice(loads))
        supply += [(i, j) for i in _fill(primary, loads, int(sup_deg[j]), rng)]

    control = []
    all_comm = np.arange(n_c)
    ctl_deg = _exact_degrees(n_p, params.power_interdep_degree, n_c, rng) if n_c else []
    for i in range(n_p if n_c else 0):
        c = paired_comm_of_bus[i]
        primary = int(c) if c >= 0 else int(rng.choice(n_c))
        control += [(j, i) for j in _fill(primary, all_comm, int(ctl_deg[i]), rng)]

    total_load = float(-grid.injection[grid.roles == BusRole.LOAD].sum())
    p_req = params.load_factor * total_load / n_c if n_c else 0.0
    return InterdependentNetwork(grid, comm, Coupling(supply, control, p_req))


def build_scenario(params: ScenarioParams) -> Scenario:
    """Generate the network for ``params.seed`` and assign line capacities."""
    rng = np.random.default_rng(params.seed)
    inet = gen_interdependent_network(params, rng)
    inet.grid = assign_capacities(inet.grid, CapacityRule(params.fos))
    meta = {"n_islands": len(inet.grid.islands()), "n_comm_islands": len(components(inet.comm.graph()))}
    return Scenario(inet, params, meta)


def removal_rng(seed: int, fraction: float) -> np.random.Generator:
    """Independent stream for the initial removals of one (seed, fraction)."""
    return np.random.default_rng([int(seed), 7919, int(round(fraction * 1_000_000))])


def draw_removals(inet: InterdependentNetwork, fraction: float, rng: np.random.Generator,
                  mode: str = "power") -> tuple[list[int], list[int]]:
    """Uniform initial removals over power nodes, or over both networks."""
    if not 0 <= fraction <= 1:
        raise ValueError("removal fraction must be in [0, 1]")
    n_p, n_c = inet.grid.n_buses, inet.comm.n_nodes
    power = sorted(rng.choice(n_p, int(round(fraction * n_p)), replace=False).tolist())
    comm: list[int] = []
    if mode == "joint":
        comm = sorted(rng.choice(n_c, int(round(fraction * n_c)), replace=False).tolist())
    elif mode != "power":
        raise ValueError(f"unknown removal mode {mode!r}")
    return power, comm
