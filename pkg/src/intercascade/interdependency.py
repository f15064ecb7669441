"""Coupling between the grid and the communication network.

Power flows from transmission-level load buses to communication nodes over
``supply`` edges; control flows from communication nodes to power buses over
``control`` edges.
"""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass

import numpy as np

from .network_model import BusRole, CommNetwork, CommRole, Graph, PowerGrid, connected_components


@dataclass
class Coupling:
    supply_edges: np.ndarray  # rows (load_bus, comm_node)
    control_edges: np.ndarray  # rows (comm_node, power_bus)
    p_req: float

    def __post_init__(self):
        self.supply_edges = np.asarray(self.supply_edges, dtype=np.int64).reshape(-1, 2)
        self.control_edges = np.asarray(self.control_edges, dtype=np.int64).reshape(-1, 2)
        self.p_req = float(self.p_req)
        if self.p_req < 0:
            raise ValueError("p_req must be >= 0")


@dataclass
class InterdependentNetwork:
    grid: PowerGrid
    comm: CommNetwork
    coupling: Coupling

    def __post_init__(self):
        sup, ctl = self.coupling.supply_edges, self.coupling.control_edges
        nb, nc = self.grid.n_buses, self.comm.n_nodes
        if len(sup):
            if sup[:, 0].min() < 0 or sup[:, 0].max() >= nb or sup[:, 1].min() < 0 or sup[:, 1].max() >= nc:
                raise ValueError("supply edge endpoint out of range")
            if np.any(self.grid.roles[sup[:, 0]] != BusRole.LOAD):
                raise ValueError("supply edges must start at load buses")
        if len(ctl):
            if ctl[:, 0].min() < 0 or ctl[:, 0].max() >= nc or ctl[:, 1].min() < 0 or ctl[:, 1].max() >= nb:
                raise ValueError("control edge endpoint out of range")

    def copy(self) -> InterdependentNetwork:
        return copy.deepcopy(self)

    def apply_removals(self, power=(), comm=()):
        self.grid.fail_buses(power)
        self.comm.fail(comm)


@dataclass
class AllocationResult:
    delivered: np.ndarray  # per comm node
    h: np.ndarray  # per supply edge
    powered: np.ndarray  # bool mask per comm node

    @property
    def powered_ids(self) -> set[int]:
        return set(np.flatnonzero(self.powered).tolist())


def allocate_comm_power(served_loads, coupling: Coupling, alive_comm, alive_power=None) -> AllocationResult:
    """Power as many alive comm nodes as possible from the served loads.

    Each comm node needs ``p_req``; a load bus can split its served load over
    its supply edges. Nodes are admitted greedily by ascending id and a node
    is kept only if augmenting paths can route its full demand, so the result
    is a maximum-size feasible set and, among those, the lexicographically
    smallest one.
    """
    served = np.maximum(np.asarray(served_loads, dtype=float), 0.0)
    alive_comm = np.asarray(alive_comm, dtype=bool)
    n_bus, n_comm = len(served), len(alive_comm)
    sup = coupling.supply_edges
    p_req = coupling.p_req

    usable = np.ones(len(sup), dtype=bool)
    if len(sup):
        usable &= alive_comm[sup[:, 1]]
        if alive_power is not None:
            usable &= np.asarray(alive_power, dtype=bool)[sup[:, 0]]

    bus_edges: list[list[int]] = [[] for _ in range(n_bus)]
    comm_edges: list[list[int]] = [[] for _ in range(n_comm)]
    for e in np.flatnonzero(usable):
        bus_edges[sup[e, 0]].append(int(e))
        comm_edges[sup[e, 1]].append(int(e))

    h = np.zeros(len(sup))
    used = np.zeros(n_bus)
    delivered = np.zeros(n_comm)
    powered = np.zeros(n_comm, dtype=bool)
    scale = max(1.0, float(served.max(initial=0.0)), p_req)
    eps = 1e-13 * scale
    need_tol = 1e-9 * max(1.0, p_req)

    def augment(target: int, need: float) -> float:
        # BFS over the residual graph from every bus with spare budget
        prev_edge = {}
        queue = deque()
        seen_bus = np.zeros(n_bus, dtype=bool)
        seen_comm = np.zeros(n_comm, dtype=bool)
        for i in range(n_bus):
            if bus_edges[i] and served[i] - used[i] > eps:
                seen_bus[i] = True
                queue.append(i)
        while queue:
            i = queue.popleft()
            for e in bus_edges[i]:
                k = sup[e, 1]
                if seen_comm[k]:
                    continue
                seen_comm[k] = True
                prev_edge[("c", k)] = (e, +1)
                if k == target:
                    queue.clear()
                    break
                for e2 in comm_edges[k]:
                    i2 = sup[e2, 0]
                    if not seen_bus[i2] and h[e2] > eps:
                        seen_bus[i2] = True
                        prev_edge[("b", i2)] = (e2, -1)
                        queue.append(i2)
        if not seen_comm[target]:
            return 0.0
        path = []
        node = ("c", target)
        while node in prev_edge:
            e, direction = prev_edge[node]
            path.append((e, direction))
            node = ("b", int(sup[e, 0])) if direction > 0 else ("c", int(sup[e, 1]))
        start_bus = node[1]
        push = min(need, served[start_bus] - used[start_bus])
        for e, direction in path:
            if direction < 0:
                push = min(push, h[e])
        for e, direction in path:
            h[e] += direction * push
        used[start_bus] += push
        return push

    for j in range(n_comm):
        if not alive_comm[j] or not comm_edges[j]:
            continue
        if p_req == 0:
            powered[j] = True
            continue
        snapshot = (h.copy(), used.copy())
        need = p_req
        while need > need_tol:
            pushed = augment(j, need)
            if pushed <= eps:
                break
            need -= pushed
        if need <= need_tol:
            powered[j] = True
        else:
            h, used = snapshot
    if len(sup):
        np.add.at(delivered, sup[:, 1], h)
    return AllocationResult(delivered, h, powered)


def unsupported_power_nodes(alive_power, alive_comm, coupling: Coupling) -> set[int]:
    """Alive power nodes without any alive controlling comm node."""
    alive_power = np.asarray(alive_power, dtype=bool)
    alive_comm = np.asarray(alive_comm, dtype=bool)
    return set(np.flatnonzero(alive_power & ~_controlled(alive_power, alive_comm, coupling)).tolist())


def _controlled(alive_power, alive_comm, coupling: Coupling) -> np.ndarray:
    ok = np.zeros(len(alive_power), dtype=bool)
    ctl = coupling.control_edges
    if len(ctl):
        live = alive_comm[ctl[:, 0]]
        ok[ctl[live, 1]] = True
    return ok


def _supplied(alive_power, alive_comm, coupling: Coupling) -> np.ndarray:
    ok = np.zeros(len(alive_comm), dtype=bool)
    sup = coupling.supply_edges
    if len(sup):
        live = alive_power[sup[:, 0]]
        ok[sup[live, 1]] = True
    return ok


def disconnected_comm_nodes(comm: CommNetwork, alive=None) -> set[int]:
    """Alive comm nodes with no path to an alive control center."""
    alive = comm.alive if alive is None else np.asarray(alive, dtype=bool)
    g = Graph(comm.n_nodes, comm.link_from, comm.link_to, alive)
    return set(np.flatnonzero(alive & ~_reaches_role(g, comm.roles == CommRole.CONTROL_CENTER)).tolist())


def _reaches_role(g: Graph, role_mask: np.ndarray) -> np.ndarray:
    labels = connected_components(g, alive_only=True)
    good = np.unique(labels[role_mask & g.node_alive])
    return np.isin(labels, good) & g.node_alive


def connectivity_cascade(inet: InterdependentNetwork, power_removals=(), comm_removals=()):
    """Non-avoidable failures caused by disconnection alone.

    Repeats until nothing changes: a power node survives iff its island holds
    an alive generator (an isolated generator does not count) and some alive
    comm node controls it; a comm node survives iff it reaches an alive
    control center and some alive bus supplies it. Returns the sets of power
    and comm nodes removed beyond the initial removals.
    """
    grid, comm, coupling = inet.grid, inet.comm, inet.coupling
    pa = grid.bus_alive.copy()
    ca = comm.alive.copy()
    pa[list(power_removals)] = False
    ca[list(comm_removals)] = False
    start_p, start_c = pa.copy(), ca.copy()
    is_gen = grid.roles == BusRole.GENERATOR
    is_cc = comm.roles == CommRole.CONTROL_CENTER

    for _ in range(grid.n_buses + comm.n_nodes + 1):
        gp = Graph(grid.n_buses, grid.line_from, grid.line_to, pa, grid.line_alive)
        labels = connected_components(gp, alive_only=True)
        sizes = np.bincount(labels[labels >= 0], minlength=grid.n_buses) if grid.n_buses else np.zeros(0)
        gen_labels = np.unique(labels[is_gen & pa])
        gen_labels = gen_labels[sizes[gen_labels] >= 2]
        fed = np.isin(labels, gen_labels) & pa
        power_ok = fed & _controlled(pa, ca, coupling)

        gc = Graph(comm.n_nodes, comm.link_from, comm.link_to, ca)
        comm_ok = _reaches_role(gc, is_cc) & _supplied(pa, ca, coupling)

        drop_p = pa & ~power_ok
        drop_c = ca & ~comm_ok
        if not drop_p.any() and not drop_c.any():
            break
        pa &= ~drop_p
        ca &= ~drop_c

    removed_p = set(np.flatnonzero(start_p & ~pa).tolist())
    removed_c = set(np.flatnonzero(start_c & ~ca).tolist())
    return removed_p, removed_c
