"""Graph data model for the power grid and the communication network.

Both networks keep their full node/edge universe for the lifetime of a
scenario. Failures flip alive flags; nothing is renumbered or deleted, so
yields can always be measured against the original grid.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc


class BusRole(IntEnum):
    GENERATOR = 0
    LOAD = 1
    SUBSTATION = 2


class CommRole(IntEnum):
    ROUTER = 0
    CONTROL_CENTER = 1


class PowerBus(NamedTuple):
    id: int
    role: BusRole
    injection: float
    alive: bool = True


class PowerLine(NamedTuple):
    id: int
    from_bus: int
    to_bus: int
    reactance: float = 1.0
    capacity: float = float("nan")
    alive: bool = True


class CommNode(NamedTuple):
    id: int
    role: CommRole
    alive: bool = True


@dataclass
class Graph:
    """Undirected view over ``n`` nodes with alive masks.

    ``src``/``dst`` list the edges; an edge is usable when its own flag and
    both endpoint flags are set.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    node_alive: np.ndarray | None = None
    edge_alive: np.ndarray | None = None

    def __post_init__(self):
        self.src = np.asarray(self.src, dtype=np.int64).reshape(-1)
        self.dst = np.asarray(self.dst, dtype=np.int64).reshape(-1)
        if self.node_alive is None:
            self.node_alive = np.ones(self.n, dtype=bool)
        if self.edge_alive is None:
            self.edge_alive = np.ones(len(self.src), dtype=bool)
        self.node_alive = np.asarray(self.node_alive, dtype=bool)
        self.edge_alive = np.asarray(self.edge_alive, dtype=bool)

    def usable_edges(self, alive_only: bool = True) -> np.ndarray:
        if not alive_only:
            return np.ones(len(self.src), dtype=bool)
        if len(self.src) == 0:
            return np.zeros(0, dtype=bool)
        return self.edge_alive & self.node_alive[self.src] & self.node_alive[self.dst]

    def adjacency(self, alive_only: bool = True):
        """Symmetric CSR adjacency over usable edges."""
        mask = self.usable_edges(alive_only)
        s, d = self.src[mask], self.dst[mask]
        data = np.ones(2 * len(s), dtype=np.int8)
        return coo_matrix(
            (data, (np.r_[s, d], np.r_[d, s])), shape=(self.n, self.n)
        ).tocsr()


def connected_components(graph: Graph, alive_only: bool = True) -> np.ndarray:
    """Label every node with the smallest node id of its component.

    With ``alive_only`` dead nodes get label -1 and dead edges are ignored.
    """
    if graph.n == 0:
        return np.zeros(0, dtype=np.int64)
    _, raw = _cc(graph.adjacency(alive_only), directed=False)
    first = np.full(raw.max() + 1, graph.n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(graph.n))
    labels = first[raw]
    if alive_only:
        labels[~graph.node_alive] = -1
    return labels


def components(graph: Graph, alive_only: bool = True) -> list[np.ndarray]:
    """Components as sorted id arrays, ordered by their smallest member."""
    labels = connected_components(graph, alive_only)
    keep = labels >= 0
    ids = np.arange(graph.n)[keep]
    labels = labels[keep]
    order = np.lexsort((ids, labels))
    ids, labels = ids[order], labels[order]
    cuts = np.flatnonzero(np.diff(labels)) + 1
    return [block for block in np.split(ids, cuts) if len(block)]


def reachable_from(graph: Graph, sources: Iterable[int]) -> set[int]:
    """Alive nodes joined to some source by a path of usable edges."""
    sources = [int(s) for s in sources]
    if not sources:
        return set()
    dead = [s for s in sources if not graph.node_alive[s]]
    if dead:
        raise ValueError(f"sources must be alive, got dead nodes {dead}")
    labels = connected_components(graph, alive_only=True)
    hit = np.isin(labels, labels[sources])
    return set(np.flatnonzero(hit).tolist())


def largest_component_size(graph: Graph) -> int:
    labels = connected_components(graph, alive_only=True)
    labels = labels[labels >= 0]
    if len(labels) == 0:
        return 0
    return int(np.bincount(labels).max())


def _check_simple_edges(n: int, src: np.ndarray, dst: np.ndarray, what: str):
    if len(src) == 0:
        return
    if src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n:
        raise ValueError(f"{what} endpoint out of range")
    if np.any(src == dst):
        raise ValueError(f"{what} self-loop")
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    keys = lo * n + hi
    if len(np.unique(keys)) != len(keys):
        raise ValueError(f"parallel {what}s are not supported")


@dataclass
class PowerGrid:
    """Transmission grid stored column-wise.

    ``injection`` holds the current injections (generators > 0, loads < 0).
    ``capacity`` is NaN until :func:`intercascade.cascade.assign_capacities`
    fills it.
    """

    roles: np.ndarray
    injection: np.ndarray
    line_from: np.ndarray
    line_to: np.ndarray
    reactance: np.ndarray | None = None
    capacity: np.ndarray | None = None
    bus_alive: np.ndarray | None = None
    line_alive: np.ndarray | None = None

    def __post_init__(self):
        self.roles = np.asarray(self.roles, dtype=np.int8).reshape(-1)
        self.injection = np.asarray(self.injection, dtype=float).reshape(-1).copy()
        self.line_from = np.asarray(self.line_from, dtype=np.int64).reshape(-1)
        self.line_to = np.asarray(self.line_to, dtype=np.int64).reshape(-1)
        n, m = len(self.roles), len(self.line_from)
        if len(self.injection) != n:
            raise ValueError("roles and injection lengths differ")
        if len(self.line_to) != m:
            raise ValueError("line_from and line_to lengths differ")
        if self.reactance is None:
            self.reactance = np.ones(m)
        if self.capacity is None:
            self.capacity = np.full(m, np.nan)
        if self.bus_alive is None:
            self.bus_alive = np.ones(n, dtype=bool)
        if self.line_alive is None:
            self.line_alive = np.ones(m, dtype=bool)
        self.reactance = np.asarray(self.reactance, dtype=float).reshape(-1)
        self.capacity = np.asarray(self.capacity, dtype=float).reshape(-1)
        self.bus_alive = np.asarray(self.bus_alive, dtype=bool).reshape(-1)
        self.line_alive = np.asarray(self.line_alive, dtype=bool).reshape(-1)
        self.validate()

    def validate(self):
        roles, inj = self.roles, self.injection
        if np.any((roles < 0) | (roles > 2)):
            raise ValueError("unknown bus role")
        if np.any(inj[roles == BusRole.SUBSTATION] != 0):
            raise ValueError("substations must have zero injection")
        if np.any(inj[roles == BusRole.GENERATOR] < 0):
            raise ValueError("generator injections must be >= 0")
        if np.any(inj[roles == BusRole.LOAD] > 0):
            raise ValueError("load injections must be <= 0")
        if np.any(~(self.reactance > 0)):
            raise ValueError("line reactances must be positive")
        _check_simple_edges(self.n_buses, self.line_from, self.line_to, "line")

    @classmethod
    def from_elements(cls, buses: Iterable[PowerBus], lines: Iterable[PowerLine]) -> PowerGrid:
        buses = sorted(buses, key=lambda b: b.id)
        lines = sorted(lines, key=lambda ln: ln.id)
        if [b.id for b in buses] != list(range(len(buses))):
            raise ValueError("bus ids must be dense 0..n-1")
        if [ln.id for ln in lines] != list(range(len(lines))):
            raise ValueError("line ids must be dense 0..m-1")
        return cls(
            roles=[int(b.role) for b in buses],
            injection=[b.injection for b in buses],
            bus_alive=[b.alive for b in buses],
            line_from=[ln.from_bus for ln in lines],
            line_to=[ln.to_bus for ln in lines],
            reactance=[ln.reactance for ln in lines],
            capacity=[ln.capacity for ln in lines],
            line_alive=[ln.alive for ln in lines],
        )

    @property
    def n_buses(self) -> int:
        return len(self.roles)

    @property
    def n_lines(self) -> int:
        return len(self.line_from)

    def bus(self, i: int) -> PowerBus:
        return PowerBus(i, BusRole(int(self.roles[i])), float(self.injection[i]), bool(self.bus_alive[i]))

    def line(self, k: int) -> PowerLine:
        return PowerLine(
            k, int(self.line_from[k]), int(self.line_to[k]),
            float(self.reactance[k]), float(self.capacity[k]), bool(self.line_alive[k]),
        )

    def usable_lines(self) -> np.ndarray:
        """Lines that are alive and have both endpoints alive."""
        if self.n_lines == 0:
            return np.zeros(0, dtype=bool)
        return self.line_alive & self.bus_alive[self.line_from] & self.bus_alive[self.line_to]

    def graph(self) -> Graph:
        return Graph(self.n_buses, self.line_from, self.line_to, self.bus_alive, self.line_alive)

    def islands(self) -> list[np.ndarray]:
        return components(self.graph(), alive_only=True)

    def mask(self, role: BusRole) -> np.ndarray:
        return self.roles == role

    def fail_buses(self, ids: Iterable[int]):
        ids = np.fromiter((int(i) for i in ids), dtype=np.int64)
        self.bus_alive[ids] = False
        self.injection[ids] = 0.0

    def fail_lines(self, ids: Iterable[int]):
        ids = np.fromiter((int(i) for i in ids), dtype=np.int64)
        self.line_alive[ids] = False

    def served_load(self) -> np.ndarray:
        """Per-bus served load magnitude (zero for dead or non-load buses)."""
        served = np.where(self.roles == BusRole.LOAD, -self.injection, 0.0)
        served[~self.bus_alive] = 0.0
        return np.maximum(served, 0.0)

    def copy(self) -> PowerGrid:
        return copy.deepcopy(self)


@dataclass
class CommNetwork:
    roles: np.ndarray
    link_from: np.ndarray
    link_to: np.ndarray
    alive: np.ndarray | None = None

    def __post_init__(self):
        self.roles = np.asarray(self.roles, dtype=np.int8).reshape(-1)
        self.link_from = np.asarray(self.link_from, dtype=np.int64).reshape(-1)
        self.link_to = np.asarray(self.link_to, dtype=np.int64).reshape(-1)
        if self.alive is None:
            self.alive = np.ones(len(self.roles), dtype=bool)
        self.alive = np.asarray(self.alive, dtype=bool).reshape(-1)
        if np.any((self.roles < 0) | (self.roles > 1)):
            raise ValueError("unknown comm role")
        _check_simple_edges(self.n_nodes, self.link_from, self.link_to, "link")

    @classmethod
    def from_elements(cls, nodes: Iterable[CommNode], links: Iterable[tuple[int, int]]) -> CommNetwork:
        nodes = sorted(nodes, key=lambda c: c.id)
        if [c.id for c in nodes] != list(range(len(nodes))):
            raise ValueError("comm node ids must be dense 0..n-1")
        links = list(links)
        return cls(
            roles=[int(c.role) for c in nodes],
            link_from=[a for a, _ in links],
            link_to=[b for _, b in links],
            alive=[c.alive for c in nodes],
        )

    @property
    def n_nodes(self) -> int:
        return len(self.roles)

    @property
    def control_centers(self) -> np.ndarray:
        return np.flatnonzero(self.roles == CommRole.CONTROL_CENTER)

    def graph(self) -> Graph:
        return Graph(self.n_nodes, self.link_from, self.link_to, self.alive)

    def fail(self, ids: Iterable[int]):
        ids = np.fromiter((int(i) for i in ids), dtype=np.int64)
        self.alive[ids] = False

    def copy(self) -> CommNetwork:
        return copy.deepcopy(self)
