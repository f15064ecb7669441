"""Scenario JSON documents.

Layout (``schema_version`` 1)::

    {"schema_version": 1,
     "buses": [{"id", "role", "injection"}],
     "lines": [{"id", "from", "to", "reactance", "capacity"?}],
     "comm_nodes": [{"id", "role"}],
     "comm_links": [{"from", "to"}],
     "supply_edges": [{"load_bus", "comm_node"}],
     "control_edges": [{"comm_node", "power_bus"}],
     "p_req", "fos", "seed", "params"}
"""

from __future__ import annotations

import json
import math

import numpy as np

from .interdependency import Coupling, InterdependentNetwork
from .network_model import BusRole, CommNetwork, CommRole, PowerGrid
from .scenarios import Scenario, ScenarioParams

SCHEMA_VERSION = 1

_BUS_ROLE = {BusRole.GENERATOR: "generator", BusRole.LOAD: "load", BusRole.SUBSTATION: "substation"}
_COMM_ROLE = {CommRole.ROUTER: "router", CommRole.CONTROL_CENTER: "control_center"}


def scenario_to_dict(scenario: Scenario) -> dict:
    inet, params = scenario.inet, scenario.params
    grid, comm, cp = inet.grid, inet.comm, inet.coupling
    lines = []
    for k in range(grid.n_lines):
        rec = {"id": k, "from": int(grid.line_from[k]), "to": int(grid.line_to[k]),
               "reactance": float(grid.reactance[k])}
        if not math.isnan(grid.capacity[k]):
            rec["capacity"] = float(grid.capacity[k])
        lines.append(rec)
    return {
        "schema_version": SCHEMA_VERSION,
        "buses": [{"id": i, "role": _BUS_ROLE[BusRole(int(r))], "injection": float(p)}
                  for i, (r, p) in enumerate(zip(grid.roles, grid.injection))],
        "lines": lines,
        "comm_nodes": [{"id": j, "role": _COMM_ROLE[CommRole(int(r))]} for j, r in enumerate(comm.roles)],
        "comm_links": [{"from": int(a), "to": int(b)} for a, b in zip(comm.link_from, comm.link_to)],
        "supply_edges": [{"load_bus": int(i), "comm_node": int(j)} for i, j in cp.supply_edges],
        "control_edges": [{"comm_node": int(j), "power_bus": int(i)} for j, i in cp.control_edges],
        "p_req": cp.p_req,
        "fos": params.fos,
        "seed": params.seed,
        "params": params.to_dict(),
        "metadata": scenario.metadata,
    }


def scenario_from_dict(doc: dict) -> Scenario:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported scenario schema_version {version!r}")
    bus_role = {v: k for k, v in _BUS_ROLE.items()}
    comm_role = {v: k for k, v in _COMM_ROLE.items()}
    buses = sorted(doc["buses"], key=lambda b: b["id"])
    lines = sorted(doc["lines"], key=lambda ln: ln["id"])
    grid = PowerGrid(
        roles=[int(bus_role[b["role"]]) for b in buses],
        injection=[b["injection"] for b in buses],
        line_from=[ln["from"] for ln in lines],
        line_to=[ln["to"] for ln in lines],
        reactance=[ln.get("reactance", 1.0) for ln in lines],
        capacity=[ln.get("capacity", np.nan) for ln in lines],
    )
    nodes = sorted(doc["comm_nodes"], key=lambda c: c["id"])
    comm = CommNetwork(
        roles=[int(comm_role[c["role"]]) for c in nodes],
        link_from=[e["from"] for e in doc["comm_links"]],
        link_to=[e["to"] for e in doc["comm_links"]],
    )
    coupling = Coupling(
        [(e["load_bus"], e["comm_node"]) for e in doc["supply_edges"]],
        [(e["comm_node"], e["power_bus"]) for e in doc["control_edges"]],
        doc["p_req"],
    )
    params = ScenarioParams.from_dict(doc["params"]) if "params" in doc else ScenarioParams(
        n_power=grid.n_buses, n_comm=comm.n_nodes, fos=doc.get("fos", 1.2), seed=doc.get("seed", 0))
    return Scenario(InterdependentNetwork(grid, comm, coupling), params, dict(doc.get("metadata", {})))


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))
