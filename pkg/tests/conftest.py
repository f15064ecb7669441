import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from intercascade import (  # noqa: E402
    BusRole,
    CapacityRule,
    CommNetwork,
    CommRole,
    Coupling,
    InterdependentNetwork,
    LinearProgram,
    PowerGrid,
    assign_capacities,
    balance_grid,
)

G, L, S = BusRole.GENERATOR, BusRole.LOAD, BusRole.SUBSTATION

# (criterion, passed, detail) collected by test_acceptance.py
ACCEPTANCE: list = []


def two_bus(capacity=None):
    cap = None if capacity is None else [capacity]
    return PowerGrid([G, L], [100.0, -100.0], [0], [1], capacity=cap)


def triangle():
    """A=0 generates 3, B=1 consumes 3, C=2 is a substation.

    Lines: 0 = A->B, 1 = A->C, 2 = C->B.
    """
    return PowerGrid([G, L, S], [3.0, -3.0, 0.0], [0, 0, 2], [1, 2, 1])


def chain_network():
    """Seven-node instance for the dependency propagation example.

    Power: generator 0, loads 1, 2, 3; lines 0 = 0-1, 1 = 1-2, 2 = 0-3.
    Comm: control center 0, routers 1 and 2; links 0-1, 0-2.
    Supply: bus 1 -> comm 0 and comm 1, bus 2 -> comm 2 (its only feed).
    Control: comm 0 -> buses 0 and 1, comm 1 -> bus 2, comm 2 -> bus 3.
    """
    grid = PowerGrid([G, L, L, L], [300.0, -100.0, -100.0, -100.0], [0, 1, 0], [1, 2, 3])
    grid = assign_capacities(grid, CapacityRule(1.2))
    comm = CommNetwork([CommRole.CONTROL_CENTER, CommRole.ROUTER, CommRole.ROUTER], [0, 0], [1, 2])
    coupling = Coupling([(1, 0), (1, 1), (2, 2)], [(0, 0), (0, 1), (1, 2), (2, 3)], p_req=1.0)
    return InterdependentNetwork(grid, comm, coupling)


def random_connected_grid(rng, n):
    order = rng.permutation(n)
    edges = {tuple(sorted((int(order[k]), int(order[rng.integers(k)])))) for k in range(1, n)}
    for _ in range(rng.integers(0, 2 * n)):
        a, b = rng.choice(n, 2, replace=False)
        edges.add((int(min(a, b)), int(max(a, b))))
    edges = sorted(edges)
    roles = np.where(rng.random(n) < 0.3, G, L)
    roles[0] = G
    roles[-1] = L
    mag = rng.uniform(1, 100, n)
    inj = np.where(roles == G, mag, -mag)
    x = rng.uniform(0.1, 10, len(edges))
    grid = PowerGrid(roles, inj, [a for a, _ in edges], [b for _, b in edges], reactance=x)
    grid.injection, _ = balance_grid(grid)
    return grid



def random_lp(rng):
    """Small LP with integer data, so degenerate vertices are common."""
    n = int(rng.integers(1, 7))
    m = int(rng.integers(0, 9))
    lp = LinearProgram()
    lb, ub = [], []
    for _ in range(n):
        lo = rng.choice([0.0, -3.0, -math.inf, -math.inf])
        hi = rng.choice([math.inf, 4.0, 10.0]) if rng.random() < 0.6 else math.inf
        lb.append(lo)
        ub.append(hi)
        lp.add_variable(lo, hi, float(rng.integers(-5, 6)))
    rows = []
    for _ in range(m):
        a = rng.integers(-4, 5, n).astype(float)
        rel = rng.choice(["<=", ">=", "=="], p=[0.45, 0.35, 0.2])
        b = float(rng.integers(-10, 11))
        lp.add_constraint((np.arange(n), a), rel, b)
        rows.append((a, rel, b))
    c = np.asarray(lp.cost)
    return lp, (c, rows, np.array(lb), np.array(ub))



@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
