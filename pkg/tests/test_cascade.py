import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import G, L, S, chain_network, triangle
from oracles import overload_cascade

from intercascade import (
    CapacityRule,
    PowerGrid,
    ScenarioParams,
    assign_capacities,
    build_scenario,
    draw_removals,
    removal_rng,
    run_interdependent_cascade,
    run_power_cascade,
    solve_grid_flow,
    yield_of,
)
from intercascade.cascade import TRIP_SLACK


def test_triangle_capacities():
    grid = assign_capacities(triangle(), CapacityRule(1.2))
    assert grid.capacity == pytest.approx([2.4, 1.2, 1.2], abs=1e-12)


def test_fos_two():
    grid = PowerGrid([G, L], [5.0, -5.0], [0], [1])
    assert assign_capacities(grid, CapacityRule(2.0)).capacity.tolist() == pytest.approx([10.0])


def test_zero_flow_line_gets_floor():
    # line 1 hangs off a zero-injection substation and carries nothing
    grid = PowerGrid([G, L, S], [4.0, -4.0, 0.0], [0, 1], [1, 2])
    cap = assign_capacities(grid).capacity
    assert cap[0] == pytest.approx(4.8)
    assert cap[1] == pytest.approx(1e-6 * 4.0)


def test_capacity_rule_validation():
    with pytest.raises(ValueError):
        CapacityRule(1.0)


def test_assign_capacities_does_not_mutate():
    grid = PowerGrid([G, L], [10.0, -4.0], [0], [1])
    out = assign_capacities(grid)
    assert np.isnan(grid.capacity).all()
    assert grid.injection.tolist() == [10.0, -4.0]
    assert out.injection.tolist() == [4.0, -4.0]


def test_no_failure_terminates_in_one_round():
    grid = assign_capacities(triangle())
    trace = run_power_cascade(grid)
    assert trace.terminated and trace.n_rounds == 1
    assert trace.tripped_lines() == set()
    assert yield_of(trace.grid, grid) == 1.0


def test_triangle_loses_line_ab():
    grid = assign_capacities(triangle())
    work = grid.copy()
    work.fail_lines([0])
    trace = run_power_cascade(work)
    assert trace.rounds[0].flows.flows[1:] == pytest.approx([3.0, 3.0])
    assert trace.rounds[0].tripped_lines == [1, 2]
    assert trace.n_rounds == 2 and trace.terminated
    assert yield_of(trace.grid, grid) == 0.0
    assert np.all(trace.grid.injection == 0.0)


def test_bridge_split_balances_each_side():
    # gens 0,1 on one side of bridge 1-2, loads 2,3 on the other
    grid = PowerGrid([G, G, L, L], [50.0, 50.0, -40.0, -60.0], [0, 1, 2, 0], [1, 2, 3, 3])
    grid = assign_capacities(grid)
    work = grid.copy()
    work.fail_lines([1, 3])  # cut every path between the two halves
    trace = run_power_cascade(work)
    inj = trace.grid.injection
    assert inj.tolist() == [0.0, 0.0, 0.0, 0.0]
    assert trace.tripped_lines() == set()
    # keep one load with the generators: the generators scale down to it
    work = grid.copy()
    work.fail_lines([1])
    trace = run_power_cascade(work)
    ref_inj, rounds, tripped = overload_cascade(4, [(0, 1), (1, 2), (2, 3), (0, 3)], grid.reactance,
                                                grid.capacity, grid.injection, dead_lines=[1])
    assert trace.grid.injection == pytest.approx(ref_inj)
    assert trace.n_rounds == rounds and trace.tripped_lines() == tripped


def test_cascade_requires_capacities():
    with pytest.raises(ValueError, match="capacit"):
        run_power_cascade(triangle())


def test_input_grid_not_modified():
    grid = assign_capacities(triangle())
    grid.fail_lines([0])
    before = grid.copy()
    run_power_cascade(grid)
    assert np.array_equal(grid.line_alive, before.line_alive)
    assert np.array_equal(grid.injection, before.injection)


def test_yield_examples():
    base = PowerGrid([G, L, L], [200.0, -100.0, -100.0], [0, 1], [1, 2])
    assert yield_of(base, base) == 1.0
    final = base.copy()
    final.injection = np.array([150.0, -100.0, -50.0])
    assert yield_of(final, base) == pytest.approx(0.75)
    final.fail_buses([0, 1, 2])
    assert yield_of(final, base) == 0.0
    with pytest.raises(ValueError, match="no load"):
        yield_of(base, PowerGrid([G], [1.0], [], []))


def test_yield_ignores_generatorless_islands():
    base = PowerGrid([G, L, L], [200.0, -100.0, -100.0], [0, 1], [1, 2])
    final = base.copy()
    final.fail_lines([1])  # load 2 alone, still marked alive
    assert yield_of(final, base) == pytest.approx(0.5)


def test_interdependent_no_failure():
    inet = chain_network()
    trace = run_interdependent_cascade(inet)
    assert trace.n_rounds == 1 and trace.terminated
    assert yield_of(trace.grid, inet.grid) == 1.0


def test_interdependent_only_control_center_lost():
    inet = chain_network()
    inet.comm.fail([0])
    trace = run_interdependent_cascade(inet)
    assert trace.failed_comm() == {1, 2}
    assert trace.failed_power() == {0, 1, 2, 3}
    assert yield_of(trace.grid, inet.grid) == 0.0
    assert not trace.comm_alive.any()


def random_scenario_case(seed, fraction):
    sc = build_scenario(ScenarioParams(n_power=40, seed=seed))
    power, _ = draw_removals(sc.inet, fraction, removal_rng(seed, fraction))
    return sc, power


@given(st.integers(0, 10_000), st.sampled_from([0.05, 0.1, 0.2, 0.3]))
@settings(max_examples=40, deadline=None)
def test_power_cascade_matches_oracle(seed, fraction):
    sc, power = random_scenario_case(seed, fraction)
    g = sc.grid
    work = g.copy()
    work.fail_buses(power)
    trace = run_power_cascade(work)
    ref_inj, rounds, tripped = overload_cascade(
        g.n_buses, list(zip(g.line_from.tolist(), g.line_to.tolist())), g.reactance, g.capacity,
        g.injection, dead_buses=power)
    assert trace.grid.injection == pytest.approx(ref_inj, abs=1e-6)
    assert trace.n_rounds == rounds
    assert trace.tripped_lines() == tripped


@given(st.integers(0, 10_000), st.sampled_from([0.05, 0.1, 0.3]))
@settings(max_examples=30, deadline=None)
def test_cascade_invariants(seed, fraction):
    sc, power = random_scenario_case(seed, fraction)
    work = sc.grid.copy()
    work.fail_buses(power)
    n_alive_lines = int(work.usable_lines().sum())
    trace = run_power_cascade(work)
    # disjoint trips, termination flag, round bound
    seen = set()
    for r in trace.rounds:
        assert not seen & set(r.tripped_lines)
        seen |= set(r.tripped_lines)
    assert trace.terminated == (trace.rounds[-1].tripped_lines == [])
    assert trace.n_rounds <= n_alive_lines + 1
    # final state is within capacity
    sol = solve_grid_flow(trace.grid)
    usable = trace.grid.usable_lines()
    assert np.all(np.abs(sol.flows[usable]) <= trace.grid.capacity[usable] * (1 + TRIP_SLACK))
    # interdependent cascade: alive sets shrink every macro-round
    inet = sc.inet.copy()
    inet.apply_removals(power)
    full = run_interdependent_cascade(inet)
    assert full.terminated
    assert full.n_rounds <= inet.grid.n_buses + inet.comm.n_nodes
    assert full.failed_power().isdisjoint(power)


@pytest.mark.parametrize("seed", range(5))
def test_quiescent_start(seed):
    sc = build_scenario(ScenarioParams(n_power=60, seed=seed))
    assert run_power_cascade(sc.grid).tripped_lines() == set()
    trace = run_interdependent_cascade(sc.inet)
    assert trace.n_rounds == 1 and not trace.failed_power() and not trace.failed_comm()


def test_trace_is_deterministic_and_serializable(tmp_path):
    sc, power = random_scenario_case(3, 0.1)
    inet = sc.inet.copy()
    inet.apply_removals(power)
    a = run_interdependent_cascade(inet).json_lines(seed=3)
    b = run_interdependent_cascade(inet).json_lines(seed=3)
    assert a == b
    recs = [json.loads(line) for line in a]
    assert [r["round"] for r in recs] == list(range(len(recs)))
    assert recs[-1]["terminated"] and all(r["seed"] == 3 for r in recs)
    path = tmp_path / "trace.jsonl"
    run_interdependent_cascade(inet).write_jsonl(path, seed=3)
    assert path.read_text().splitlines() == a
