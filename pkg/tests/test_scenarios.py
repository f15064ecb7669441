import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intercascade import (
    BusRole,
    CommRole,
    ScenarioParams,
    build_scenario,
    connectivity_cascade,
    disconnected_comm_nodes,
    draw_removals,
    gen_erdos_renyi,
    gen_power_grid,
    load_control_policy,
    removal_rng,
    scenario_to_dict,
)


def test_erdos_renyi_small_cases():
    rng = np.random.default_rng(0)
    assert len(gen_erdos_renyi(0, 0.5, rng).src) == 0
    for _ in range(5):
        g = gen_erdos_renyi(2, 1.0, rng)
        assert (g.src.tolist(), g.dst.tolist()) == ([0], [1])
    with pytest.raises(ValueError, match="expected_degree"):
        gen_erdos_renyi(4, 4.0, rng)


def test_erdos_renyi_mean_edge_count():
    counts = [len(gen_erdos_renyi(500, 4.0, np.random.default_rng(s)).src) for s in range(100)]
    assert np.mean(counts) == pytest.approx(1000.0, rel=0.05)


def test_erdos_renyi_edges_are_simple():
    g = gen_erdos_renyi(60, 6.0, np.random.default_rng(3))
    assert np.all(g.src < g.dst)
    assert len(set(zip(g.src.tolist(), g.dst.tolist()))) == len(g.src)


def test_power_grid_defaults():
    params = ScenarioParams()
    grid = gen_power_grid(params, np.random.default_rng(1))
    assert np.sum(grid.roles == BusRole.GENERATOR) == 20
    assert np.sum(grid.roles == BusRole.LOAD) == 80
    assert np.all(grid.reactance == 1.0)
    assert abs(grid.injection.sum()) <= 1e-9 * np.abs(grid.injection).sum()
    assert np.all(np.abs(grid.injection) <= 2000.0)
    # every island is balanced on its own
    for island in grid.islands():
        assert abs(grid.injection[island].sum()) <= 1e-9 * max(1.0, np.abs(grid.injection[island]).sum())


def test_all_generators_rejected():
    with pytest.raises(ValueError, match="load"):
        gen_power_grid(ScenarioParams(generator_fraction=1.0), np.random.default_rng(0))


def test_params_validation():
    with pytest.raises(ValueError):
        ScenarioParams(generator_fraction=0.0)
    with pytest.raises(ValueError):
        ScenarioParams(injection_range=(5.0, 1.0))
    with pytest.raises(ValueError):
        ScenarioParams(comm_interdep_degree=0.5)
    assert ScenarioParams.from_dict(ScenarioParams(seed=4).to_dict()) == ScenarioParams(seed=4)


def test_determinism():
    a = scenario_to_dict(build_scenario(ScenarioParams(seed=11)))
    b = scenario_to_dict(build_scenario(ScenarioParams(seed=11)))
    c = scenario_to_dict(build_scenario(ScenarioParams(seed=12)))
    assert a == b
    assert a != c


@given(st.integers(0, 10_000), st.sampled_from([1.0, 2.0, 2.5, 4.0]), st.sampled_from([1.0, 3.0]))
@settings(max_examples=30, deadline=None)
def test_edge_directions_and_degrees(seed, comm_deg, power_deg):
    sc = build_scenario(ScenarioParams(n_power=50, seed=seed, comm_interdep_degree=comm_deg,
                                       power_interdep_degree=power_deg))
    grid, cp = sc.grid, sc.inet.coupling
    sup, ctl = cp.supply_edges, cp.control_edges
    # supply edges run load -> comm, control edges comm -> power
    assert np.all(grid.roles[sup[:, 0]] == BusRole.LOAD)
    assert np.all(grid.injection[sup[:, 0]] < 0)
    assert np.all((ctl[:, 0] >= 0) & (ctl[:, 0] < sc.inet.comm.n_nodes))
    assert len(set(map(tuple, sup.tolist()))) == len(sup)
    assert len(set(map(tuple, ctl.tolist()))) == len(ctl)
    # exact-degree wiring: means hit the target up to rounding of the fractional part
    n_c = sc.inet.comm.n_nodes
    assert len(sup) / n_c == pytest.approx(comm_deg, abs=1.0 / n_c)
    assert len(ctl) / grid.n_buses == pytest.approx(power_deg, abs=1.0 / grid.n_buses)
    assert np.all(np.bincount(sup[:, 1], minlength=n_c) >= 1)
    assert np.all(np.bincount(ctl[:, 1], minlength=grid.n_buses) >= 1)


def test_mean_supply_degree_four():
    degs = [len(build_scenario(ScenarioParams(seed=s, comm_interdep_degree=4.0)).inet.coupling.supply_edges) / 100
            for s in range(5)]
    assert np.mean(degs) == pytest.approx(4.0)


def test_perfect_matching_when_sizes_agree():
    # dense enough that every load sits in a generator island
    params = ScenarioParams(n_power=50, n_comm=40, expected_degree=12.0, seed=5)
    sc = build_scenario(params)
    grid, cp = sc.grid, sc.inet.coupling
    loads = np.flatnonzero(grid.roles == BusRole.LOAD)
    assert len(loads) == 40 and np.all(grid.injection[loads] < 0)
    sup = cp.supply_edges
    assert sorted(sup[:, 0].tolist()) == loads.tolist()
    assert sorted(sup[:, 1].tolist()) == list(range(40))
    # each load is controlled by the comm node it powers
    pair = {int(i): int(j) for i, j in sup}
    ctl = {(int(j), int(i)) for j, i in cp.control_edges}
    assert all((pair[i], i) in ctl for i in loads)


def test_p_req_formula():
    sc = build_scenario(ScenarioParams(n_power=500, seed=2))
    total = -sc.grid.injection[sc.grid.roles == BusRole.LOAD].sum()
    assert sc.inet.coupling.p_req == pytest.approx(1e-4 * total / 500)
    # 500000 units of load over 500 comm nodes at LF 1e-4
    assert 1e-4 * 500_000 / 500 == pytest.approx(0.1)


def test_more_comm_nodes_than_loads():
    sc = build_scenario(ScenarioParams(n_power=40, n_comm=70, seed=1))
    assert sc.inet.comm.n_nodes == 70
    assert np.all(np.bincount(sc.inet.coupling.supply_edges[:, 1], minlength=70) >= 1)


@given(st.integers(0, 10_000), st.sampled_from([2.0, 4.0]), st.sampled_from([1e-4, 0.1]))
@settings(max_examples=25, deadline=None)
def test_generated_networks_are_operational(seed, degree, lf):
    sc = build_scenario(ScenarioParams(n_power=40, seed=seed, expected_degree=degree, load_factor=lf))
    comm = sc.inet.comm
    assert np.any(comm.roles == CommRole.CONTROL_CENTER)
    assert disconnected_comm_nodes(comm) == set()
    lost_p, lost_c = connectivity_cascade(sc.inet)
    # pruning only takes buses that carry nothing in the base case
    assert np.all(sc.grid.injection[sorted(lost_p)] == 0.0)
    assert lost_c == set()
    out = load_control_policy(sc.inet)
    assert out.optimal


def test_removal_draws():
    sc = build_scenario(ScenarioParams(n_power=50, seed=0))
    a = draw_removals(sc.inet, 0.2, removal_rng(0, 0.2))
    b = draw_removals(sc.inet, 0.2, removal_rng(0, 0.2))
    assert a == b
    power, comm = a
    assert len(power) == 10 and comm == [] and power == sorted(set(power))
    power, comm = draw_removals(sc.inet, 0.1, removal_rng(0, 0.1), mode="joint")
    assert len(power) == 5 and len(comm) == 5
    assert draw_removals(sc.inet, 0.0, removal_rng(0, 0.0)) == ([], [])
    with pytest.raises(ValueError):
        draw_removals(sc.inet, 1.5, removal_rng(0, 1.5))
    with pytest.raises(ValueError, match="mode"):
        draw_removals(sc.inet, 0.1, removal_rng(0, 0.1), mode="comm")
