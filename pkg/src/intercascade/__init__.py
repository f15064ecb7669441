"""Cascading failures and load-shedding control in coupled power grids and
communication networks.

The grid uses the DC power-flow model with capacity-based line tripping. The
communication network needs power from grid loads and in turn controls the
grid's buses. Two control policies shed load through linear programs.
"""

from .cascade import (
    CapacityRule,
    CascadeRound,
    CascadeTrace,
    assign_capacities,
    run_interdependent_cascade,
    run_power_cascade,
    yield_of,
)
from .experiments import (
    CSV_HEADER,
    POLICIES,
    ExperimentConfig,
    ScenarioResult,
    aggregate,
    run_point,
    run_scenario,
    run_sweep,
)
from .interdependency import (
    AllocationResult,
    Coupling,
    InterdependentNetwork,
    allocate_comm_power,
    connectivity_cascade,
    disconnected_comm_nodes,
    unsupported_power_nodes,
)
from .lp import LinearProgram, LpSolution, LpSolverError, LpStatus, solve
from .mitigation import (
    InjectionPlan,
    PolicyOutcome,
    apply_plan,
    build_shedding_lp,
    isolated_grid_state,
    isolated_grid_upper_bound,
    iterative_simple_policy,
    load_control_policy,
    simple_mitigation_lp,
)
from .network_model import (
    BusRole,
    CommNetwork,
    CommRole,
    Graph,
    PowerGrid,
    components,
    connected_components,
    largest_component_size,
    reachable_from,
)
from .power_flow import (
    BalanceReport,
    FlowSolution,
    FlowSolverError,
    balance_grid,
    balance_island,
    solve_dc_flow,
    solve_grid_flow,
)
from .scenarios import (
    Scenario,
    ScenarioParams,
    build_scenario,
    draw_removals,
    gen_erdos_renyi,
    gen_interdependent_network,
    gen_power_grid,
    removal_rng,
)
from .serialization import SCHEMA_VERSION, load_scenario, save_scenario, scenario_from_dict, scenario_to_dict

__version__ = "0.1.0"
