"""Walk through the smallest instances by hand.

A two-bus line and a three-bus triangle show the DC flow solve, capacity
assignment, a two-round overload cascade and the shedding LP that would
have prevented it.
"""

import numpy as np

from intercascade import (
    BusRole,
    PowerGrid,
    assign_capacities,
    run_power_cascade,
    simple_mitigation_lp,
    solve_grid_flow,
    yield_of,
)

G, L, S = BusRole.GENERATOR, BusRole.LOAD, BusRole.SUBSTATION

two = PowerGrid([G, L], [100.0, -100.0], [0], [1])
sol = solve_grid_flow(two)
print("two-bus flow", sol.flows, "phases", sol.phases)

# A generates 3, B consumes 3, C only relays
tri = PowerGrid([G, L, S], [3.0, -3.0, 0.0], [0, 0, 2], [1, 2, 1])
print("triangle flows A->B, A->C, C->B:", solve_grid_flow(tri).flows)

tri = assign_capacities(tri)
print("capacities at factor of safety 1.2:", tri.capacity)

hit = tri.copy()
hit.fail_lines([0])
trace = run_power_cascade(hit)
for k, r in enumerate(trace.rounds):
    print(f"round {k}: flows {np.round(r.flows.flows, 3)} tripped {r.tripped_lines}")
print("yield after the cascade:", yield_of(trace.grid, tri))

# shed instead of letting lines trip
plan = simple_mitigation_lp(hit)
print("shedding plan", np.round(plan.injection, 6), "total change", round(plan.objective, 6))
hit.injection = plan.injection
print("yield with shedding:", round(yield_of(hit, tri), 6))
