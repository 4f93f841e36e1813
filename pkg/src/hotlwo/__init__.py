"""BGP-aware IGP link weight optimization.

Classical weight optimizers treat the intradomain traffic matrix as fixed,
but hot-potato routing re-selects egress points whenever weights change, so
the matrix such an optimizer trusts can be invalidated by its own output.
This package extends the intradomain topology with virtual destination nodes
for clusters of equivalent prefixes, optimizes weights on the extended graph
(where the egress choice is part of the routing), and verifies the resulting
loads against an independent per-router simulation of the BGP decision
process.
"""

from .bgp import PrefixClassification, RouteRecord, classify_prefixes, parse_route_dump
from .model import (
    Arc,
    EgressAggregate,
    ExtendedTopology,
    Node,
    Peering,
    Topology,
    TopologySpec,
    build_topology,
    extend_topology,
    parse_topology,
    scale_instance,
    simplify_model,
)
from .objective import CostParams, phi_link, phi_total
from .routing import (
    EcmpDag,
    compute_loads,
    ecmp_dag,
    route_demand,
    shortest_distances,
    u_max,
    utilizations,
)
from .search import SearchConfig, initial_weights, optimize
from .simulate import (
    cdf,
    evaluate_modes,
    fold_hot_potato,
    select_egresses,
    simulate_loads,
)
from .tm import (
    AggregatedTM,
    FlowRecord,
    aggregate_by_egress_set,
    build_aggregated_tm,
    truncate_aggregates,
)

__all__ = [name for name in dir() if not name.startswith("_")]
