"""Exact combinatorial solver for the unit-supply bargaining market game.

Decides whether every player can strictly improve on their disagreement
payoff, produces machine-checkable certificates when they cannot, and
computes the exact rational bargaining solution (prices, allocation,
utilities) when they can — all with integer/rational arithmetic, no
floating point anywhere.
"""

from .instance import (
    BargainingInstance,
    InstanceError,
    PreprocessReport,
    dump_instance,
    format_rational,
    gen_l1_adversarial,
    gen_random,
    load_instance,
    make_instance,
    parse_instance,
    parse_rational,
    preprocess,
    wireless_adapter,
)
from .flownet import (
    FlowResult,
    MarketNetwork,
    bang_per_buck,
    build_network,
    is_small,
    max_flow,
    maxflow_call_count,
    residual_reachable,
)
from .balanced import BalanceError, balanced_flow, scale_flow, surpluses, verify_property1
from .fisher import FisherError, fisher_equilibrium, measure_l1_vs_l2
from .certify import (
    check_equilibrium,
    check_feasibility_witness,
    check_kkt,
    lp_dual_for_zero_row,
    recover_prices_from_support,
    verify_convex_dual,
    verify_lp_dual,
)
from .oracle import (
    LimitResult,
    OracleCapError,
    OracleResult,
    feasibility_lp,
    limit_algorithm,
    oracle_solve,
)
from .solver import (
    Solution,
    SolverError,
    SolverState,
    initialize,
    maxflow_budget,
    relaxed_kkt_gap,
    solution_to_json,
    solve,
    stage1,
    stage1_event_x,
    stage2,
)

__version__ = "0.1.0"

__all__ = [
    "BalanceError",
    "BargainingInstance",
    "FisherError",
    "FlowResult",
    "InstanceError",
    "LimitResult",
    "MarketNetwork",
    "OracleCapError",
    "OracleResult",
    "PreprocessReport",
    "Solution",
    "SolverError",
    "SolverState",
    "balanced_flow",
    "bang_per_buck",
    "build_network",
    "check_equilibrium",
    "check_feasibility_witness",
    "check_kkt",
    "dump_instance",
    "feasibility_lp",
    "fisher_equilibrium",
    "format_rational",
    "gen_l1_adversarial",
    "gen_random",
    "initialize",
    "is_small",
    "limit_algorithm",
    "load_instance",
    "lp_dual_for_zero_row",
    "make_instance",
    "max_flow",
    "maxflow_budget",
    "maxflow_call_count",
    "measure_l1_vs_l2",
    "oracle_solve",
    "parse_instance",
    "parse_rational",
    "preprocess",
    "recover_prices_from_support",
    "relaxed_kkt_gap",
    "residual_reachable",
    "scale_flow",
    "solution_to_json",
    "solve",
    "stage1",
    "stage1_event_x",
    "stage2",
    "surpluses",
    "verify_convex_dual",
    "verify_lp_dual",
    "verify_property1",
    "wireless_adapter",
]
