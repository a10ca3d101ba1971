"""orderlab: interventional causal-order recovery on random DAGs, with
Monte Carlo verification of expectation and concentration bounds."""

from .graphs import (
    Dag,
    GraphStats,
    ParameterError,
    gamma_of,
    gen_ba,
    gen_er,
    gen_sparse_er,
    load_graph,
    reachability,
    save_graph,
    stats,
)
from .oracle import (
    DistanceOracle,
    InterventionVector,
    build_oracle,
    default_score_const,
    sample_interventions,
)
from .ordering import (
    CausalOrder,
    ExhaustiveLimitError,
    OrderEval,
    check_orientation_lemma,
    d_top,
    evaluate,
    opt_exact,
    opt_heuristic,
    precedence_order,
    score,
)

__all__ = [
    "Dag",
    "GraphStats",
    "ParameterError",
    "gamma_of",
    "gen_ba",
    "gen_er",
    "gen_sparse_er",
    "load_graph",
    "reachability",
    "save_graph",
    "stats",
    "DistanceOracle",
    "InterventionVector",
    "build_oracle",
    "default_score_const",
    "sample_interventions",
    "CausalOrder",
    "ExhaustiveLimitError",
    "OrderEval",
    "check_orientation_lemma",
    "d_top",
    "evaluate",
    "opt_exact",
    "opt_heuristic",
    "precedence_order",
    "score",
]
