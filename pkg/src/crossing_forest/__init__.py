"""Spanning trees with low crossing number.

Exact-rational LP relaxations over materialised range spaces, an embedded
simplex solver, randomized and deterministic-planar rounding, a recursive
contraction driver, and brute-force verification oracles.
"""

from .geom_core import (
    DegenerateGeometryError,
    GeneralPositionError,
    GeometryError,
    Hyperplane,
    Point,
    PointSet,
    crossing_disk_size,
    crossing_distance,
    edge_crosses,
    load_point_set,
    parse_point_set,
    side_of,
    symbolic_perturbation,
)
from .lp_engine import (
    FractionalSolution,
    LPInstance,
    build_dual,
    build_min_t_lp,
    build_primal,
    build_separation,
    build_weighted_primal,
    edge_values,
    format_lp,
    min_feasible_t,
    solve,
)
from .pipeline import (
    LevelTrace,
    PipelineAbort,
    PipelineError,
    SpanningTree,
    build_tree,
    euler_shortcut,
    extract_spanning_tree,
)
from .range_space import (
    Range,
    RangeSpace,
    canonical_ranges,
    crossing_number,
    explicit_ranges,
    load_set_system,
    restrict,
)
from .rationals import Q
from .rounding import (
    EdgeSet,
    RoundingBudgetError,
    RoundingStats,
    SupportNotPlanarError,
    deterministic_planar_round,
    randomized_round,
    round_until_reduced,
)
from .verify import (
    OracleResult,
    brute_force_opt_tree,
    check_crossing_disk_lemma,
    check_duality_certificate,
    check_separation_lower_bound,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateGeometryError",
    "EdgeSet",
    "FractionalSolution",
    "GeneralPositionError",
    "GeometryError",
    "Hyperplane",
    "LPInstance",
    "LevelTrace",
    "OracleResult",
    "PipelineAbort",
    "PipelineError",
    "Point",
    "PointSet",
    "Q",
    "Range",
    "RangeSpace",
    "RoundingBudgetError",
    "RoundingStats",
    "SpanningTree",
    "SupportNotPlanarError",
    "brute_force_opt_tree",
    "build_dual",
    "build_min_t_lp",
    "build_primal",
    "build_separation",
    "build_tree",
    "build_weighted_primal",
    "canonical_ranges",
    "check_crossing_disk_lemma",
    "check_duality_certificate",
    "check_separation_lower_bound",
    "crossing_disk_size",
    "crossing_distance",
    "crossing_number",
    "deterministic_planar_round",
    "edge_crosses",
    "edge_values",
    "euler_shortcut",
    "explicit_ranges",
    "extract_spanning_tree",
    "format_lp",
    "load_point_set",
    "load_set_system",
    "min_feasible_t",
    "parse_point_set",
    "randomized_round",
    "restrict",
    "round_until_reduced",
    "side_of",
    "solve",
    "symbolic_perturbation",
]
