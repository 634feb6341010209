"""Exact evaluation of concatenated solutions of ∫_{λy}^{λx} f = f(x) - f(y)
along fixed points of two-letter uniform substitutions."""

from .evaluator import GridPoint, GridTable, step_increment, tabulate, value_at, vk_coefficient
from .moments import BoundaryData, MomentTable, compute_moments, extend_moments, init_moments, relation_residual, unnormalize
from .words import (
    Substitution,
    count_occurrences,
    delta1_via_prefixes,
    delta_level,
    delta_table,
    first_occurrence,
    fixed_point_prefix,
    parse_substitution,
    validate,
)

__all__ = [
    "BoundaryData",
    "GridPoint",
    "GridTable",
    "MomentTable",
    "Substitution",
    "compute_moments",
    "count_occurrences",
    "delta1_via_prefixes",
    "delta_level",
    "delta_table",
    "extend_moments",
    "first_occurrence",
    "fixed_point_prefix",
    "init_moments",
    "parse_substitution",
    "relation_residual",
    "step_increment",
    "tabulate",
    "unnormalize",
    "validate",
    "value_at",
    "vk_coefficient",
]
