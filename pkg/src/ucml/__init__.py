"""Unidirectionally coupled map lattice (UCML) model of pipe-flow
turbulence: puff/slug simulation, bifurcation thresholds, and lifetime
statistics."""

from .params import H_CRITICAL, ModelParams
from .dynamics import (
    FixedPoints,
    LatticeState,
    coupling_map,
    onsite_fixed_points,
    onsite_map,
    single_site_lifetime_theory,
    step,
)
from .bifurcation import (
    IntermittencyFit,
    SaddleNode,
    TransitionCurves,
    alpha_puff_threshold,
    find_saddle_node,
    leading_velocity,
    leading_velocity_theory,
    trailing_velocity_theory,
    transition_line_puff_slug,
)
from .engine import (
    Classification,
    EnsembleResult,
    InitialCondition,
    TrajectoryRecord,
    classify,
    measure_edge_velocities,
    run_ensemble,
    run_trajectory,
)

__all__ = [
    "H_CRITICAL", "ModelParams", "LatticeState", "FixedPoints",
    "onsite_map", "coupling_map", "step", "onsite_fixed_points",
    "single_site_lifetime_theory",
    "SaddleNode", "IntermittencyFit", "TransitionCurves",
    "find_saddle_node", "alpha_puff_threshold", "trailing_velocity_theory",
    "leading_velocity_theory", "leading_velocity", "transition_line_puff_slug",
    "InitialCondition", "TrajectoryRecord", "Classification",
    "run_trajectory", "measure_edge_velocities", "classify", "run_ensemble",
    "EnsembleResult",
]
