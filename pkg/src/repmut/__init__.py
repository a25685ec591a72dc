"""Replicator-mutator dynamics of the repeated Prisoner's Dilemma.

Three strategies (ALLD, ALLC, and costly TFT) evolve on the 2-simplex under
replicator dynamics with an optional mutation matrix.  The package computes
trajectories, fixed points and their stability, limit cycles, and the
saddle-node / Hopf / homoclinic bifurcation curves in the (mu, cost) plane.
"""

from .model import (
    ModelParams,
    SimplexState,
    FitnessVector,
    MutationSpec,
    payoff_matrix,
    fitness,
    mutation_q,
    load_config,
    ParamError,
    InadmissibleMutationError,
)
from .dynamics import (
    VectorField,
    JacobianMatrix,
    named_field,
    general_field,
    replicator_field,
    repmut_field,
    field_from_config,
)
from .integrator import (
    Trajectory,
    integrate,
    find_attractor,
    FixedPointAttractor,
    CycleAttractor,
    Undetermined,
)
from .equilibria import (
    EquilibriumReport,
    fixed_points_closed_form,
    fixed_points_numeric,
    classify,
)
from .cycles import LimitCycleRecord, detect_limit_cycle, cycle_metrics
from .equilibria import fixed_points
from .io_cli import ProjectedPoint, simplex_project, render_phase_portrait, cli_main
from . import bifurcation

__all__ = [
    "ModelParams",
    "SimplexState",
    "FitnessVector",
    "MutationSpec",
    "payoff_matrix",
    "fitness",
    "mutation_q",
    "load_config",
    "ParamError",
    "InadmissibleMutationError",
    "VectorField",
    "JacobianMatrix",
    "named_field",
    "general_field",
    "replicator_field",
    "repmut_field",
    "field_from_config",
    "Trajectory",
    "integrate",
    "find_attractor",
    "FixedPointAttractor",
    "CycleAttractor",
    "Undetermined",
    "EquilibriumReport",
    "fixed_points_closed_form",
    "fixed_points_numeric",
    "classify",
    "LimitCycleRecord",
    "detect_limit_cycle",
    "cycle_metrics",
    "fixed_points",
    "ProjectedPoint",
    "simplex_project",
    "render_phase_portrait",
    "cli_main",
    "bifurcation",
]
