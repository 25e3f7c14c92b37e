"""Minimum-time trajectory optimization from input-output data.

One recorded experiment replaces the state-space model: admissible
trajectories are columns of a Hankel matrix, the minimum-time problem
becomes a single exact-penalty linear program over overlapping
trajectory segments, and a model-based scan validates the result.
"""

from .baseline import BaselineSpec, solve_min_time_big_m, solve_min_time_exact
from .hankel import (
    HankelModel,
    ReducedModel,
    admissible_by_data,
    build_data_model,
    build_hankel,
    is_persistently_exciting,
    trajectory_from_coefficients,
)
from .lpsolve import LpProblem, LpSolution, LpStatus, dump_lp, solve_lp
from .mintime import (
    InfeasibleProblemError,
    MinTimeSolution,
    MinTimeSpec,
    PathConstraint,
    PolyhedralTarget,
    SegmentLayout,
    SolveFailedError,
    assemble_lp,
    exp_weights,
    extract_solution,
    input_box_path,
    point_target,
    segment_layout,
    solve_min_time,
)
from .statespace import (
    CwhParams,
    NotAdmissibleError,
    NotObservableError,
    StateSpaceModel,
    cwh_model,
    generate_excitation_data,
    initial_state_from_io,
    is_admissible,
    lag,
    observability_matrix,
    propagated_initial_state,
    simulate,
)
from .trajectories import (
    DataTrajectory,
    Trajectory,
    read_data_csv,
    read_trajectory_csv,
    write_data_csv,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineSpec",
    "CwhParams",
    "DataTrajectory",
    "HankelModel",
    "InfeasibleProblemError",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "MinTimeSolution",
    "MinTimeSpec",
    "NotAdmissibleError",
    "NotObservableError",
    "PathConstraint",
    "PolyhedralTarget",
    "ReducedModel",
    "SegmentLayout",
    "SolveFailedError",
    "StateSpaceModel",
    "Trajectory",
    "admissible_by_data",
    "assemble_lp",
    "build_data_model",
    "build_hankel",
    "cwh_model",
    "dump_lp",
    "exp_weights",
    "extract_solution",
    "generate_excitation_data",
    "initial_state_from_io",
    "input_box_path",
    "is_admissible",
    "is_persistently_exciting",
    "lag",
    "observability_matrix",
    "point_target",
    "propagated_initial_state",
    "read_data_csv",
    "read_trajectory_csv",
    "segment_layout",
    "simulate",
    "solve_lp",
    "solve_min_time",
    "solve_min_time_big_m",
    "solve_min_time_exact",
    "trajectory_from_coefficients",
    "write_data_csv",
    "write_trajectory_csv",
]
