from .qp import (  # noqa: F401
    HalfPlane,
    QpResult,
    box_halfplanes,
    linearize_min_distance,
    solve_position_qp,
)
from .mm import (  # noqa: F401
    PositionContext,
    PositionSubproblem,
    PositionUpdate,
    SurrogateModel,
    SweepResult,
    build_subproblem,
    build_surrogate,
    delta_bound,
    f4_value,
    f5_gradient,
    f5_hessian,
    f5_value,
    optimize_position_m,
    surrogate_phi,
    surrogate_value,
    sweep_positions,
    tau_vectors,
)
