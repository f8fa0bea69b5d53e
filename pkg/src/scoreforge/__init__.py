"""Bounded proper scoring rules that maximize worst-case information gain.

The package couples Savage-form scoring rules (convex functions on the
probability simplex) with finite-support information structures, solves for
worst-case-optimal bounded rules by linear programming, constructs
collections that pin a given rule as the optimum, and numerically verifies
the asymptotic optimality of the quadratic and log rules.
"""

from .asymptotics import (
    BETA_LIMIT,
    GuardedBetaFamily,
    GuardedDirichletFamily,
    LimitSweep,
    beta_limit_sweep,
    dirichlet_limit,
    dirichlet_limit_sweep,
    guarded_beta_objective,
    guarded_dirichlet_objective,
    lp_log_convergence,
    quadratic_limit,
    quadratic_limit_sweep,
    scaling_check,
)
from .gain import (
    GainReport,
    d_beta,
    d_dir,
    d_dir_trace,
    finite_difference_hessian,
    info_gain,
    info_gain_extended,
    objective,
    relative_gain,
    strong_convexity_modulus,
)
from .geometry import (
    ConvexRule,
    DimensionMismatchError,
    LogRule,
    PiecewiseLinearConvex,
    PyramidRule,
    QuadraticRule,
    ScoringRule,
    SimplexPoint,
    SingularityError,
    SphericalRule,
    SymmetrizedBinaryRule,
    builtin_rule,
    expected_score,
    pyramid,
    savage_score,
    simplex_center,
    simplex_grid,
    simplex_vertices,
    v_shape,
    validate_bounded,
)
from .lp import LPInstance, LPSolution, build_lp, extract_H, optimal_rule, solve_lp
from .settlement import (
    QuadraticWitnessRule,
    SettlementPlan,
    anchor_structure,
    enumerate_faces,
    lower_bound_structure,
    necessary_check,
    quadratic_unsettled_witness,
    settle_on_region,
    settle_plan,
    upper_bound_structure,
)
from .structures import (
    Collection,
    InfoStructure,
    beta_bernoulli,
    beta_collection_adaptive,
    beta_collection_static,
    cov_norm,
    covariance,
    dirichlet_categorical,
    dirichlet_collection,
    scale,
    two_point,
)

__version__ = "0.1.0"
