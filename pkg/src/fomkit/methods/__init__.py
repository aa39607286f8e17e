"""Solvers: non-adaptive baselines and adaptive/accelerated methods."""

from .first_order import (
    ExactQuadraticLineSearch,
    FixedInverseL,
    Sequence,
    StepRule,
    cg_quadratic,
    frank_wolfe_simplex,
    gradient_descent,
    heavy_ball,
    linear_coupling,
    model_gradient_method,
    nesterov_momentum,
    nonlinear_cg,
    subgradient_method,
)
from .universal import (
    GradientStage,
    SubgradientStage,
    UniversalStage,
    restart_strongly_convex,
    similar_triangles,
    triangle_coefficients,
    universal_gradient,
)
