"""First-order convex optimization toolkit."""

from ._kernels import BACKEND
from .core import (
    AdaptivityError,
    Box,
    BreakdownError,
    ConfigurationError,
    DivergenceError,
    DomainError,
    EuclideanBall,
    FeasibleSet,
    FirstOrderOracle,
    FomError,
    FreeSpace,
    FreeTimesOrthant,
    NonnegOrthant,
    NormSpec,
    Problem,
    ProductSet,
    Simplex,
    Trace,
    dual_norm,
    finite_diff_check,
    norm,
)
from .model import (
    CompositeTerm,
    ModelOracle,
    composite_model,
    holder_to_smooth_L,
    inexact_wrap,
    linear_model,
    model_check,
)
from .prox import (
    EntropyProx,
    EuclideanProx,
    PNormProx,
    ProductProx,
    bregman,
    mirror_step,
    pnorm_mirror_map_inverse,
    project_simplex_euclidean,
    prox_radius,
)

__version__ = "0.1.0"
