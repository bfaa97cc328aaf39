"""Physics-informed problems, losses and time marching."""

from .losses import CausalSchedule, causal_weights, model_field, relative_l2, residual_loss, time_bins
from .marching import handoff, window_bounds, window_march
from .problems import (
    PROBLEMS,
    Advection,
    AllenCahn,
    FourierIC,
    Helmholtz,
    KuramotoSivashinsky,
    PdeProblem,
    Poisson,
    Regression,
    advection_problem,
    allen_cahn_problem,
    helmholtz_problem,
    ks_initial,
    ks_problem,
    make_problem,
    poisson_problem,
)

__all__ = [
    "PROBLEMS",
    "Advection",
    "AllenCahn",
    "CausalSchedule",
    "FourierIC",
    "Helmholtz",
    "KuramotoSivashinsky",
    "PdeProblem",
    "Poisson",
    "Regression",
    "advection_problem",
    "allen_cahn_problem",
    "causal_weights",
    "handoff",
    "helmholtz_problem",
    "ks_initial",
    "ks_problem",
    "make_problem",
    "model_field",
    "poisson_problem",
    "relative_l2",
    "residual_loss",
    "time_bins",
    "window_bounds",
    "window_march",
]
