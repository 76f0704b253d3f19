"""lossforge: learn linear training losses from observations of trained models.

Given records of trained models (validation error, a feature vector such as
regularizer values, and optionally gradients), the package fits coefficients
whose induced training loss ranks the best-observed model lowest while
predicting validation error as well as possible. Around that core it
provides a dense convex QP solver, an AdaGrad trainer for softmax
regression, feature builders (standard regularizers, hinge families for
learned convex penalties, mixtures), exact finite-set oracles, and an
experiment harness with a random-search baseline.
"""

from .losscore import (
    CostParams,
    Hypercube,
    LinearLoss,
    Observation,
    cost,
    evaluate_loss,
)
from .learnloss import LearnLossResult, default_epsilon, learn_loss
from .numopt import QpProblem, QpSolution, QpStatus, check_lp_feasibility, solve_qp
from .oracle import (
    FiniteBilevelInstance,
    brute_force_bilevel,
    finite_difference_gradient,
    optimal_lambda_finite,
)
from .tuneloss import (
    TuneConfig,
    TuneTrace,
    bootstrap_overfit_start,
    overfit_start_epoch,
    tune_loss,
)

__version__ = "0.1.0"

__all__ = [
    "CostParams",
    "Hypercube",
    "LinearLoss",
    "Observation",
    "cost",
    "evaluate_loss",
    "LearnLossResult",
    "default_epsilon",
    "learn_loss",
    "QpProblem",
    "QpSolution",
    "QpStatus",
    "check_lp_feasibility",
    "solve_qp",
    "FiniteBilevelInstance",
    "brute_force_bilevel",
    "finite_difference_gradient",
    "optimal_lambda_finite",
    "TuneConfig",
    "TuneTrace",
    "bootstrap_overfit_start",
    "overfit_start_epoch",
    "tune_loss",
    "__version__",
]
