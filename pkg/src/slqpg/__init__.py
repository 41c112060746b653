"""Policy-gradient optimization for infinite-horizon stochastic LQ control
with multiplicative noise.

Exact cost/gradient/Hessian evaluation through generalized Lyapunov
equations, gradient-flow and gradient-descent solvers with convergence
certificates, a Riccati policy-iteration oracle, and Monte Carlo SDE
validation.
"""

from .errors import (
    InvalidInput,
    MaxIterExceeded,
    NotStabilizing,
    Overflow,
    ParseError,
    SingularOperator,
    SlqError,
    StepCollapse,
    UnsupportedModel,
    ValidationError,
)
from .lyapunov import ClosedLoop, StabilizerCheck, closed_loop, is_stabilizer, solve_dual, solve_primal
from .optimize import (
    DescentReport,
    FlowConfig,
    IterateRecord,
    OptimizerConfig,
    check_certificates,
    gradient_descent,
    gradient_flow,
)
from .simulate import SimConfig, SimEstimate, estimate_cost, mean_square_decay
from .slq import (
    ConvergenceConstants,
    CostWeights,
    Gain,
    GradientBundle,
    Solution,
    SystemModel,
    constants,
    cost,
    gain_within_bound,
    gradient,
    hessian_action,
    riccati_policy_iteration,
    value_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ClosedLoop",
    "ConvergenceConstants",
    "CostWeights",
    "DescentReport",
    "FlowConfig",
    "Gain",
    "GradientBundle",
    "InvalidInput",
    "IterateRecord",
    "MaxIterExceeded",
    "NotStabilizing",
    "OptimizerConfig",
    "Overflow",
    "ParseError",
    "SimConfig",
    "SimEstimate",
    "SingularOperator",
    "SlqError",
    "Solution",
    "StabilizerCheck",
    "StepCollapse",
    "SystemModel",
    "UnsupportedModel",
    "ValidationError",
    "check_certificates",
    "closed_loop",
    "constants",
    "cost",
    "estimate_cost",
    "gain_within_bound",
    "gradient",
    "gradient_descent",
    "gradient_flow",
    "hessian_action",
    "is_stabilizer",
    "mean_square_decay",
    "riccati_policy_iteration",
    "solve_dual",
    "solve_primal",
    "value_matrix",
]
