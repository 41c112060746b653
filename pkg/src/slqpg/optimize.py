"""Gradient methods on the gain space.

Two solvers:

* ``gradient_descent`` -- K_{n+1} = K_n - alpha_n grad J(K_n) with a fixed
  step, the 2/L safeguard step, or the Barzilai-Borwein step, plus the
  shrink-on-increase backtracking rule (alpha <- gamma * alpha whenever the
  candidate fails to decrease the cost or to stabilize).
* ``gradient_flow`` -- the matrix ODE dK/dt = -grad J(K) integrated by an
  embedded Dormand-Prince 4(5) pair with descent-enforcing step rejection.

``check_certificates`` re-validates a finished run against the convergence
certificates (monotone cost, per-step decrease when alpha <= 2/L, the PL
inequality when the optimal cost is known, and the sublevel gain bound).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NotStabilizing, StepCollapse
from .lyapunov import is_stabilizer
from .slq import (
    ConvergenceConstants,
    CostWeights,
    Gain,
    Solution,
    SystemModel,
    gradient,
)

STEP_FLOOR = 1e-16

# Dormand-Prince 4(5) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


@dataclass(frozen=True)
class OptimizerConfig:
    step_mode: str = "barzilai_borwein"  # "fixed", "two_over_L", "barzilai_borwein"
    alpha: float | None = None  # required for step_mode="fixed"
    gamma: float = 0.5
    tol: float = 1e-3
    max_iter: int = 500
    alpha0: float | None = None  # BB seed; default min(1/L, 1e-2) or 1e-3
    alpha_max: float = 1e3
    l_smooth: float | None = None  # needed for "two_over_L" and the BB seed

    def __post_init__(self):
        if self.step_mode not in ("fixed", "two_over_L", "barzilai_borwein"):
            raise InvalidInput(f"unknown step_mode {self.step_mode!r}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidInput("gamma must lie in (0, 1)")
        if self.tol <= 0:
            raise InvalidInput("tol must be positive")
        if self.step_mode == "fixed" and (self.alpha is None or self.alpha <= 0):
            raise InvalidInput("fixed step mode needs alpha > 0")
        if self.step_mode == "two_over_L" and not self.l_smooth:
            raise InvalidInput("two_over_L step mode needs l_smooth")
        if self.alpha0 is not None and self.alpha0 <= 0:
            raise InvalidInput("alpha0 must be positive")
        if self.alpha0 is not None and self.alpha_max < self.alpha0:
            raise InvalidInput("alpha_max must be >= alpha0")


@dataclass(frozen=True)
class FlowConfig:
    t_end: float = 100.0
    h0: float = 1e-3
    rtol: float = 1e-6
    record_every: float = 1.0

    def __post_init__(self):
        if min(self.t_end, self.h0, self.rtol, self.record_every) <= 0:
            raise InvalidInput("FlowConfig fields must be positive")


@dataclass(frozen=True)
class IterateRecord:
    iter: int
    gain: np.ndarray
    cost: float
    grad_norm: float
    step: float
    rel_error: float | None = None
    time: float | None = None  # set by the flow solver


@dataclass(frozen=True)
class DescentReport:
    trace: list[IterateRecord]
    final: Solution
    converged: bool
    certificate_violations: list[str] = field(default_factory=list)


def _rel_error(cost_n: float, cost0: float, oracle_cost: float | None) -> float | None:
    if oracle_cost is None:
        return None
    denom = cost0 - oracle_cost
    if denom <= 0:
        return 0.0
    return (cost_n - oracle_cost) / denom


def gradient_descent(
    model: SystemModel,
    weights: CostWeights,
    k0: Gain,
    cfg: OptimizerConfig,
    oracle_cost: float | None = None,
) -> DescentReport:
    """Run gradient descent until the gradient norm drops below cfg.tol.

    Candidate iterates must both stabilize the loop and strictly decrease
    the cost; otherwise the step is shrunk by cfg.gamma and retried.  Raises
    StepCollapse if the step falls below STEP_FLOOR without progress.
    """
    k0_gain = Gain.verify(model, k0.k) if not k0.verified else k0
    bundle = gradient(model, weights, k0_gain)
    cost0 = bundle.cost
    k = k0_gain.k

    if cfg.step_mode == "fixed":
        alpha = cfg.alpha
    elif cfg.step_mode == "two_over_L":
        alpha = 2.0 / cfg.l_smooth
    elif cfg.alpha0 is not None:
        alpha = cfg.alpha0
    elif cfg.l_smooth:
        alpha = min(1.0 / cfg.l_smooth, 1e-2)
    else:
        alpha = 1e-3

    trace: list[IterateRecord] = []
    k_prev = None
    grad_prev = None
    converged = False
    n = 0
    while True:
        grad_norm = float(np.linalg.norm(bundle.grad, "fro"))
        trace.append(
            IterateRecord(
                iter=n,
                gain=k.copy(),
                cost=bundle.cost,
                grad_norm=grad_norm,
                step=alpha,
                rel_error=_rel_error(bundle.cost, cost0, oracle_cost),
            )
        )
        if grad_norm <= cfg.tol:
            converged = True
            break
        if n >= cfg.max_iter:
            break

        if cfg.step_mode == "fixed":
            alpha = cfg.alpha
        elif cfg.step_mode == "two_over_L":
            alpha = 2.0 / cfg.l_smooth
        elif k_prev is not None:
            s = (k - k_prev).ravel()
            y = (bundle.grad - grad_prev).ravel()
            sy = float(s @ y)
            if sy > 0:
                bb = float(s @ s) / sy
                if bb <= cfg.alpha_max:
                    alpha = bb
                # else: keep the previous accepted step

        step = alpha
        while True:
            k_cand = k - step * bundle.grad
            if is_stabilizer(model, k_cand):
                cand = gradient(model, weights, Gain(k=k_cand, verified=True))
                if cand.cost < bundle.cost:
                    break
            step *= cfg.gamma
            if step < STEP_FLOOR:
                raise StepCollapse(
                    f"backtracking collapsed below {STEP_FLOOR:g} at iteration {n}"
                )

        k_prev, grad_prev = k, bundle.grad
        k, bundle, alpha = k_cand, cand, step
        n += 1

    final_gain = Gain(k=k, verified=True)
    final = Solution(
        k_star=final_gain,
        p_star=bundle.p,
        cost_star=bundle.cost,
        grad_norm=trace[-1].grad_norm,
    )
    return DescentReport(trace=trace, final=final, converged=converged)


def _dp_step(f, k, fk, h):
    """One Dormand-Prince step; returns (k5, error_estimate, f_new)."""
    stages = [fk]
    for i in range(1, 7):
        acc = np.zeros_like(k)
        for a, s in zip(_DP_A[i], stages):
            acc += a * s
        stages.append(f(k + h * acc))
    k5 = k + h * sum(b * s for b, s in zip(_DP_B5, stages))
    k4 = k + h * sum(b * s for b, s in zip(_DP_B4, stages))
    err = float(np.linalg.norm(k5 - k4, "fro"))
    return k5, err, stages[6]  # FSAL: stage 7 is f at k5


def gradient_flow(
    model: SystemModel,
    weights: CostWeights,
    k0: Gain,
    cfg: FlowConfig,
    oracle_cost: float | None = None,
) -> DescentReport:
    """Integrate dK/dt = -grad J(K) to t_end with adaptive steps.

    A step is accepted only when its embedded error estimate meets cfg.rtol
    *and* the new gain stabilizes the loop with non-increasing cost; rejected
    steps are halved.  The trace is sampled every cfg.record_every time units
    (plus the initial and final points).
    """
    k0_gain = Gain.verify(model, k0.k) if not k0.verified else k0

    def rhs(k_mat):
        if not is_stabilizer(model, k_mat):
            raise NotStabilizing("flow left the stabilizer set")
        return -gradient(model, weights, Gain(k=k_mat, verified=True)).grad

    bundle = gradient(model, weights, k0_gain)
    cost0 = bundle.cost
    k = k0_gain.k
    t = 0.0
    h = cfg.h0
    fk = -bundle.grad
    next_record = 0.0
    trace: list[IterateRecord] = []

    def record(t, k, bundle, h):
        trace.append(
            IterateRecord(
                iter=len(trace),
                gain=k.copy(),
                cost=bundle.cost,
                grad_norm=float(np.linalg.norm(bundle.grad, "fro")),
                step=h,
                rel_error=_rel_error(bundle.cost, cost0, oracle_cost),
                time=t,
            )
        )

    record(t, k, bundle, h)
    next_record = cfg.record_every

    # The flow is an autonomous descent ODE: once the state is an equilibrium
    # to working precision (gradient at rounding level, or a run of accepted
    # steps with no representable cost decrease), it stays put, so the
    # remaining horizon is covered by propagating the state unchanged.
    stationary_tol = 1e-10
    stall_limit = 10
    stalled = 0

    while t < cfg.t_end:
        if np.linalg.norm(bundle.grad, "fro") <= stationary_tol or stalled >= stall_limit:
            t = cfg.t_end
            record(t, k, bundle, h)
            break
        h = min(h, cfg.t_end - t)
        try:
            k_new, err, f_new = _dp_step(rhs, k, fk, h)
            scale = cfg.rtol * (1.0 + np.linalg.norm(k, "fro"))
            ok = err <= scale and is_stabilizer(model, k_new)
            if ok:
                cand = gradient(model, weights, Gain(k=k_new, verified=True))
                # monotone descent up to a rounding cushion
                ok = cand.cost <= bundle.cost + 1e-12 * (1.0 + abs(bundle.cost))
        except NotStabilizing:
            ok = False
        if not ok:
            h *= 0.5
            if h < STEP_FLOOR:
                raise StepCollapse("flow step collapsed near the stability boundary")
            continue

        t += h
        meaningful = 1e-12 * (1.0 + abs(bundle.cost))
        stalled = 0 if cand.cost < bundle.cost - meaningful else stalled + 1
        k, bundle = k_new, cand
        fk = -bundle.grad
        if t >= next_record or t >= cfg.t_end:
            record(t, k, bundle, h)
            next_record += cfg.record_every
        # standard PI-free step growth with a cap
        if err > 0:
            h = min(h * min(5.0, 0.9 * (scale / err) ** 0.2), cfg.t_end)
        else:
            h = min(h * 5.0, cfg.t_end)

    final_gain = Gain(k=k, verified=True)
    final = Solution(
        k_star=final_gain,
        p_star=bundle.p,
        cost_star=bundle.cost,
        grad_norm=float(np.linalg.norm(bundle.grad, "fro")),
    )
    return DescentReport(trace=trace, final=final, converged=True)


def check_certificates(
    report: DescentReport,
    consts: ConvergenceConstants,
    oracle_cost: float | None = None,
) -> list[str]:
    """Check per-iterate convergence certificates; returns named violations."""
    violations: list[str] = []
    trace = report.trace
    slack = 1e-9  # absolute rounding cushion on cost comparisons

    for prev, cur in zip(trace, trace[1:]):
        scale = slack * (1.0 + abs(prev.cost))
        if cur.cost > prev.cost + scale:
            violations.append(f"monotonicity: cost rose at iterate {cur.iter}")
        if cur.time is None and cur.step <= 2.0 / consts.l_smooth:
            # per-step decrease guaranteed for alpha <= 2/L
            bound = prev.cost - cur.step * (1 - consts.l_smooth * cur.step / 2) * prev.grad_norm**2
            if cur.cost > bound + scale:
                violations.append(f"descent-lemma decrease failed at iterate {cur.iter}")

    for rec in trace:
        if oracle_cost is not None:
            gap = rec.cost - oracle_cost
            if gap > consts.mu_pl * rec.grad_norm**2 + slack * (1.0 + abs(rec.cost)):
                violations.append(f"gradient-domination failed at iterate {rec.iter}")
        if float(np.linalg.norm(rec.gain, "fro")) > consts.gain_bound:
            violations.append(f"gain bound exceeded at iterate {rec.iter}")

    return violations
