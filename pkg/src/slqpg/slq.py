"""Stochastic linear-quadratic problem: cost, gradient, Hessian, constants.

The controlled SDE is

    dX = (A X + B u) dt + (C X + D u) dB,    u = K X,

with expected cost J(K) = E int_0^inf X^T (Q + K^T R K) X dt = Tr(P_K Sigma0),
where P_K solves the primal Lyapunov equation of the closed loop.  The exact
gradient is 2 M Y_K with M = R K + B^T P_K + D^T P_K (C + D K) and Y_K the
dual Gramian driven by Sigma0.  Smoothness (L) and gradient-domination (mu)
constants for the sublevel set anchored at K0 are evaluated from their
closed-form expressions in model data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInput,
    MaxIterExceeded,
    NotStabilizing,
    SingularOperator,
    UnsupportedModel,
)
from .linalg import (
    as_matrix,
    as_symmetric,
    is_positive_definite,
    min_eig,
    max_eig,
)
from .lyapunov import ClosedLoop, closed_loop, is_stabilizer, solve_dual, solve_primal


@dataclass(frozen=True)
class SystemModel:
    """Constant matrices of the controlled SDE plus initial second moment."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    sigma0: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a, "a")
        n = a.shape[0]
        if a.shape != (n, n):
            raise InvalidInput("a must be square")
        b = as_matrix(self.b, "b")
        if b.shape[0] != n:
            raise InvalidInput("b row count must match a")
        m = b.shape[1]
        c = as_matrix(self.c, "c")
        d = as_matrix(self.d, "d")
        if c.shape != (n, n):
            raise InvalidInput("c must be n x n")
        if d.shape != (n, m):
            raise InvalidInput("d must be n x m")
        s0 = as_symmetric(self.sigma0, "sigma0")
        if s0.shape != (n, n):
            raise InvalidInput("sigma0 must be n x n")
        if not is_positive_definite(s0):
            raise InvalidInput("sigma0 must be positive definite")
        for name, v in (("a", a), ("b", b), ("c", c), ("d", d), ("sigma0", s0)):
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]


@dataclass(frozen=True)
class CostWeights:
    """Positive-definite running-cost weights."""

    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        q = as_symmetric(self.q, "q")
        r = as_symmetric(self.r, "r")
        if not is_positive_definite(q):
            raise InvalidInput("q must be positive definite")
        if not is_positive_definite(r):
            raise InvalidInput("r must be positive definite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class Gain:
    """Feedback matrix with its stabilizer status."""

    k: np.ndarray
    verified: bool = False

    def __post_init__(self):
        object.__setattr__(self, "k", as_matrix(self.k, "k"))

    @classmethod
    def verify(cls, model: SystemModel, k, tol: float = 1e-9) -> "Gain":
        """Construct a verified gain; raises NotStabilizing on failure."""
        k = as_matrix(k, "k")
        if k.shape != (model.m, model.n):
            raise InvalidInput(f"k must be {model.m} x {model.n}")
        check = is_stabilizer(model, k, tol)
        if not check:
            extra = " (marginal)" if check.marginal else ""
            raise NotStabilizing(f"gain is not mean-square stabilizing{extra}")
        return cls(k=k, verified=True)


@dataclass(frozen=True)
class GradientBundle:
    """Cost, Lyapunov certificates and exact gradient at a gain."""

    cost: float
    p: np.ndarray
    y: np.ndarray
    m_core: np.ndarray
    grad: np.ndarray


@dataclass(frozen=True)
class ConvergenceConstants:
    """Smoothness / gradient-domination constants anchored at K0."""

    l_smooth: float
    xi: float
    mu_tilde: float
    mu_pl: float
    gain_bound: float
    anchor_cost: float


@dataclass(frozen=True)
class Solution:
    """Optimal gain with its value matrix and stationarity residual."""

    k_star: Gain
    p_star: np.ndarray
    cost_star: float
    grad_norm: float


def loop_of(model: SystemModel, k) -> ClosedLoop:
    return closed_loop(model.a, model.b, model.c, model.d, k)


def _require_stabilizing(model: SystemModel, gain: Gain) -> np.ndarray:
    k = as_matrix(gain.k, "k")
    if not gain.verified and not is_stabilizer(model, k):
        raise NotStabilizing("gain is not mean-square stabilizing")
    return k


def value_matrix(model: SystemModel, weights: CostWeights, gain: Gain) -> np.ndarray:
    """P_K, the primal Lyapunov solution with Lambda = Q + K^T R K."""
    k = _require_stabilizing(model, gain)
    lam = weights.q + k.T @ weights.r @ k
    try:
        p = solve_primal(loop_of(model, k), lam)
    except SingularOperator as exc:
        raise NotStabilizing(str(exc)) from exc
    if not is_positive_definite(p):
        raise NotStabilizing("value matrix is not positive definite")
    return p


def cost(model: SystemModel, weights: CostWeights, gain: Gain) -> float:
    """J(K) = Tr(P_K Sigma0)."""
    return float(np.trace(value_matrix(model, weights, gain) @ model.sigma0))


def gradient(model: SystemModel, weights: CostWeights, gain: Gain) -> GradientBundle:
    """Exact cost, value matrix, Gramian and gradient 2 M Y_K."""
    k = _require_stabilizing(model, gain)
    loop = loop_of(model, k)
    lam = weights.q + k.T @ weights.r @ k
    try:
        p = solve_primal(loop, lam)
        y = solve_dual(loop, model.sigma0)
    except SingularOperator as exc:
        raise NotStabilizing(str(exc)) from exc
    m_core = weights.r @ k + model.b.T @ p + model.d.T @ p @ loop.c_cl
    return GradientBundle(
        cost=float(np.trace(p @ model.sigma0)),
        p=p,
        y=y,
        m_core=m_core,
        grad=2.0 * m_core @ y,
    )


def hessian_action(model: SystemModel, weights: CostWeights, gain: Gain, e) -> float:
    """Second directional derivative of J at K along E (Pearlmutter-style).

    Uses one extra primal solve with right-hand side M^T E + E^T M instead of
    forming the full Hessian tensor.
    """
    e = as_matrix(e, "e")
    if e.shape != (model.m, model.n):
        raise InvalidInput(f"e must be {model.m} x {model.n}")
    bundle = gradient(model, weights, gain)
    loop = loop_of(model, gain.k)
    rhs = bundle.m_core.T @ e + e.T @ bundle.m_core
    try:
        p_dir = solve_primal(loop, rhs)
    except SingularOperator as exc:
        raise NotStabilizing(str(exc)) from exc
    term1 = np.sum(((weights.r + model.d.T @ bundle.p @ model.d) @ e @ bundle.y) * e)
    term2 = np.sum(((model.b.T @ p_dir + model.d.T @ p_dir @ loop.c_cl) @ bundle.y) * e)
    return float(2.0 * term1 + 4.0 * term2)


def constants(model: SystemModel, weights: CostWeights, k0: Gain) -> ConvergenceConstants:
    """Closed-form smoothness and gradient-domination constants at anchor K0."""
    j0 = cost(model, weights, k0)
    norm_b = float(np.linalg.norm(model.b, 2))
    if norm_b == 0.0:
        raise UnsupportedModel("constants undefined for ||B|| = 0")
    norm_a = float(np.linalg.norm(model.a, 2))
    norm_c = float(np.linalg.norm(model.c, 2))
    norm_d = float(np.linalg.norm(model.d, 2))
    fro_c = float(np.linalg.norm(model.c, "fro"))
    fro_d = float(np.linalg.norm(model.d, "fro"))
    lq = min_eig(weights.q)
    lr = min_eig(weights.r)
    lr_max = max_eig(weights.r)
    ls = min_eig(model.sigma0)

    mu_tilde = (
        norm_b
        + norm_d * fro_c
        + 2.0 * norm_b * j0 * norm_d**2 / (ls * lr)
        + norm_a * norm_d**2 / norm_b
    )
    t = mu_tilde * j0 / (ls * lq)
    xi = np.sqrt(model.n) * j0 / ls * (t + np.sqrt(t**2 + lr_max / lq))
    l_smooth = (
        2.0
        * j0
        / lq
        * (
            lr_max
            + j0 * norm_d**2 / ls
            + (
                norm_b
                + norm_c * norm_d
                + 2.0 * norm_b * fro_d**2 * j0 / (ls * lr)
                + norm_a * fro_d**2 / norm_b
            )
            * xi
        )
    )
    mu_pl = 4.0 * j0 / (lr * lq * ls**2) * (norm_a + norm_b**2 * j0 / (lr * ls)) ** 2
    gain_bound = 2.0 * norm_b * j0 / (ls * lr) + norm_a / norm_b
    return ConvergenceConstants(
        l_smooth=float(l_smooth),
        xi=float(xi),
        mu_tilde=float(mu_tilde),
        mu_pl=float(mu_pl),
        gain_bound=float(gain_bound),
        anchor_cost=float(j0),
    )


def gain_within_bound(gain: Gain, consts: ConvergenceConstants) -> bool:
    """Frobenius-norm gain bound valid on the anchored sublevel set."""
    return float(np.linalg.norm(gain.k, "fro")) <= consts.gain_bound


def riccati_policy_iteration(
    model: SystemModel,
    weights: CostWeights,
    k0: Gain,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> Solution:
    """Policy iteration on the optimal-gain map; the ground-truth oracle.

    Alternates a primal Lyapunov solve for P_j with the update
    K_{j+1} = -(R + D^T P_j D)^{-1} (B^T P_j + D^T P_j C) until the gain
    change drops below tol.
    """
    k = _require_stabilizing(model, k0)
    for _ in range(max_iter):
        gain = Gain(k=k, verified=True)
        try:
            p = value_matrix(model, weights, gain)
        except NotStabilizing as exc:
            raise NotStabilizing(
                "policy iteration left the stabilizer set (numerical failure): "
                f"{exc}"
            ) from exc
        k_next = -np.linalg.solve(
            weights.r + model.d.T @ p @ model.d,
            model.b.T @ p + model.d.T @ p @ model.c,
        )
        if np.linalg.norm(k_next - k, "fro") <= tol:
            k = k_next
            break
        k = k_next
    else:
        raise MaxIterExceeded("policy iteration did not converge")

    gain = Gain.verify(model, k)
    bundle = gradient(model, weights, gain)
    return Solution(
        k_star=gain,
        p_star=bundle.p,
        cost_star=bundle.cost,
        grad_norm=float(np.linalg.norm(bundle.grad, "fro")),
    )
