"""Generalized (stochastic) Lyapunov equations for a closed loop.

For a loop (A_cl, C_cl) the primal equation is

    A_cl^T P + P A_cl + C_cl^T P C_cl + Lambda = 0

and the dual (Gramian) equation is

    A_cl Y + Y A_cl^T + C_cl Y C_cl^T + V = 0.

A gain K is mean-square stabilizing iff the primal equation with a
positive-definite right-hand side has a unique positive-definite solution;
`is_stabilizer` tests exactly that with Lambda = I.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidInput, SingularOperator
from .linalg import as_matrix, as_symmetric, kron_vec_solve


@dataclass(frozen=True)
class ClosedLoop:
    """Closed-loop drift A + BK and diffusion C + DK."""

    a_cl: np.ndarray
    c_cl: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a_cl, "a_cl")
        c = as_matrix(self.c_cl, "c_cl")
        if a.shape[0] != a.shape[1] or a.shape != c.shape:
            raise InvalidInput("ClosedLoop: a_cl, c_cl must be square and equal order")
        object.__setattr__(self, "a_cl", a)
        object.__setattr__(self, "c_cl", c)

    @property
    def order(self) -> int:
        return self.a_cl.shape[0]


@dataclass(frozen=True)
class StabilizerCheck:
    """Outcome of the mean-square stabilizer test."""

    stabilizing: bool
    marginal: bool = False
    certificate: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.stabilizing


def solve_primal(loop: ClosedLoop, lam) -> np.ndarray:
    """Solve A_cl^T P + P A_cl + C_cl^T P C_cl + Lambda = 0."""
    lam = as_symmetric(lam, "lambda")
    if lam.shape[0] != loop.order:
        raise InvalidInput("solve_primal: lambda order mismatch")
    return kron_vec_solve(loop.a_cl, loop.c_cl, lam)


def solve_dual(loop: ClosedLoop, v) -> np.ndarray:
    """Solve A_cl Y + Y A_cl^T + C_cl Y C_cl^T + V = 0."""
    v = as_symmetric(v, "v")
    if v.shape[0] != loop.order:
        raise InvalidInput("solve_dual: v order mismatch")
    return kron_vec_solve(loop.a_cl.T, loop.c_cl.T, v)


def closed_loop(a, b, c, d, k) -> ClosedLoop:
    a = as_matrix(a, "a")
    k = as_matrix(k, "k")
    return ClosedLoop(a_cl=a + as_matrix(b, "b") @ k, c_cl=as_matrix(c, "c") + as_matrix(d, "d") @ k)


def is_stabilizer(model, k, tol: float = 1e-9) -> StabilizerCheck:
    """Mean-square stabilizer test via the primal Lyapunov equation.

    Solves the primal equation with Lambda = I; K is stabilizing iff the
    solve succeeds and the solution is positive definite.  Solutions whose
    minimal eigenvalue sits within +/- tol of the scaled boundary are
    reported non-stabilizing with marginal=True: the downstream convergence
    theory needs strict stabilizers.
    """
    loop = closed_loop(model.a, model.b, model.c, model.d, k)
    try:
        p = solve_primal(loop, np.eye(loop.order))
    except SingularOperator:
        return StabilizerCheck(stabilizing=False)
    scale = tol * (1.0 + np.abs(p).max())
    lo = linalg.min_eig(p)
    if lo > scale:
        return StabilizerCheck(stabilizing=True, certificate=p)
    return StabilizerCheck(stabilizing=False, marginal=abs(lo) <= scale)
