"""Monte Carlo validation of the analytic machinery.

Simulates dX = (A+BK) X dt + (C+DK) X dB by Euler-Maruyama (scalar Brownian
driver), estimates the quadratic cost by truncated-horizon left-endpoint
quadrature, and samples the mean-square decay curve t -> E ||X(t)||^2.

Randomness contract: every normal variate is a deterministic function of
(seed, step index, path index), realized through Philox counters, so path
count, chunking, or parallel scheduling cannot change results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, Overflow
from .linalg import as_matrix
from .slq import CostWeights, Gain, SystemModel

PATH_MAGNITUDE_GUARD = 1e12


@dataclass(frozen=True)
class SimConfig:
    horizon: float = 20.0
    dt: float = 1e-3
    paths: int = 10_000
    seed: int = 0
    initial_state: np.ndarray | None = None  # fixed vector; default Sigma0-Gaussian

    def __post_init__(self):
        if self.dt <= 0:
            raise InvalidInput("dt must be positive")
        if self.horizon < 10 * self.dt:
            raise InvalidInput("horizon must be at least 10 * dt")
        if self.paths < 1:
            raise InvalidInput("paths must be >= 1")


@dataclass(frozen=True)
class SimEstimate:
    cost_mean: float
    cost_stderr: float
    terminal_second_moment: float
    paths_used: int
    tail_bound: float = 0.0  # truncation-tail diagnostic, not subtracted


def _step_normals(seed: int, step: int, paths: int) -> np.ndarray:
    """Standard normals for one Euler step, keyed by (seed, step, path)."""
    bit = np.random.Philox(key=seed, counter=[0, 0, 0, step])
    return np.random.Generator(bit).standard_normal(paths)


def _initial_states(model: SystemModel, cfg: SimConfig) -> np.ndarray:
    if cfg.initial_state is not None:
        x0 = np.asarray(cfg.initial_state, dtype=float).reshape(model.n)
        return np.tile(x0, (cfg.paths, 1))
    # zero-mean Gaussian with second moment Sigma0 (step index -1 stream)
    chol = np.linalg.cholesky(model.sigma0)
    bit = np.random.Philox(key=cfg.seed, counter=[0, 0, 1, 0])
    z = np.random.Generator(bit).standard_normal((cfg.paths, model.n))
    return z @ chol.T


def _simulate(model: SystemModel, a_cl, c_cl, cfg: SimConfig, lam=None,
              sample_times=None):
    """Shared Euler-Maruyama driver.

    Accumulates per-path quadrature of x^T lam x when lam is given; records
    mean ||X(t)||^2 at sample_times when given.
    """
    steps = int(round(cfg.horizon / cfg.dt))
    x = _initial_states(model, cfg)
    sqrt_dt = np.sqrt(cfg.dt)
    costs = np.zeros(cfg.paths)
    curve = []
    sample_steps = set()
    if sample_times is not None:
        sample_steps = {int(round(t / cfg.dt)) for t in sample_times}
        if 0 in sample_steps:
            curve.append((0.0, float(np.mean(np.sum(x * x, axis=1)))))
    for i in range(steps):
        if lam is not None:
            costs += np.einsum("pi,ij,pj->p", x, lam, x) * cfg.dt
        dw = _step_normals(cfg.seed, i, cfg.paths) * sqrt_dt
        x = x + (x @ a_cl.T) * cfg.dt + (x @ c_cl.T) * dw[:, None]
        if np.abs(x).max() > PATH_MAGNITUDE_GUARD:
            raise Overflow(
                f"path magnitude exceeded {PATH_MAGNITUDE_GUARD:g} at t = {(i + 1) * cfg.dt:g}"
            )
        if (i + 1) in sample_steps:
            curve.append(((i + 1) * cfg.dt, float(np.mean(np.sum(x * x, axis=1)))))
    return x, costs, curve


def estimate_cost(
    model: SystemModel, weights: CostWeights, gain: Gain, cfg: SimConfig
) -> SimEstimate:
    """Monte Carlo estimate of J(K) on a truncated horizon."""
    k = as_matrix(gain.k, "k")
    a_cl = model.a + model.b @ k
    c_cl = model.c + model.d @ k
    lam = weights.q + k.T @ weights.r @ k
    x, costs, _ = _simulate(model, a_cl, c_cl, cfg, lam=lam)
    terminal = float(np.mean(np.sum(x * x, axis=1)))
    lam_norm = float(np.linalg.norm(lam, 2))
    return SimEstimate(
        cost_mean=float(np.mean(costs)),
        cost_stderr=float(np.std(costs, ddof=1) / np.sqrt(cfg.paths)) if cfg.paths > 1 else 0.0,
        terminal_second_moment=terminal,
        paths_used=cfg.paths,
        tail_bound=terminal * lam_norm,
    )


def mean_square_decay(
    model: SystemModel, gain: Gain, cfg: SimConfig, samples: int = 20
) -> list[tuple[float, float]]:
    """Empirical t -> E ||X(t)||^2 curve on an evenly spaced time grid."""
    k = as_matrix(gain.k, "k")
    a_cl = model.a + model.b @ k
    c_cl = model.c + model.d @ k
    times = np.linspace(0.0, cfg.horizon, samples + 1)
    _, _, curve = _simulate(model, a_cl, c_cl, cfg, sample_times=times)
    return curve
