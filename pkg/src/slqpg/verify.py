"""Randomized property suites: matrix inequalities, Lyapunov duality,
finite-difference oracles, and sublevel-set sampling.

These checks back the `verify` CLI command and the test suite.  Each checker
returns a list of violation strings (empty means the property held), so a
batch run can report every failure instead of stopping at the first.
"""

from __future__ import annotations

import numpy as np

from .lyapunov import closed_loop, is_stabilizer, solve_dual, solve_primal
from .slq import (
    CostWeights,
    Gain,
    SystemModel,
    cost,
    gradient,
    hessian_action,
)


def random_spd(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n))
    return g @ g.T + n * np.eye(n)


def random_stabilizable_system(
    rng: np.random.Generator,
    n_max: int = 5,
    m_max: int = 3,
    max_tries: int = 100,
) -> tuple[SystemModel, CostWeights, Gain]:
    """Draw a random system together with a verified stabilizing gain.

    The drift is shifted left until the zero gain passes the mean-square
    stabilizer test (rejection sampling), then a small random gain
    perturbation is applied when it stays stabilizing.
    """
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    for _ in range(max_tries):
        a = rng.standard_normal((n, n))
        shift = max(np.linalg.eigvals(a).real.max(), 0.0) + 0.5 + rng.uniform(0, 1)
        a = a - shift * np.eye(n)
        b = rng.standard_normal((n, m))
        c = 0.2 * rng.standard_normal((n, n)) / np.sqrt(n)
        d = 0.2 * rng.standard_normal((n, m)) / np.sqrt(n)
        sigma0 = random_spd(rng, n) / n
        model = SystemModel(a=a, b=b, c=c, d=d, sigma0=sigma0)
        k = np.zeros((m, n))
        if not is_stabilizer(model, k):
            continue
        k_pert = k + 0.1 * rng.standard_normal((m, n))
        if is_stabilizer(model, k_pert):
            k = k_pert
        weights = CostWeights(q=random_spd(rng, n) / n, r=random_spd(rng, m) / m)
        return model, weights, Gain(k=k, verified=True)
    raise RuntimeError("failed to draw a stabilizable system")


def sample_sublevel_gain(
    model: SystemModel,
    weights: CostWeights,
    k_star: np.ndarray,
    level: float,
    rng: np.random.Generator,
    max_tries: int = 50,
) -> Gain:
    """Sample K = K* + s * Delta inside the sublevel set {J <= level}.

    Delta is a normalized Gaussian direction; s is bisected down from a
    random scale until the gain stabilizes and J(K) <= level.
    """
    for _ in range(max_tries):
        delta = rng.standard_normal(k_star.shape)
        delta /= np.linalg.norm(delta, "fro")
        s = rng.uniform(0.1, 2.0) * (1.0 + np.linalg.norm(k_star, "fro"))
        for _ in range(60):
            k = k_star + s * delta
            if is_stabilizer(model, k):
                gain = Gain(k=k, verified=True)
                if cost(model, weights, gain) <= level:
                    return gain
            s *= 0.5
    raise RuntimeError("failed to sample the sublevel set")


def check_matrix_inequalities(rng: np.random.Generator, n_max: int = 6) -> list[str]:
    """Young-type bound and the PSD trace sandwich on random matrices."""
    violations = []
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, n_max + 1))
    x = rng.standard_normal((m, n))
    y = rng.standard_normal((m, n))
    for alpha in (0.5, 1.0, 2.0):
        s = alpha * x.T @ x + y.T @ y / alpha - x.T @ y - y.T @ x
        lo = np.linalg.eigvalsh(0.5 * (s + s.T))[0]
        if lo < -1e-10 * (1.0 + np.abs(s).max()):
            violations.append(f"young inequality failed (alpha={alpha}, min_eig={lo:.2e})")

    xs = random_spd(rng, n)
    ys = random_spd(rng, n)
    w = np.linalg.eigvalsh(xs)
    txy = np.trace(xs @ ys)
    ty = np.trace(ys)
    tol = 1e-10 * (1.0 + abs(txy))
    if not (w[0] * ty - tol <= txy <= w[-1] * ty + tol):
        violations.append("psd trace sandwich failed")
    return violations


def check_lyapunov_properties(
    model: SystemModel, gain: Gain, rng: np.random.Generator
) -> list[str]:
    """Duality, monotonicity, and the minimal-eigenvalue spectral bound."""
    violations = []
    loop = closed_loop(model.a, model.b, model.c, model.d, gain.k)
    n = loop.order
    lam = random_spd(rng, n)
    v = random_spd(rng, n)
    p = solve_primal(loop, lam)
    y = solve_dual(loop, v)
    lhs = np.trace(p @ v)
    rhs = np.trace(y @ lam)
    if abs(lhs - rhs) > 1e-8 * (1.0 + abs(lhs)):
        violations.append(f"duality Tr(PV)=Tr(YL) failed ({lhs:.6e} vs {rhs:.6e})")

    lam2 = lam + random_spd(rng, n)  # lam2 > lam strictly
    p2 = solve_primal(loop, lam2)
    if np.linalg.eigvalsh(p2 - p)[0] <= 0:
        violations.append("monotonicity in the right-hand side failed")

    spectral = np.linalg.eigvalsh(lam + loop.c_cl.T @ p @ loop.c_cl)[0]
    bound = spectral / (2.0 * np.linalg.norm(loop.a_cl, 2))
    if np.linalg.eigvalsh(p)[0] < bound * (1 - 1e-9):
        violations.append("minimal-eigenvalue spectral bound failed")
    return violations


def check_gradient_fd(
    model: SystemModel,
    weights: CostWeights,
    gain: Gain,
    rng: np.random.Generator,
    h: float = 1e-6,
    rtol: float = 1e-4,
) -> list[str]:
    """Directional derivative against a central finite difference."""
    delta = rng.standard_normal((model.m, model.n))
    delta /= np.linalg.norm(delta, "fro")
    bundle = gradient(model, weights, gain)
    exact = float(np.sum(bundle.grad * delta))
    jp = cost(model, weights, Gain(k=gain.k + h * delta, verified=True))
    jm = cost(model, weights, Gain(k=gain.k - h * delta, verified=True))
    fd = (jp - jm) / (2 * h)
    if not np.isclose(exact, fd, rtol=rtol, atol=1e-8 * (1.0 + abs(bundle.cost))):
        return [f"gradient vs finite difference mismatch ({exact:.8e} vs {fd:.8e})"]
    return []


def check_hessian_fd(
    model: SystemModel,
    weights: CostWeights,
    gain: Gain,
    rng: np.random.Generator,
    h: float = 1e-5,
    rtol: float = 1e-3,
) -> list[str]:
    """Hessian action against a central difference of the gradient."""
    e = rng.standard_normal((model.m, model.n))
    e /= np.linalg.norm(e, "fro")
    exact = hessian_action(model, weights, gain, e)
    gp = gradient(model, weights, Gain(k=gain.k + h * e, verified=True)).grad
    gm = gradient(model, weights, Gain(k=gain.k - h * e, verified=True)).grad
    fd = float(np.sum((gp - gm) * e)) / (2 * h)
    if not np.isclose(exact, fd, rtol=rtol, atol=1e-6 * (1.0 + abs(exact))):
        return [f"hessian action vs gradient difference mismatch ({exact:.8e} vs {fd:.8e})"]
    return []


def run_property_suite(seed: int = 0, systems: int = 100) -> list[str]:
    """Full randomized suite over freshly drawn stabilizable systems."""
    rng = np.random.default_rng(seed)
    violations: list[str] = []
    for i in range(systems):
        violations += [f"[{i}] {v}" for v in check_matrix_inequalities(rng)]
        model, weights, gain = random_stabilizable_system(rng)
        violations += [f"[{i}] {v}" for v in check_lyapunov_properties(model, gain, rng)]
        violations += [f"[{i}] {v}" for v in check_gradient_fd(model, weights, gain, rng)]
        violations += [f"[{i}] {v}" for v in check_hessian_fd(model, weights, gain, rng)]
    return violations
