"""Gradient descent on the bundled 2-state benchmark.

Runs Barzilai-Borwein gradient descent from K0 = [-6, 3], compares the
endpoint against the Riccati policy-iteration oracle, and prints the
per-iteration trace (cost, gradient norm, step, relative error).
"""

import numpy as np

from slqpg import (
    Gain,
    OptimizerConfig,
    check_certificates,
    constants,
    gradient_descent,
    riccati_policy_iteration,
)
from slqpg.cli import bundled_benchmark


def main():
    doc = bundled_benchmark()
    model, weights = doc.model(), doc.weights()
    k0 = Gain.verify(model, doc.k0)

    consts = constants(model, weights, k0)
    oracle = riccati_policy_iteration(model, weights, k0)
    print(f"anchor cost J(K0)    = {consts.anchor_cost:.6f}")
    print(f"optimal cost J(K*)   = {oracle.cost_star:.6f}")
    print(f"oracle gain K*       = {np.round(oracle.k_star.k, 4).tolist()}")
    print(f"smoothness L         = {consts.l_smooth:.6g}")
    print(f"gradient domination  = {consts.mu_pl:.6g}")
    print()

    cfg = OptimizerConfig(tol=1e-3, l_smooth=consts.l_smooth)
    report = gradient_descent(model, weights, k0, cfg, oracle_cost=oracle.cost_star)

    print(f"{'iter':>4} {'cost':>14} {'grad norm':>12} {'step':>10} {'rel error':>10}")
    for rec in report.trace:
        print(
            f"{rec.iter:>4} {rec.cost:>14.6f} {rec.grad_norm:>12.4e} "
            f"{rec.step:>10.2e} {rec.rel_error:>10.2e}"
        )

    gap = np.linalg.norm(report.final.k_star.k - oracle.k_star.k, "fro")
    violations = check_certificates(report, consts, oracle_cost=oracle.cost_star)
    print()
    print(f"converged: {report.converged} after {report.trace[-1].iter} iterations")
    print(f"|K_final - K*|_F = {gap:.2e}")
    print(f"certificate violations: {violations or 'none'}")


if __name__ == "__main__":
    main()
