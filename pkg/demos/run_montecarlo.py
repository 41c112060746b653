"""Monte Carlo validation of the analytic cost on the bundled benchmark.

Simulates the closed loop at the oracle-optimal gain by Euler-Maruyama,
compares the sampled cost against Tr(P_K Sigma_0), and prints the empirical
mean-square decay curve t -> E ||X(t)||^2.
"""

from slqpg import (
    Gain,
    SimConfig,
    cost,
    estimate_cost,
    mean_square_decay,
    riccati_policy_iteration,
)
from slqpg.cli import bundled_benchmark


def main():
    doc = bundled_benchmark()
    model, weights = doc.model(), doc.weights()
    k0 = Gain.verify(model, doc.k0)
    oracle = riccati_policy_iteration(model, weights, k0)

    analytic = cost(model, weights, oracle.k_star)
    cfg = SimConfig(horizon=20.0, dt=1e-3, paths=5000, seed=7)
    est = estimate_cost(model, weights, oracle.k_star, cfg)

    print(f"analytic cost J(K*)     = {analytic:.6f}")
    print(f"Monte Carlo estimate    = {est.cost_mean:.6f} +/- {est.cost_stderr:.4f}")
    print(f"relative gap            = {abs(est.cost_mean - analytic) / analytic:.2%}")
    print(f"terminal second moment  = {est.terminal_second_moment:.3e}")
    print()

    decay_cfg = SimConfig(horizon=20.0, dt=1e-3, paths=2000, seed=7)
    curve = mean_square_decay(model, oracle.k_star, decay_cfg, samples=10)
    print(f"{'t':>6} {'E||X(t)||^2':>14}")
    for t, m in curve:
        print(f"{t:>6.1f} {m:>14.6e}")
    print()
    print(f"final/initial ratio = {curve[-1][1] / curve[0][1]:.2e}")


if __name__ == "__main__":
    main()
