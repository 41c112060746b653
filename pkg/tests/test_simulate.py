import numpy as np
import pytest

from slqpg import (
    CostWeights,
    Gain,
    InvalidInput,
    Overflow,
    SimConfig,
    SystemModel,
    estimate_cost,
    mean_square_decay,
)
from slqpg.simulate import _simulate, _step_normals


@pytest.fixture(scope="module")
def scalar_gain(scalar_problem):
    model, weights = scalar_problem
    return model, weights, Gain.verify(model, [[0.0]])


class TestConfigValidation:
    def test_dt_positive(self):
        with pytest.raises(InvalidInput):
            SimConfig(dt=0.0)

    def test_horizon_covers_steps(self):
        with pytest.raises(InvalidInput):
            SimConfig(horizon=1e-3, dt=1e-3)

    def test_paths_positive(self):
        with pytest.raises(InvalidInput):
            SimConfig(paths=0)


class TestReproducibility:
    def test_bit_identical_reruns(self, scalar_gain):
        model, weights, gain = scalar_gain
        cfg = SimConfig(horizon=1.0, dt=1e-2, paths=256, seed=5)
        est1 = estimate_cost(model, weights, gain, cfg)
        est2 = estimate_cost(model, weights, gain, cfg)
        assert est1 == est2

    def test_seed_changes_estimate(self, scalar_gain):
        model, weights, gain = scalar_gain
        est1 = estimate_cost(model, weights, gain, SimConfig(horizon=1.0, dt=1e-2, paths=256, seed=5))
        est2 = estimate_cost(model, weights, gain, SimConfig(horizon=1.0, dt=1e-2, paths=256, seed=6))
        assert est1.cost_mean != est2.cost_mean

    def test_weight_scaling_is_bit_exact(self, scalar_gain):
        # same seed means the same paths; doubling (Q, R) doubles every
        # per-path quadrature exactly in binary floating point
        model, weights, gain = scalar_gain
        doubled = CostWeights(q=2 * weights.q, r=2 * weights.r)
        cfg = SimConfig(horizon=1.0, dt=1e-2, paths=256, seed=7)
        est1 = estimate_cost(model, weights, gain, cfg)
        est2 = estimate_cost(model, doubled, gain, cfg)
        assert est2.cost_mean == 2 * est1.cost_mean

    def test_shared_paths_prefix_under_path_count_change(self, scalar_gain):
        # path p at step i sees the same normal regardless of the total
        # number of paths, so the first rows of a bigger run coincide
        model, _, _ = scalar_gain
        a_cl = np.array([[-1.0]])
        c_cl = np.array([[0.3]])
        small = SimConfig(horizon=0.5, dt=1e-2, paths=50, seed=9)
        big = SimConfig(horizon=0.5, dt=1e-2, paths=80, seed=9)
        x_small, _, _ = _simulate(model, a_cl, c_cl, small)
        x_big, _, _ = _simulate(model, a_cl, c_cl, big)
        assert np.array_equal(x_small, x_big[:50])

    def test_step_normals_are_counter_keyed(self):
        a = _step_normals(3, 17, 64)
        b = _step_normals(3, 17, 64)
        c = _step_normals(3, 18, 64)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestCostEstimate:
    def test_scalar_matches_analytic_cost(self, scalar_gain):
        # J(0) = 0.5 exactly; allow 3 standard errors plus the Euler and
        # truncation biases
        model, weights, gain = scalar_gain
        cfg = SimConfig(horizon=10.0, dt=2e-3, paths=4000, seed=11)
        est = estimate_cost(model, weights, gain, cfg)
        assert abs(est.cost_mean - 0.5) <= 3 * est.cost_stderr + 0.02
        assert est.paths_used == 4000

    def test_deterministic_quadrature_error_shrinks_with_dt(self, scalar_gain):
        # with no diffusion the driver reduces to a left-endpoint rule whose
        # error against the analytic integral must fall as dt is refined
        model, weights, gain = scalar_gain
        horizon = 4.0
        exact = (1 - np.exp(-2 * horizon)) / 2
        errs = []
        for dt in (4e-2, 2e-2, 1e-2):
            cfg = SimConfig(horizon=horizon, dt=dt, paths=1, seed=0,
                            initial_state=[1.0])
            est = estimate_cost(model, weights, gain, cfg)
            errs.append(abs(est.cost_mean - exact))
        assert errs[0] > errs[1] > errs[2]

    def test_terminal_moment_decreases_with_horizon(self, scalar_gain):
        model, weights, gain = scalar_gain
        moments = []
        for horizon in (2.0, 4.0, 8.0):
            cfg = SimConfig(horizon=horizon, dt=1e-2, paths=512, seed=13)
            moments.append(estimate_cost(model, weights, gain, cfg).terminal_second_moment)
        assert moments[0] > moments[1] > moments[2]

    def test_overflow_guard_on_unstable_loop(self):
        model = SystemModel(a=[[1.0]], b=[[1.0]], c=[[0.0]], d=[[0.0]], sigma0=[[1.0]])
        weights = CostWeights(q=[[1.0]], r=[[1.0]])
        cfg = SimConfig(horizon=40.0, dt=1e-2, paths=8, seed=1, initial_state=[1.0])
        with pytest.raises(Overflow):
            estimate_cost(model, weights, Gain(k=[[0.0]], verified=True), cfg)


class TestMeanSquareDecay:
    def test_scalar_noise_free_matches_exponential(self, scalar_gain):
        # c_cl = 0 makes each path deterministic: E||X(t)||^2 = e^{-2t}
        model, _, gain = scalar_gain
        cfg = SimConfig(horizon=2.0, dt=1e-3, paths=4, seed=0, initial_state=[1.0])
        curve = mean_square_decay(model, gain, cfg, samples=8)
        assert len(curve) == 9
        for t, m in curve:
            assert m == pytest.approx(np.exp(-2 * t), rel=5e-3)

    def test_curve_times_match_grid(self, scalar_gain):
        model, _, gain = scalar_gain
        cfg = SimConfig(horizon=1.0, dt=1e-2, paths=16, seed=2)
        curve = mean_square_decay(model, gain, cfg, samples=4)
        assert [t for t, _ in curve] == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])

    def test_benchmark_decay_at_stabilizing_gain(self, benchmark):
        model, _, k0 = benchmark
        cfg = SimConfig(horizon=20.0, dt=1e-3, paths=512, seed=3)
        curve = mean_square_decay(model, k0, cfg, samples=10)
        assert curve[-1][1] < 0.05 * curve[0][1]

    def test_growth_at_nonstabilizing_gain(self, nonconvexity_witness):
        model, k1, k2 = nonconvexity_witness
        mid = Gain(k=0.5 * (k1 + k2), verified=True)
        cfg = SimConfig(horizon=1.0, dt=1e-3, paths=256, seed=4)
        curve = mean_square_decay(model, mid, cfg, samples=10)
        assert curve[-1][1] > 10 * curve[0][1]
