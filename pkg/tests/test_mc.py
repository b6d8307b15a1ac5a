"""Monte-Carlo oracle: chain mechanics, determinism, and unbiasedness."""

import numpy as np
import pytest

from gamegen import random_config
from routegame.mc import BLOCK_SIZE, estimate, simulate_episode
from routegame.model import GameConfig, ProviderPolicy, expected_outcomes


class TestSimulateEpisode:
    def test_immediate_abandonment_is_one_step(self, both_positive_cfg):
        rng = np.random.default_rng(0)
        for _ in range(200):
            ep = simulate_episode(both_positive_cfg, ProviderPolicy(1, 0.5), 1.0, rng)
            assert ep.steps == 1
            assert ep.total_latency == both_positive_cfg.t1
            assert ep.total_cost == both_positive_cfg.c1

    def test_route_two_steps_geometric(self, both_positive_cfg):
        rng = np.random.default_rng(1)
        n = 20_000
        steps = np.array(
            [simulate_episode(both_positive_cfg, ProviderPolicy(2), 0.0, rng).steps for _ in range(n)]
        )
        mean = steps.mean()
        se = steps.std(ddof=1) / np.sqrt(n)
        assert abs(mean - 1.0 / both_positive_cfg.p2) <= 4.0 * se

    def test_patient_user_cost_matches_geometric_mean(self, both_positive_cfg):
        rng = np.random.default_rng(2)
        n = 20_000
        costs = np.array(
            [
                simulate_episode(both_positive_cfg, ProviderPolicy(1, 0.0), 0.0, rng).total_cost
                for _ in range(n)
            ]
        )
        se = costs.std(ddof=1) / np.sqrt(n)
        expected = both_positive_cfg.c1 / both_positive_cfg.p1
        assert abs(costs.mean() - expected) <= 4.0 * se

    def test_step_cap_marks_truncation(self, both_positive_cfg):
        rng = np.random.default_rng(3)
        ep = simulate_episode(both_positive_cfg, ProviderPolicy(1, 0.0), 0.0, rng, max_steps=1)
        assert ep.steps == 1
        assert ep.truncated or ep.succeeded  # either finished in one step or hit the cap


class TestEstimate:
    def test_rejects_tiny_samples(self, both_positive_cfg):
        with pytest.raises(ValueError, match="at least 1000"):
            estimate(both_positive_cfg, ProviderPolicy(1, 0.0), 0.0, n=10, seed=0)

    def test_same_seed_is_bit_identical(self, neg_pos_cfg):
        a = estimate(neg_pos_cfg, ProviderPolicy(1, 0.4), 0.2, n=30_000, seed=99)
        b = estimate(neg_pos_cfg, ProviderPolicy(1, 0.4), 0.2, n=30_000, seed=99)
        assert a == b

    def test_different_seed_differs(self, neg_pos_cfg):
        a = estimate(neg_pos_cfg, ProviderPolicy(1, 0.4), 0.2, n=30_000, seed=99)
        b = estimate(neg_pos_cfg, ProviderPolicy(1, 0.4), 0.2, n=30_000, seed=100)
        assert a.mean != b.mean

    def test_stderr_shrinks_like_sqrt_n(self, both_positive_cfg):
        pol = ProviderPolicy(1, 0.3)
        small = estimate(both_positive_cfg, pol, 0.2, n=25_000, seed=5)
        large = estimate(both_positive_cfg, pol, 0.2, n=100_000, seed=5)
        for key in ("S", "L", "C", "U", "J"):
            ratio = small.stderr[key] / large.stderr[key]
            assert 2.0 * 0.8 <= ratio <= 2.0 * 1.2

    def test_matches_closed_forms_across_regimes(self):
        rng = np.random.default_rng(6)
        for k in range(10):
            cfg = random_config(rng)
            pol = ProviderPolicy(int(rng.integers(1, 3)), float(rng.uniform()))
            q = float(rng.uniform())
            est = estimate(cfg, pol, q, n=50_000, seed=1000 + k)
            out = expected_outcomes(cfg, pol, q)
            closed = {"S": out.S, "L": out.L, "C": out.C, "U": out.U, "J": out.J}
            assert est.max_steps_hit == 0
            for key, value in closed.items():
                assert abs(est.mean[key] - value) <= 4.5 * est.stderr[key] + 1e-12

    def test_block_boundary_does_not_break_determinism(self, both_positive_cfg):
        n = BLOCK_SIZE + 123
        a = estimate(both_positive_cfg, ProviderPolicy(1, 0.2), 0.1, n=n, seed=12)
        b = estimate(both_positive_cfg, ProviderPolicy(1, 0.2), 0.1, n=n, seed=12)
        assert a == b

    def test_truncation_counted(self, both_positive_cfg):
        est = estimate(both_positive_cfg, ProviderPolicy(1, 0.0), 0.0, n=2000, seed=0, max_steps=1)
        assert est.max_steps_hit > 0
