"""User best response: thresholds, the interior quadratic, and the dispatch."""

import numpy as np
import pytest

from gamegen import random_config, random_configs_all_regimes
from oracles import bisect_root, grid_argmax_q
from routegame.model import GameConfig, ProviderPolicy, Regime, net_values, user_utility
from routegame.response import (
    BestResponse,
    RegimeError,
    ResponseKind,
    envelope_upper,
    f_value,
    k_minus,
    k_plus,
    q_dagger,
    q_dagger_on_grid,
    quadratic_in_q,
    threshold_s0,
    threshold_sH,
    threshold_sL,
    user_best_response,
)

# High-precision values for the worked examples, frozen from the
# independent oracles below (bisection / direct substitution).
S0_EXAMPLE = 0.18367346938775514  # 0.1 / (0.4/0.9 + 0.1)
SL_EXAMPLE = 0.7653257570032507  # root of 0.008 s^2 + 0.412 s - 0.32
SH_EXAMPLE = 0.8333333333333334  # 0.5 / 0.6
QDAG_EXAMPLE = 0.4617591802313961  # q_dagger(0.8) for the PosNeg example


class TestThresholdS0:
    def test_worked_example(self, neg_pos_cfg):
        assert threshold_s0(neg_pos_cfg) == pytest.approx(S0_EXAMPLE, abs=1e-15)

    def test_matches_indifference_point_oracle(self, neg_pos_cfg):
        # At s0 the user is indifferent between staying and abandoning;
        # find that point by bisection on U(s, 0) - U(s, 1).
        cfg = neg_pos_cfg
        gap = lambda s: user_utility(cfg, 1, s, 0.0) - user_utility(cfg, 1, s, 1.0)
        s0 = bisect_root(gap, 1e-9, 1.0 - 1e-9)
        assert threshold_s0(cfg) == pytest.approx(s0, abs=1e-9)

    def test_vanishing_xi1_pushes_s0_to_zero(self):
        cfg = GameConfig.create(p1=0.3, p2=0.9, t1=0.3001, t2=0.5, c1=0.1, c2=0.4, V=1.0, P=0.2)
        assert 0.0 < threshold_s0(cfg) < 1e-3

    def test_large_value_pushes_s0_to_zero(self):
        # xi2/p2 grows with V, dominating the denominator; hold xi1 fixed
        # at -0.05 while V rises (the larger-V game needs t1 past 1).
        lo = GameConfig.create(p1=0.3, p2=0.9, t1=0.35, t2=0.5, c1=0.1, c2=0.4, V=1.0, P=0.2)
        hi = GameConfig(m1=lo.m1, m2=lo.m2, V=10.0, P=0.2, throttled=True).with_latencies(3.05, 0.5)
        assert abs(lo.xi1 - hi.xi1) < 1e-12
        assert threshold_s0(hi) < threshold_s0(lo)

    def test_regime_mismatch_names_actual_regime(self, both_positive_cfg):
        with pytest.raises(RegimeError, match="BothPositive"):
            threshold_s0(both_positive_cfg)

    def test_in_unit_interval_on_random_configs(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            cfg = random_config(rng, Regime.NEG_POS)
            assert 0.0 < threshold_s0(cfg) < 1.0


class TestThresholdSH:
    def test_worked_example(self, pos_neg_cfg):
        assert threshold_sH(pos_neg_cfg) == pytest.approx(SH_EXAMPLE, abs=1e-15)

    def test_zero_of_lower_envelope_slope(self, pos_neg_cfg):
        # Direct substitution: k_minus(s_high) = xi1*(1-s) + xi2*s = 0.
        assert k_minus(pos_neg_cfg, threshold_sH(pos_neg_cfg)) == pytest.approx(0.0, abs=1e-15)

    def test_vanishing_xi2_pushes_sh_to_one(self):
        cfg = GameConfig.create(p1=0.6, p2=0.8, t1=0.1, t2=0.8001, c1=0.5, c2=0.6, V=1.0, P=0.6)
        assert 1.0 - 1e-2 < threshold_sH(cfg) < 1.0

    def test_symmetric_net_values_give_half(self):
        # |xi1| == |xi2| = 0.1
        cfg = GameConfig.create(p1=0.6, p2=0.8, t1=0.5, t2=0.9, c1=0.5, c2=0.6, V=1.0, P=0.6)
        assert abs(cfg.xi1 + cfg.xi2) < 1e-15
        assert threshold_sH(cfg) == pytest.approx(0.5, abs=1e-12)

    def test_regime_mismatch(self, neg_pos_cfg):
        with pytest.raises(RegimeError, match="NegPos"):
            threshold_sH(neg_pos_cfg)


class TestThresholdSL:
    def test_worked_example_against_bisection(self, pos_neg_cfg):
        # Independent oracle: bisect F(., 0) on [0, 1] to 1e-12.
        cfg = pos_neg_cfg
        s_low = threshold_sL(cfg)
        oracle = bisect_root(lambda s: f_value(cfg, s, 0.0), 0.0, 1.0)
        assert s_low == pytest.approx(SL_EXAMPLE, abs=1e-12)
        assert s_low == pytest.approx(oracle, abs=1e-9)

    def test_endpoint_signs_forced(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            cfg = random_config(rng, Regime.POS_NEG)
            assert f_value(cfg, 0.0, 0.0) > 0.0  # equals xi1 * p2^2
            assert f_value(cfg, 1.0, 0.0) < 0.0  # equals xi2

    def test_low_threshold_below_high_threshold(self):
        # Ordering property over many random PosNeg configs.
        rng = np.random.default_rng(13)
        for _ in range(10_000):
            cfg = random_config(rng, Regime.POS_NEG)
            s_low = threshold_sL(cfg)
            s_high = threshold_sH(cfg)
            assert 0.0 < s_low < s_high < 1.0

    def test_residual_small(self, pos_neg_cfg):
        assert abs(f_value(pos_neg_cfg, threshold_sL(pos_neg_cfg), 0.0)) <= 1e-10

    def test_regime_mismatch(self, both_negative_cfg):
        with pytest.raises(RegimeError, match="BothNegative"):
            threshold_sL(both_negative_cfg)


class TestQuadraticExpansion:
    def test_matches_product_form_pointwise(self):
        rng = np.random.default_rng(14)
        q = np.linspace(0.0, 1.0, 17)
        for _ in range(300):
            cfg = random_config(rng)
            s = float(rng.uniform())
            quad = quadratic_in_q(cfg, s)
            assert np.max(np.abs(quad(q) - f_value(cfg, s, q))) <= 1e-12


class TestQDagger:
    def test_worked_example_matches_grid_argmax(self, pos_neg_cfg):
        q_best, _ = grid_argmax_q(pos_neg_cfg, 1, 0.8, points=100_001)
        q = q_dagger(pos_neg_cfg, 0.8)
        assert q == pytest.approx(QDAG_EXAMPLE, abs=1e-12)
        assert q == pytest.approx(q_best, abs=1e-4)

    def test_boundary_continuity(self, pos_neg_cfg):
        s_low = threshold_sL(pos_neg_cfg)
        s_high = threshold_sH(pos_neg_cfg)
        delta = 1e-6
        q_lo = q_dagger(pos_neg_cfg, s_low + delta)
        q_hi = q_dagger(pos_neg_cfg, s_high - delta)
        assert 0.0 <= q_lo < 1e-3
        assert 1.0 - 1e-3 < q_hi <= 1.0
        assert q_lo < q_hi

    def test_out_of_band_errors_name_boundary_policy(self, pos_neg_cfg):
        with pytest.raises(ValueError, match=r"stays \(q\*=0\)"):
            q_dagger(pos_neg_cfg, 0.1)
        with pytest.raises(ValueError, match=r"abandons \(q\*=1\)"):
            q_dagger(pos_neg_cfg, 0.95)

    def test_regime_mismatch(self, both_positive_cfg):
        with pytest.raises(RegimeError, match="BothPositive"):
            q_dagger(both_positive_cfg, 0.5)

    def test_residual_bound_on_random_band_points(self):
        rng = np.random.default_rng(15)
        for _ in range(500):
            cfg = random_config(rng, Regime.POS_NEG)
            s_low, s_high = threshold_sL(cfg), threshold_sH(cfg)
            s = float(rng.uniform(s_low + 1e-9, s_high - 1e-9))
            q = q_dagger(cfg, s)
            assert abs(f_value(cfg, s, q)) <= 1e-10
            assert 0.0 <= q <= 1.0

    def test_grid_version_matches_scalar(self):
        rng = np.random.default_rng(16)
        cfg = random_config(rng, Regime.POS_NEG)
        s_low, s_high = threshold_sL(cfg), threshold_sH(cfg)
        s = np.linspace(s_low, s_high, 64)[1:-1]
        grid = q_dagger_on_grid(cfg, s)
        scalars = np.array([q_dagger(cfg, float(v)) for v in s])
        assert np.max(np.abs(grid - scalars)) <= 1e-14


class TestUserBestResponse:
    def test_route_two_indicator(self, both_positive_cfg, pos_neg_cfg):
        br = user_best_response(both_positive_cfg, ProviderPolicy(2, 0.0))
        assert br.q_star == 0.0 and br.kind is ResponseKind.STAY
        br = user_best_response(pos_neg_cfg, ProviderPolicy(2, 0.0))
        assert br.q_star == 1.0 and br.kind is ResponseKind.ABANDON

    def test_same_sign_static(self, both_positive_cfg, both_negative_cfg):
        for s in (0.0, 0.5, 1.0):
            assert user_best_response(both_positive_cfg, ProviderPolicy(1, s)).q_star == 0.0
            assert user_best_response(both_negative_cfg, ProviderPolicy(1, s)).q_star == 1.0

    def test_negpos_threshold_split(self, neg_pos_cfg):
        # s = 0.25 > s0 ~ 0.1837: staying maximizes utility (oracle confirms)
        br = user_best_response(neg_pos_cfg, ProviderPolicy(1, 0.25))
        q_best, _ = grid_argmax_q(neg_pos_cfg, 1, 0.25)
        assert br.q_star == 0.0 == q_best
        # below the threshold the user abandons
        br = user_best_response(neg_pos_cfg, ProviderPolicy(1, 0.1))
        q_best, _ = grid_argmax_q(neg_pos_cfg, 1, 0.1)
        assert br.q_star == 1.0 == q_best
        # at the threshold exactly, indifference resolves to staying
        br = user_best_response(neg_pos_cfg, ProviderPolicy(1, threshold_s0(neg_pos_cfg)))
        assert br.q_star == 0.0
        assert br.thresholds.s0 == pytest.approx(S0_EXAMPLE, abs=1e-15)

    def test_posneg_three_regions(self, pos_neg_cfg):
        br = user_best_response(pos_neg_cfg, ProviderPolicy(1, 0.5))
        assert br.q_star == 0.0 and br.kind is ResponseKind.STAY
        br = user_best_response(pos_neg_cfg, ProviderPolicy(1, 0.9))
        q_best, _ = grid_argmax_q(pos_neg_cfg, 1, 0.9)
        assert br.q_star == 1.0 == q_best  # s >= s_high: abandoning dominates
        br = user_best_response(pos_neg_cfg, ProviderPolicy(1, 0.8))
        assert br.kind is ResponseKind.INTERIOR
        assert 0.0 < br.q_star < 1.0
        assert br.thresholds.s_low < 0.8 < br.thresholds.s_high

    def test_thresholds_only_in_mixed_regimes(self, both_positive_cfg, neg_pos_cfg, pos_neg_cfg):
        assert user_best_response(both_positive_cfg, ProviderPolicy(1, 0.5)).thresholds is None
        ts = user_best_response(neg_pos_cfg, ProviderPolicy(1, 0.5)).thresholds
        assert ts.s0 is not None and ts.s_low is None and ts.s_high is None
        ts = user_best_response(pos_neg_cfg, ProviderPolicy(1, 0.5)).thresholds
        assert ts.s0 is None and 0.0 < ts.s_low < ts.s_high < 1.0

    def test_optimality_against_grid(self):
        # U(s, q*) within 1e-9 of the best over a 1001-point q grid.
        rng = np.random.default_rng(17)
        for cfg in random_configs_all_regimes(rng, 50):
            s = float(rng.uniform())
            for i in (1, 2):
                br = user_best_response(cfg, ProviderPolicy(i, s))
                _, u_best = grid_argmax_q(cfg, i, s)
                assert user_utility(cfg, i, s, br.q_star) >= u_best - 1e-9

    def test_envelope_tight_at_optima(self):
        rng = np.random.default_rng(18)
        for _ in range(200):
            cfg = random_config(rng, Regime.BOTH_POSITIVE)
            s = float(rng.uniform())
            # staying achieves the upper envelope at q = 0
            assert user_utility(cfg, 1, s, 0.0) == pytest.approx(
                envelope_upper(cfg, s, 0.0), abs=1e-12
            )
        for _ in range(200):
            cfg = random_config(rng, Regime.BOTH_NEGATIVE)
            s = float(rng.uniform())
            # abandoning yields exactly one pass of model 1
            assert user_utility(cfg, 1, s, 1.0) == pytest.approx(cfg.xi1, abs=1e-12)

    def test_interior_kind_invariant(self):
        rng = np.random.default_rng(19)
        for _ in range(300):
            cfg = random_config(rng, Regime.POS_NEG)
            s = float(rng.uniform())
            br = user_best_response(cfg, ProviderPolicy(1, s))
            if br.kind is ResponseKind.INTERIOR:
                assert 0.0 < br.q_star < 1.0
                assert br.thresholds.s_low < s < br.thresholds.s_high

    def test_quadrant_structure_at_fixed_policy(self):
        # Sweeping the net-value plane at s = 0.25: static corners, the
        # s0 split in NegPos, and interior responses only inside the
        # PosNeg cascade band.
        pol = ProviderPolicy(1, 0.25)
        V, p1, p2 = 1.0, 0.3, 0.75
        interior_seen = 0
        for xi1 in np.linspace(-0.2, 0.2, 21):
            for xi2 in np.linspace(-0.2, 0.2, 21):
                cfg = GameConfig.create(
                    p1=p1, p2=p2, t1=V * p1 - xi1, t2=V * p2 - xi2,
                    c1=0.1, c2=0.4, V=V, P=0.3,
                )
                br = user_best_response(cfg, pol)
                nv = net_values(cfg)
                if nv.regime is Regime.BOTH_POSITIVE:
                    assert br.q_star == 0.0
                elif nv.regime is Regime.BOTH_NEGATIVE:
                    assert br.q_star == 1.0
                elif nv.regime is Regime.NEG_POS:
                    assert br.q_star == (1.0 if pol.s < threshold_s0(cfg) else 0.0)
                else:
                    if br.kind is ResponseKind.INTERIOR:
                        interior_seen += 1
                        assert threshold_sL(cfg) < pol.s < threshold_sH(cfg)
        assert interior_seen > 0
