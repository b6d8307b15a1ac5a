"""Solver for the two-model routing/cascading game with a reactive user.

A provider routes tasks to a standard or a reasoning model and may
cascade failures upward; the user re-prompts or abandons.  The package
computes the closed-form session functionals, user best responses,
provider-optimal policies, misalignment gaps, and throttling gains, and
validates every closed form against a Monte-Carlo chain oracle.
"""

from .analysis import (
    AlignmentPredicate,
    MisalignmentReport,
    SweepAxis,
    SweepCell,
    SweepResult,
    ThrottleReport,
    ThrottleVariant,
    UserOptimum,
    misalignment_gap,
    sweep,
    throttle_analysis,
    user_optimal_route,
)
from .mc import EpisodeResult, McEstimate, estimate, simulate_episode
from .model import (
    ConfigError,
    GameConfig,
    ModelParams,
    NetValues,
    Outcomes,
    ProviderPolicy,
    Regime,
    UserResponse,
    expected_outcomes,
    net_values,
)
from .optimizer import (
    Candidate,
    Equilibrium,
    Provenance,
    ThresholdPenalties,
    brute_force_optimum,
    optimize_neg_pos,
    optimize_pos_neg,
    optimize_same_sign,
    solve_equilibrium,
    threshold_penalties,
)
from .response import (
    BestResponse,
    QuadraticF,
    RegimeError,
    ResponseKind,
    ResponseThresholds,
    q_dagger,
    threshold_s0,
    threshold_sH,
    threshold_sL,
    user_best_response,
)

__all__ = [
    "AlignmentPredicate",
    "BestResponse",
    "Candidate",
    "ConfigError",
    "EpisodeResult",
    "Equilibrium",
    "GameConfig",
    "McEstimate",
    "MisalignmentReport",
    "ModelParams",
    "NetValues",
    "Outcomes",
    "ProviderPolicy",
    "Provenance",
    "QuadraticF",
    "Regime",
    "RegimeError",
    "ResponseKind",
    "ResponseThresholds",
    "SweepAxis",
    "SweepCell",
    "SweepResult",
    "ThresholdPenalties",
    "ThrottleReport",
    "ThrottleVariant",
    "UserOptimum",
    "UserResponse",
    "brute_force_optimum",
    "estimate",
    "expected_outcomes",
    "misalignment_gap",
    "net_values",
    "optimize_neg_pos",
    "optimize_pos_neg",
    "optimize_same_sign",
    "q_dagger",
    "simulate_episode",
    "solve_equilibrium",
    "sweep",
    "threshold_penalties",
    "threshold_s0",
    "threshold_sH",
    "threshold_sL",
    "throttle_analysis",
    "user_best_response",
    "user_optimal_route",
]
