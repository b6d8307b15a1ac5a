"""Provider-optimal routing anticipating the user best response.

In the same-sign regimes and the NegPos regime the optimum has a closed
form: compare a handful of candidate policies whose costs are explicit.
In the PosNeg regime the problem reduces to five candidates, one of which
is a one-dimensional interior minimization over the cascade band
(s_low, s_high); sufficient conditions still pin static optima in most of
the parameter space.  A grid-plus-refinement brute force over (i, s, q)
serves as the independent oracle for every dispatch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (
    ABS_TOL,
    GameConfig,
    Outcomes,
    ProviderPolicy,
    Regime,
    UserResponse,
    expected_outcomes,
    net_values,
    provider_cost,
    user_utility,
)
from .response import (
    RegimeError,
    _q_dagger_unchecked,
    q_dagger_on_grid,
    threshold_s0,
    threshold_sH,
    threshold_sL,
    user_best_response,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# Interior cascade minimization: uniform grid size and bracket tolerance in s.
INTERIOR_GRID = 1024
INTERIOR_S_TOL = 1e-9


class Provenance(str, Enum):
    """Which closed-form case (or search) produced an equilibrium."""

    BOTH_VALUE_STATIC = "both-value-static-route"
    BOTH_LATENCY_STATIC = "both-latency-static-route"
    NEGPOS_M1_PRICIER_LOW_P = "negpos-m1-pricier-low-penalty"
    NEGPOS_M1_PRICIER_HIGH_P = "negpos-m1-pricier-high-penalty"
    NEGPOS_M1_CHEAPER_LOW_P = "negpos-m1-cheaper-low-penalty"
    NEGPOS_M1_CHEAPER_HIGH_P = "negpos-m1-cheaper-high-penalty"
    POSNEG_M1_STATIC = "posneg-m1-static"
    POSNEG_M1_CASCADE = "posneg-m1-cascade"
    POSNEG_M2_STATIC = "posneg-m2-static"
    FIVE_CANDIDATE_SEARCH = "five-candidate-search"
    BRUTE_FORCE = "brute-force"


@dataclass(frozen=True)
class Candidate:
    """One evaluated (policy, user response, provider cost) triple."""

    policy: ProviderPolicy
    q: float
    J: float


@dataclass(frozen=True)
class ThresholdPenalties:
    """Penalty thresholds governing the NegPos provider dispatch."""

    P1: float  # (c2/p2 - c1) / (1 - p1)
    P2: float  # (c1*(1-s0) + c2*s0/p2) / (p1 + (1-p1)*s0)
    cop1: float
    cop2: float
    incr: float  # (c2 - c1) / (p2 - p1)


@dataclass(frozen=True)
class Equilibrium:
    """Provider-optimal commitment with the user's response baked in.

    ``s_interval`` is the admissible cascade range achieving the optimal
    cost; it is wider than a point only where the cascade probability is
    a free variable (canonicalized to its smallest admissible value).
    """

    policy: ProviderPolicy
    response: UserResponse
    outcomes: Outcomes
    provenance: Provenance
    candidates: tuple[Candidate, ...]
    s_interval: tuple[float, float]
    notes: tuple[str, ...] = ()

    @property
    def q_star(self) -> float:
        return self.response.q


def penalty_threshold_p1(cfg: GameConfig) -> float:
    """Penalty level balancing one churned model-1 pass against model 2's cost-of-pass."""
    return (cfg.cop2 - cfg.c1) / (1.0 - cfg.p1)


def penalty_threshold_p2(cfg: GameConfig, s0: float) -> float:
    """Penalty level balancing churn at s=0 against cascading at s0."""
    return (cfg.c1 * (1.0 - s0) + cfg.c2 * s0 / cfg.p2) / (cfg.p1 + (1.0 - cfg.p1) * s0)


def cascade_service_cost(cfg: GameConfig, s):
    """Provider cost of routing to model 1 with cascade s and a staying user.

    With q=0 the session always succeeds, so J reduces to the service cost
    (c1 + (1-p1)*c2*s/p2) / (p1 + (1-p1)*s).
    """
    return (cfg.c1 + (1.0 - cfg.p1) * cfg.c2 * s / cfg.p2) / (cfg.p1 + (1.0 - cfg.p1) * s)


def threshold_penalties(cfg: GameConfig) -> ThresholdPenalties:
    """The NegPos dispatch thresholds; requires xi1 < 0 <= xi2."""
    nv = net_values(cfg)
    if nv.regime is not Regime.NEG_POS:
        raise RegimeError(
            f"threshold penalties are defined only in the NegPos regime; "
            f"config has xi1={nv.xi1:.6g}, xi2={nv.xi2:.6g} ({nv.regime.value})"
        )
    s0 = threshold_s0(cfg)
    return ThresholdPenalties(
        P1=penalty_threshold_p1(cfg),
        P2=penalty_threshold_p2(cfg, s0),
        cop1=cfg.cop1,
        cop2=cfg.cop2,
        incr=cfg.incremental_cost,
    )


def golden_min(f, lo, hi, tol: float = 1e-9, max_iter: int = 200):
    """Elementwise golden-section minimization of f over brackets [lo, hi].

    f must map an array of the bracket shape to same-shaped values.
    Returns the final bracket midpoints and f evaluated there.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc = f(c)
    fd = f(d)
    for _ in range(max_iter):
        if np.all(hi - lo <= tol):
            break
        keep_left = fc <= fd
        hi = np.where(keep_left, d, hi)
        lo = np.where(keep_left, lo, c)
        c = hi - INV_PHI * (hi - lo)
        d = lo + INV_PHI * (hi - lo)
        fc = f(c)
        fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def _candidate(cfg: GameConfig, i: int, s: float, q: float) -> Candidate:
    return Candidate(
        policy=ProviderPolicy(i=i, s=float(s)),
        q=float(q),
        J=float(provider_cost(cfg, i, s, q)),
    )


def _finish(
    cfg: GameConfig,
    policy: ProviderPolicy,
    provenance: Provenance,
    candidates: list[Candidate],
    s_interval: tuple[float, float] | None = None,
    notes: tuple[str, ...] = (),
) -> Equilibrium:
    """Assemble an equilibrium, recomputing the response and outcomes."""
    policy = policy.canonical()
    br = user_best_response(cfg, policy)
    out = expected_outcomes(cfg, policy, br.q_star)
    best_j = min(c.J for c in candidates)
    assert out.J <= best_j + 1e-9, (
        f"dispatch chose J={out.J} but a candidate achieves {best_j} "
        f"(config {cfg.to_mapping()})"
    )
    return Equilibrium(
        policy=policy,
        response=UserResponse(br.q_star),
        outcomes=out,
        provenance=provenance,
        candidates=tuple(candidates),
        s_interval=s_interval if s_interval is not None else (policy.s, policy.s),
        notes=notes,
    )


def optimize_same_sign(cfg: GameConfig) -> Equilibrium:
    """Provider optimum when both models share the net-value sign.

    Cascading never helps here: route statically, by cost-of-pass when
    both models are worth a pass, and by penalty versus incremental cost
    when the user abandons regardless.
    """
    nv = net_values(cfg)
    if nv.regime is Regime.BOTH_POSITIVE:
        candidates = [
            _candidate(cfg, 1, 0.0, 0.0),
            _candidate(cfg, 1, 1.0, 0.0),
            _candidate(cfg, 2, 0.0, 0.0),
        ]
        policy = ProviderPolicy(1, 0.0) if cfg.cop1 <= cfg.cop2 else ProviderPolicy(2, 0.0)
        return _finish(cfg, policy, Provenance.BOTH_VALUE_STATIC, candidates)
    if nv.regime is Regime.BOTH_NEGATIVE:
        candidates = [
            _candidate(cfg, 1, 0.0, 1.0),
            _candidate(cfg, 2, 0.0, 1.0),
        ]
        if cfg.P <= cfg.incremental_cost:
            # The user abandons after the first failure whatever s is, so
            # the whole cascade range is admissible; canonicalize to 0.
            return _finish(
                cfg,
                ProviderPolicy(1, 0.0),
                Provenance.BOTH_LATENCY_STATIC,
                candidates,
                s_interval=(0.0, 1.0),
                notes=("cascade probability is a free variable on [0, 1]",),
            )
        return _finish(cfg, ProviderPolicy(2, 0.0), Provenance.BOTH_LATENCY_STATIC, candidates)
    raise RegimeError(
        f"optimize_same_sign requires a same-sign regime; config has "
        f"xi1={nv.xi1:.6g}, xi2={nv.xi2:.6g} ({nv.regime.value})"
    )


def optimize_neg_pos(cfg: GameConfig) -> Equilibrium:
    """Provider optimum when only the strong model is worth a pass.

    Four-way dispatch on the cost-of-pass ordering and the penalty
    against P1 or P2.  Ties at P == P1 or P == P2 take the low-penalty
    branch (the strict-inequality reading) and are noted.
    """
    nv = net_values(cfg)
    if nv.regime is not Regime.NEG_POS:
        raise RegimeError(
            f"optimize_neg_pos requires the NegPos regime; config has "
            f"xi1={nv.xi1:.6g}, xi2={nv.xi2:.6g} ({nv.regime.value})"
        )
    tp = threshold_penalties(cfg)
    s0 = threshold_s0(cfg)
    candidates = [
        _candidate(cfg, 1, 0.0, 1.0),  # below s0 the user abandons; J flat in s
        _candidate(cfg, 1, s0, 0.0),
        _candidate(cfg, 1, 1.0, 0.0),
        _candidate(cfg, 2, 0.0, 0.0),
    ]
    notes: tuple[str, ...] = ()
    if tp.cop1 > tp.cop2:
        if cfg.P == tp.P1:
            notes = ("penalty sits exactly on P1; taking the low-penalty branch",)
        if cfg.P <= tp.P1:
            policy, prov = ProviderPolicy(1, 0.0), Provenance.NEGPOS_M1_PRICIER_LOW_P
        else:
            policy, prov = ProviderPolicy(2, 0.0), Provenance.NEGPOS_M1_PRICIER_HIGH_P
    else:
        if cfg.P == tp.P2:
            notes = ("penalty sits exactly on P2; taking the low-penalty branch",)
        if cfg.P <= tp.P2:
            policy, prov = ProviderPolicy(1, 0.0), Provenance.NEGPOS_M1_CHEAPER_LOW_P
        else:
            policy, prov = ProviderPolicy(1, s0), Provenance.NEGPOS_M1_CHEAPER_HIGH_P
    return _finish(cfg, policy, prov, candidates, notes=notes)


def _golden_min_scalar(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Plain-float golden-section minimization on [lo, hi]."""
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc = f(c)
    fd = f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def _interior_cascade_minimum(
    cfg: GameConfig, s_low: float, s_high: float
) -> tuple[float, float, float]:
    """Minimize J_1(s, q_dagger(s)) over the open band (s_low, s_high).

    Uniform interior grid followed by golden-section refinement of the
    best bracketing triple; the objective is smooth but not certified
    unimodal, so the grid stays dense.
    """
    s = np.linspace(s_low, s_high, INTERIOR_GRID + 2)[1:-1]
    j = provider_cost(cfg, 1, s, q_dagger_on_grid(cfg, s))
    k = int(np.argmin(j))
    lo = float(s[max(k - 1, 0)])
    hi = float(s[min(k + 1, len(s) - 1)])

    def objective(s_val: float) -> float:
        return provider_cost(cfg, 1, s_val, _q_dagger_unchecked(cfg, s_val))

    s_ref, j_ref = _golden_min_scalar(objective, lo, hi, tol=INTERIOR_S_TOL)
    if j_ref < j[k]:
        s_star, j_star = s_ref, j_ref
    else:
        s_star, j_star = float(s[k]), float(j[k])
    return s_star, _q_dagger_unchecked(cfg, s_star), j_star


def optimize_pos_neg(cfg: GameConfig) -> Equilibrium:
    """Provider optimum when only the standard model is worth a pass.

    Evaluates the five-candidate reduction {(1,0), (1,s_low), interior,
    (1, s>=s_high), (2,0)} and returns the argmin.  When one of the three
    static sufficient conditions holds, the matching candidate is
    returned and the provenance records it.
    """
    nv = net_values(cfg)
    if nv.regime is not Regime.POS_NEG:
        raise RegimeError(
            f"optimize_pos_neg requires the PosNeg regime; config has "
            f"xi1={nv.xi1:.6g}, xi2={nv.xi2:.6g} ({nv.regime.value})"
        )
    s_low = threshold_sL(cfg)
    s_high = threshold_sH(cfg)
    candidates = [
        _candidate(cfg, 1, 0.0, 0.0),
        _candidate(cfg, 1, s_low, 0.0),
    ]
    if s_high - s_low > 2.0 * ABS_TOL:
        s_int, q_int, _ = _interior_cascade_minimum(cfg, s_low, s_high)
        candidates.append(_candidate(cfg, 1, s_int, q_int))
    candidates += [
        _candidate(cfg, 1, 1.0, 1.0),
        # With xi2 < 0 the user abandons model 2, so the model-2 candidate
        # is evaluated at its best response q=1.
        _candidate(cfg, 2, 0.0, 1.0),
    ]
    cop1, cop2, incr = cfg.cop1, cfg.cop2, cfg.incremental_cost
    if cop1 < min(cfg.P, cop2):
        return _finish(cfg, ProviderPolicy(1, 0.0), Provenance.POSNEG_M1_STATIC, candidates)
    if cfg.P < min(cop1, incr):
        # Any cascade level at or above s_high pushes the user to abandon
        # immediately, so the whole range ties; canonicalize to s_high.
        # At the xi1 = 0 boundary s_high collapses to 0 where the
        # stay-when-indifferent tie rule kicks in, so fall back to s = 1.
        s_star = s_high
        if user_best_response(cfg, ProviderPolicy(1, s_star)).q_star != 1.0:
            s_star = 1.0
        return _finish(
            cfg,
            ProviderPolicy(1, s_star),
            Provenance.POSNEG_M1_CASCADE,
            candidates,
            s_interval=(s_star, 1.0),
            notes=("cascade probability is a free variable on [s_high, 1]",),
        )
    if incr < cfg.P < cop2 < cop1:
        return _finish(cfg, ProviderPolicy(2, 0.0), Provenance.POSNEG_M2_STATIC, candidates)

    # No sufficient condition: exact argmin over the five candidates with
    # deterministic tie-breaking (lower i, then lower s).
    best = candidates[0]
    for cand in candidates[1:]:
        if cand.J < best.J - ABS_TOL:
            best = cand
        elif abs(cand.J - best.J) <= ABS_TOL:
            if (cand.policy.i, cand.policy.s) < (best.policy.i, best.policy.s):
                best = cand
    return _finish(cfg, best.policy, Provenance.FIVE_CANDIDATE_SEARCH, candidates)


def solve_equilibrium(cfg: GameConfig) -> Equilibrium:
    """Stackelberg equilibrium: dispatch on the net-value regime."""
    regime = net_values(cfg).regime
    if regime in (Regime.BOTH_POSITIVE, Regime.BOTH_NEGATIVE):
        return optimize_same_sign(cfg)
    if regime is Regime.NEG_POS:
        return optimize_neg_pos(cfg)
    return optimize_pos_neg(cfg)


def _best_response_on_grid(cfg: GameConfig, i: int, s_arr, q_grid):
    """Grid-argmax user response with golden refinement, per cascade level.

    Independent of the closed-form best response: only utility values
    drive the choice.  Ties within ABS_TOL prefer the lower q, matching
    the stay-when-indifferent convention.
    """
    s_col = np.asarray(s_arr, dtype=float)[:, None]
    util = user_utility(cfg, i, s_col, q_grid[None, :])
    k = np.argmax(util, axis=1)
    lo = q_grid[np.maximum(k - 1, 0)]
    hi = q_grid[np.minimum(k + 1, len(q_grid) - 1)]
    s_flat = np.asarray(s_arr, dtype=float)

    def neg_util(q_arr):
        return -user_utility(cfg, i, s_flat, q_arr)

    q_ref, _ = golden_min(neg_util, lo, hi, tol=1e-10)
    best_q = np.zeros_like(s_flat)
    best_u = user_utility(cfg, i, s_flat, best_q)
    for cand in (q_ref, np.ones_like(s_flat)):
        u = user_utility(cfg, i, s_flat, cand)
        better = u > best_u + ABS_TOL
        best_q = np.where(better, cand, best_q)
        best_u = np.where(better, u, best_u)
    return best_q


def _best_response_scalar(cfg: GameConfig, i: int, s: float, q_grid) -> float:
    """Single-s version of the grid-argmax response search (pure-float refinement)."""
    util = user_utility(cfg, i, s, q_grid)
    k = int(np.argmax(util))
    lo = float(q_grid[max(k - 1, 0)])
    hi = float(q_grid[min(k + 1, len(q_grid) - 1)])
    q_ref, _ = _golden_min_scalar(lambda q: -user_utility(cfg, i, s, q), lo, hi, tol=1e-10)
    best_q, best_u = 0.0, user_utility(cfg, i, s, 0.0)
    for cand in (q_ref, 1.0):
        u = user_utility(cfg, i, s, cand)
        if u > best_u + ABS_TOL:
            best_q, best_u = cand, u
    return best_q


def brute_force_optimum(
    cfg: GameConfig,
    s_points: int = 1001,
    q_points: int = 1001,
    refine_s: bool = True,
) -> Equilibrium:
    """Independent grid oracle for the provider problem.

    For each initial route and each cascade level on a uniform grid
    (augmented with the analytic thresholds where defined), the user
    response is found by grid-argmax over utility with golden-section
    refinement, and the provider picks the (i, s) minimizing cost.  With
    ``refine_s`` the winning bracket is additionally refined in s, so the
    result matches interior optima beyond grid resolution.
    """
    if s_points < 101 or q_points < 101:
        raise ValueError(
            f"brute force needs at least 101 grid points per axis, got "
            f"s_points={s_points}, q_points={q_points}"
        )
    q_grid = np.linspace(0.0, 1.0, q_points)

    # Route 2: the cascade level is inert, one response search suffices.
    q2 = _best_response_scalar(cfg, 2, 0.0, q_grid)
    j2 = float(provider_cost(cfg, 2, 0.0, q2))

    # Route 1: uniform grid augmented with the analytic thresholds.
    regime = net_values(cfg).regime
    extra = []
    if regime is Regime.NEG_POS:
        extra.append(threshold_s0(cfg))
    elif regime is Regime.POS_NEG:
        extra.extend([threshold_sL(cfg), threshold_sH(cfg)])
    s_grid = np.unique(np.concatenate([np.linspace(0.0, 1.0, s_points), np.asarray(extra)]))
    s_grid = s_grid[(s_grid >= 0.0) & (s_grid <= 1.0)]
    q1 = _best_response_on_grid(cfg, 1, s_grid, q_grid)
    j1_all = provider_cost(cfg, 1, s_grid, q1)
    k = int(np.argmin(j1_all))
    s1, q1_star, j1 = float(s_grid[k]), float(q1[k]), float(j1_all[k])

    if refine_s:
        lo = float(s_grid[max(k - 1, 0)])
        hi = float(s_grid[min(k + 1, len(s_grid) - 1)])

        def objective(s_val: float) -> float:
            q_local = _best_response_scalar(cfg, 1, s_val, q_grid)
            return float(provider_cost(cfg, 1, s_val, q_local))

        s_ref, j_ref = _golden_min_scalar(objective, lo, hi, tol=INTERIOR_S_TOL)
        if j_ref < j1:
            s1 = s_ref
            q1_star = _best_response_scalar(cfg, 1, s1, q_grid)
            j1 = float(provider_cost(cfg, 1, s1, q1_star))

    cand1 = Candidate(ProviderPolicy(1, s1), q1_star, j1)
    cand2 = Candidate(ProviderPolicy(2, 0.0), q2, j2)
    winner = cand1 if j1 <= j2 + ABS_TOL else cand2
    out = expected_outcomes(cfg, winner.policy, winner.q)
    return Equilibrium(
        policy=winner.policy.canonical(),
        response=UserResponse(winner.q),
        outcomes=out,
        provenance=Provenance.BRUTE_FORCE,
        candidates=(cand1, cand2),
        s_interval=(winner.policy.s, winner.policy.s),
    )
