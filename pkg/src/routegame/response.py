"""User best response to a committed routing policy.

Routing straight to model 2 collapses the user's problem to the sign of
xi2.  Routing to model 1 splits into four regimes on (sign xi1, sign xi2):
the same-sign regimes are static (always stay / always abandon), the
mixed regimes are threshold policies in the cascade probability s.  In
the PosNeg regime the middle band (s_low, s_high) has a genuinely interior
response q_dagger(s), the unique root in [0, 1] of a quadratic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import ABS_TOL, GameConfig, ProviderPolicy, Regime, net_values, user_utility

# Residual bound certified for the quadratic roots q_dagger and s_low.
ROOT_RESIDUAL_TOL = 1e-10


class RegimeError(ValueError):
    """An operation that only exists in one sign regime was called in another."""


def _require_regime(cfg: GameConfig, wanted: Regime, what: str) -> None:
    nv = net_values(cfg)
    if nv.regime is not wanted:
        raise RegimeError(
            f"{what} is defined only in the {wanted.value} regime; "
            f"config has xi1={nv.xi1:.6g}, xi2={nv.xi2:.6g} ({nv.regime.value})"
        )


class ResponseKind(Enum):
    STAY = "stay"
    ABANDON = "abandon"
    INTERIOR = "interior"


@dataclass(frozen=True)
class ResponseThresholds:
    """Cascade-probability thresholds active for the current regime."""

    s0: float | None = None
    s_low: float | None = None
    s_high: float | None = None


@dataclass(frozen=True)
class BestResponse:
    """Utility-maximizing abandonment probability plus how it was classified."""

    q_star: float
    kind: ResponseKind
    regime: Regime
    thresholds: ResponseThresholds | None = None


@dataclass(frozen=True)
class QuadraticF:
    """Coefficients of F(s, q) = a*q^2 + b*q + c0 in q for a fixed s.

    F is the first-order optimality polynomial for the user's problem in
    the PosNeg regime; its unique [0, 1] root is the interior response.
    """

    a: float
    b: float
    c0: float

    def __call__(self, q):
        return (self.a * q + self.b) * q + self.c0


def k_plus(cfg: GameConfig, s):
    """Slope sign driver of the upper utility envelope: xi1*(1-s) + xi2*s/p2."""
    return cfg.xi1 * (1.0 - s) + cfg.xi2 * s / cfg.p2


def k_minus(cfg: GameConfig, s):
    """Slope sign driver of the lower utility envelope: xi1*(1-s) + xi2*s."""
    return cfg.xi1 * (1.0 - s) + cfg.xi2 * s


def envelope_upper(cfg: GameConfig, s, q):
    """Envelope (xi1 + xi2*alpha*s/p2) / (1 - alpha*(1-s)); bounds U_1 above iff xi2 >= 0."""
    a = (1.0 - cfg.p1) * (1.0 - q)
    return (cfg.xi1 + cfg.xi2 * a * s / cfg.p2) / (1.0 - a * (1.0 - s))


def envelope_lower(cfg: GameConfig, s, q):
    """Envelope (xi1 + xi2*alpha*s) / (1 - alpha*(1-s)); bounds U_1 below iff xi2 >= 0."""
    a = (1.0 - cfg.p1) * (1.0 - q)
    return (cfg.xi1 + cfg.xi2 * a * s) / (1.0 - a * (1.0 - s))


def f_value(cfg: GameConfig, s, q):
    """F(s, q) in its defining product form, independent of the expansion."""
    g = cfg.p2 + (1.0 - cfg.p2) * q
    shrink = (1.0 - cfg.p1) * (1.0 - cfg.p2) * (1.0 - s) * (1.0 - q) ** 2
    return cfg.xi1 * (1.0 - s) * g * g + cfg.xi2 * s * (1.0 - shrink)


def quadratic_in_q(cfg: GameConfig, s) -> QuadraticF:
    """Expand F(s, .) into its quadratic coefficients in q."""
    xi1, xi2 = cfg.xi1, cfg.xi2
    one_m_s = 1.0 - s
    one_m_p2 = 1.0 - cfg.p2
    one_m_p1 = 1.0 - cfg.p1
    a = one_m_s * one_m_p2 * (xi1 * one_m_p2 - xi2 * s * one_m_p1)
    b = 2.0 * one_m_s * one_m_p2 * (xi1 * cfg.p2 + xi2 * s * one_m_p1)
    c0 = xi1 * one_m_s * cfg.p2 ** 2 + xi2 * s * (1.0 - one_m_p1 * one_m_p2 * one_m_s)
    return QuadraticF(a=a, b=b, c0=c0)


def threshold_s0(cfg: GameConfig) -> float:
    """Cascade level at which a NegPos user switches from abandoning to staying.

    s0 = -xi1 / (xi2/p2 - xi1); the user abandons iff s < s0.
    """
    _require_regime(cfg, Regime.NEG_POS, "threshold s0")
    return -cfg.xi1 / (cfg.xi2 / cfg.p2 - cfg.xi1)


def threshold_sH(cfg: GameConfig) -> float:
    """Upper cascade threshold in the PosNeg regime: xi1 / (xi1 - xi2).

    At s_high the lower envelope slope driver k_minus crosses zero; for
    s >= s_high the user abandons outright.
    """
    _require_regime(cfg, Regime.POS_NEG, "threshold s_high")
    return cfg.xi1 / (cfg.xi1 - cfg.xi2)


def threshold_sL(cfg: GameConfig) -> float:
    """Lower cascade threshold in the PosNeg regime: the root of F(s, 0) = 0.

    F(., 0) is quadratic in s, positive at 0 and negative at 1, so the
    root in [0, 1] is unique; it is computed with the cancellation-free
    quadratic formula and clamped to [0, 1].
    """
    _require_regime(cfg, Regime.POS_NEG, "threshold s_low")
    # F(s, 0) = A*s^2 + B*s + C with k = (1-p1)(1-p2).
    k = (1.0 - cfg.p1) * (1.0 - cfg.p2)
    A = cfg.xi2 * k
    B = cfg.xi2 * (1.0 - k) - cfg.xi1 * cfg.p2 ** 2
    C = cfg.xi1 * cfg.p2 ** 2
    roots = _stable_quadratic_roots(A, B, C)
    candidates = [r for r in roots if -ABS_TOL <= r <= 1.0 + ABS_TOL]
    if not candidates:
        raise AssertionError(
            f"F(., 0) has no root in [0, 1] for config {cfg.to_mapping()}; "
            f"roots were {roots}"
        )
    s_low = min(max(candidates[0], 0.0), 1.0)
    residual = f_value(cfg, s_low, 0.0)
    assert abs(residual) <= ROOT_RESIDUAL_TOL, (
        f"s_low residual {residual} exceeds {ROOT_RESIDUAL_TOL}"
    )
    return s_low


def _stable_quadratic_roots(a: float, b: float, c: float) -> list[float]:
    """Real roots of a*x^2 + b*x + c, avoiding catastrophic cancellation.

    Uses x = u/(2a) and x = 2c/u with u = -(b + sign(b)*sqrt(disc)).
    """
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    u = -(b + math.copysign(sq, b)) if b != 0.0 else -sq
    if u == 0.0:
        return [0.0]
    return sorted({u / (2.0 * a), 2.0 * c / u})


def q_dagger(cfg: GameConfig, s: float) -> float:
    """Interior abandonment response: the unique [0, 1] root of F(s, .) = 0.

    Defined only for PosNeg configs with s strictly between s_low and
    s_high; outside that band the caller should use the boundary response
    (stay below s_low, abandon above s_high).
    """
    _require_regime(cfg, Regime.POS_NEG, "q_dagger")
    s_low = threshold_sL(cfg)
    s_high = threshold_sH(cfg)
    if s <= s_low:
        raise ValueError(
            f"s={s:.6g} <= s_low={s_low:.6g}: the user stays (q*=0); "
            "q_dagger applies only on (s_low, s_high)"
        )
    if s >= s_high:
        raise ValueError(
            f"s={s:.6g} >= s_high={s_high:.6g}: the user abandons (q*=1); "
            "q_dagger applies only on (s_low, s_high)"
        )
    quad = quadratic_in_q(cfg, s)
    roots = _stable_quadratic_roots(quad.a, quad.b, quad.c0)
    in_range = [min(max(r, 0.0), 1.0) for r in roots if -ABS_TOL <= r <= 1.0 + ABS_TOL]
    if not in_range:
        # a > 0 and c0 < 0 put one root on each side of zero; only severe
        # floating noise could land both outside, so fall back to the
        # clamped larger root.
        in_range = [min(max(max(roots), 0.0), 1.0)]
    if len(in_range) > 1:
        # Both roots clamp into [0, 1] only through floating noise at the
        # band edges; pick whichever the user actually prefers.
        q = max(in_range, key=lambda r: user_utility(cfg, 1, s, r))
    else:
        q = in_range[0]
    residual = f_value(cfg, s, q)
    assert abs(residual) <= ROOT_RESIDUAL_TOL, (
        f"q_dagger residual {residual} exceeds {ROOT_RESIDUAL_TOL} at s={s}"
    )
    return q


def _q_dagger_unchecked(cfg: GameConfig, s: float) -> float:
    """Scalar interior root without regime/band validation or residual checks.

    Hot path for the provider's interior cascade search; callers guarantee
    s lies in (s_low, s_high) of a PosNeg config.
    """
    quad = quadratic_in_q(cfg, s)
    if quad.a == 0.0:
        r = 0.0 if quad.b == 0.0 else -quad.c0 / quad.b
        return min(max(r, 0.0), 1.0)
    disc = quad.b * quad.b - 4.0 * quad.a * quad.c0
    sq = math.sqrt(disc) if disc > 0.0 else 0.0
    u = -(quad.b + math.copysign(sq, quad.b)) if quad.b != 0.0 else -sq
    if u == 0.0:
        return 0.0
    r = max(u / (2.0 * quad.a), 2.0 * quad.c0 / u)
    return min(max(r, 0.0), 1.0)


def q_dagger_on_grid(cfg: GameConfig, s):
    """Vectorized interior response over an array of s in (s_low, s_high).

    Exploits the sign structure (leading coefficient > 0, constant
    coefficient < 0): the roots straddle zero and the positive one is the
    response, so selection is just the larger stable root.
    """
    s = np.asarray(s, dtype=float)
    quad = quadratic_in_q(cfg, s)
    a, b, c0 = np.broadcast_arrays(quad.a, quad.b, quad.c0)
    disc = b * b - 4.0 * a * c0
    sq = np.sqrt(np.maximum(disc, 0.0))
    u = -(b + np.copysign(sq, b))
    u_safe = np.where(u == 0.0, np.finfo(float).tiny, u)
    a_safe = np.where(a == 0.0, np.finfo(float).tiny, a)
    q = np.maximum(u_safe / (2.0 * a_safe), 2.0 * c0 / u_safe)
    # Degenerate quadratics (band endpoints s in {0, 1} or xi1 == 0)
    # collapse to the linear root, or to 0 when fully degenerate.
    b_safe = np.where(b == 0.0, np.finfo(float).tiny, b)
    q = np.where(a == 0.0, np.where(b == 0.0, 0.0, -c0 / b_safe), q)
    q = np.clip(q, 0.0, 1.0)
    residual = np.max(np.abs(f_value(cfg, s, q))) if q.size else 0.0
    assert residual <= ROOT_RESIDUAL_TOL, (
        f"q_dagger residual {residual} exceeds {ROOT_RESIDUAL_TOL} on grid"
    )
    return q


def user_best_response(cfg: GameConfig, pol: ProviderPolicy) -> BestResponse:
    """Utility-maximizing abandonment probability for a committed policy.

    Ties (exactly zero net value, or s exactly at a threshold where both
    endpoints maximize utility) resolve to staying.
    """
    nv = net_values(cfg)
    if pol.i == 2:
        if nv.xi2 < 0.0:
            return BestResponse(1.0, ResponseKind.ABANDON, nv.regime)
        return BestResponse(0.0, ResponseKind.STAY, nv.regime)

    if nv.regime is Regime.BOTH_POSITIVE:
        return BestResponse(0.0, ResponseKind.STAY, nv.regime)
    if nv.regime is Regime.BOTH_NEGATIVE:
        return BestResponse(1.0, ResponseKind.ABANDON, nv.regime)

    if nv.regime is Regime.NEG_POS:
        s0 = threshold_s0(cfg)
        ts = ResponseThresholds(s0=s0)
        if pol.s < s0:
            return BestResponse(1.0, ResponseKind.ABANDON, nv.regime, ts)
        return BestResponse(0.0, ResponseKind.STAY, nv.regime, ts)

    s_low = threshold_sL(cfg)
    s_high = threshold_sH(cfg)
    ts = ResponseThresholds(s_low=s_low, s_high=s_high)
    if pol.s <= s_low:
        return BestResponse(0.0, ResponseKind.STAY, nv.regime, ts)
    if pol.s >= s_high:
        return BestResponse(1.0, ResponseKind.ABANDON, nv.regime, ts)
    q = q_dagger(cfg, pol.s)
    if q <= 0.0:
        return BestResponse(0.0, ResponseKind.STAY, nv.regime, ts)
    if q >= 1.0:
        return BestResponse(1.0, ResponseKind.ABANDON, nv.regime, ts)
    return BestResponse(q, ResponseKind.INTERIOR, nv.regime, ts)
