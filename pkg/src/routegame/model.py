"""Core game primitives: parameters, policies, and closed-form session outcomes.

A provider owns two models, a cheap standard model (1) and a pricier,
stronger one (2), and commits to a routing policy: the initial model i
and a cascade probability s of escalating from model 1 to model 2 after
a failed pass.  The user, facing repeated failures, abandons each failed
pass with probability q.  The session is an absorbing chain whose five
expected functionals (success probability S, user delay L, provider
service cost C, user utility U, provider cost J) all have closed forms;
everything downstream (best responses, equilibria, misalignment,
throttling) is built on them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

# Absolute tolerance for threshold and tie comparisons throughout the package.
ABS_TOL = 1e-12

CONFIG_FIELDS = ("p1", "p2", "t1", "t2", "c1", "c2", "V", "P")


class ConfigError(ValueError):
    """A game configuration or policy violates one of its invariants."""


class Regime(str, enum.Enum):
    """Sign pattern of the per-pass net values (xi1, xi2).

    Zero net value counts as value-dominated (the user stays when
    indifferent), so the four labels partition the parameter space.
    """

    BOTH_POSITIVE = "BothPositive"
    BOTH_NEGATIVE = "BothNegative"
    NEG_POS = "NegPos"  # xi1 < 0 <= xi2: only the strong model is worth a pass
    POS_NEG = "PosNeg"  # xi2 < 0 <= xi1: only the standard model is worth a pass


@dataclass(frozen=True)
class ModelParams:
    """Per-pass characteristics of one model.

    Costs are normalized monetary units; in a standard (unthrottled)
    configuration latencies also live in [0, 1], which GameConfig enforces.
    """

    p: float  # success probability per pass, in (0, 1)
    t: float  # user latency cost per pass, >= 0
    c: float  # provider compute cost per pass, in [0, 1]

    def __post_init__(self) -> None:
        for name in ("p", "t", "c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConfigError(f"model parameter {name} must be a finite number, got {v!r}")
        if not 0.0 < self.p < 1.0:
            raise ConfigError(f"success probability must satisfy 0 < p < 1, got p={self.p}")
        if self.t < 0.0:
            raise ConfigError(f"latency cost must satisfy t >= 0, got t={self.t}")
        if not 0.0 <= self.c <= 1.0:
            raise ConfigError(f"compute cost must satisfy 0 <= c <= 1, got c={self.c}")


@dataclass(frozen=True)
class GameConfig:
    """Full parameterization of one provider/user game.

    The standing ordering assumptions are strict: model 1 is cheaper,
    faster, and weaker than model 2 (several closed forms divide by
    p2 - p1 or compare c2 - c1).  ``throttled=True`` marks a config whose
    latencies were deliberately inflated; those may leave the normalized
    [0, 1] range and need not preserve t1 < t2.
    """

    m1: ModelParams
    m2: ModelParams
    V: float  # user value of a successful completion, > 0
    P: float  # provider penalty per abandoned task, > 0
    throttled: bool = False

    def __post_init__(self) -> None:
        for name in ("V", "P"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0.0):
                raise ConfigError(f"{name} must be a finite positive number, got {v!r}")
        if not self.m1.p < self.m2.p:
            raise ConfigError(
                f"success probabilities must satisfy p1 < p2 strictly, got p1={self.m1.p}, p2={self.m2.p}"
            )
        if not self.m1.c < self.m2.c:
            raise ConfigError(
                f"compute costs must satisfy c1 < c2 strictly, got c1={self.m1.c}, c2={self.m2.c}"
            )
        if not self.throttled:
            if self.m1.t > 1.0 or self.m2.t > 1.0:
                raise ConfigError(
                    f"latency costs must satisfy t <= 1, got t1={self.m1.t}, t2={self.m2.t}"
                )
            if not self.m1.t < self.m2.t:
                raise ConfigError(
                    f"latency costs must satisfy t1 < t2 strictly, got t1={self.m1.t}, t2={self.m2.t}"
                )

    # Scalar accessors keep formula code close to the usual notation.
    @property
    def p1(self) -> float:
        return self.m1.p

    @property
    def p2(self) -> float:
        return self.m2.p

    @property
    def t1(self) -> float:
        return self.m1.t

    @property
    def t2(self) -> float:
        return self.m2.t

    @property
    def c1(self) -> float:
        return self.m1.c

    @property
    def c2(self) -> float:
        return self.m2.c

    @property
    def xi1(self) -> float:
        """Net value per pass of model 1: V*p1 - t1."""
        return self.V * self.p1 - self.t1

    @property
    def xi2(self) -> float:
        """Net value per pass of model 2: V*p2 - t2."""
        return self.V * self.p2 - self.t2

    @property
    def cop1(self) -> float:
        """Cost-of-pass of model 1: expected provider spend per success, c1/p1."""
        return self.c1 / self.p1

    @property
    def cop2(self) -> float:
        """Cost-of-pass of model 2: c2/p2."""
        return self.c2 / self.p2

    @property
    def incremental_cost(self) -> float:
        """Incremental cost per unit of success probability, (c2-c1)/(p2-p1)."""
        return (self.c2 - self.c1) / (self.p2 - self.p1)

    @classmethod
    def create(
        cls,
        p1: float,
        p2: float,
        t1: float,
        t2: float,
        c1: float,
        c2: float,
        V: float,
        P: float,
    ) -> GameConfig:
        return cls(m1=ModelParams(p1, t1, c1), m2=ModelParams(p2, t2, c2), V=V, P=P)

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> GameConfig:
        """Build a config from a flat {p1,p2,t1,t2,c1,c2,V,P} document."""
        missing = [k for k in CONFIG_FIELDS if k not in data]
        if missing:
            raise ConfigError(f"config document is missing fields: {', '.join(missing)}")
        extra = [k for k in data if k not in CONFIG_FIELDS]
        if extra:
            raise ConfigError(f"config document has unknown fields: {', '.join(sorted(extra))}")
        values = {}
        for key in CONFIG_FIELDS:
            raw = data[key]
            if not isinstance(raw, (int, float)) or isinstance(raw, bool):
                raise ConfigError(f"config field {key} must be a number, got {raw!r}")
            values[key] = float(raw)
        return cls.create(**values)

    def to_mapping(self) -> dict[str, float]:
        return {
            "p1": self.p1,
            "p2": self.p2,
            "t1": self.t1,
            "t2": self.t2,
            "c1": self.c1,
            "c2": self.c2,
            "V": self.V,
            "P": self.P,
        }

    def with_latencies(self, t1: float, t2: float) -> GameConfig:
        """Same game with replaced latencies, allowed outside [0, 1] and unordered.

        Used by throttling analysis, where the provider inflates latencies
        past V*p_i; nothing in the solver divides by t2 - t1.
        """
        return GameConfig(
            m1=ModelParams(self.p1, float(t1), self.c1),
            m2=ModelParams(self.p2, float(t2), self.c2),
            V=self.V,
            P=self.P,
            throttled=True,
        )


@dataclass(frozen=True)
class NetValues:
    """Per-pass net values and the sign regime they induce."""

    xi1: float
    xi2: float
    regime: Regime


def net_values(cfg: GameConfig) -> NetValues:
    """Net value per pass of each model, xi_i = V*p_i - t_i, plus the regime.

    Exact zeros are classified on the value-dominated side, keeping the
    regime map a partition.
    """
    xi1 = cfg.xi1
    xi2 = cfg.xi2
    if xi1 >= 0.0:
        regime = Regime.BOTH_POSITIVE if xi2 >= 0.0 else Regime.POS_NEG
    else:
        regime = Regime.NEG_POS if xi2 >= 0.0 else Regime.BOTH_NEGATIVE
    return NetValues(xi1=xi1, xi2=xi2, regime=regime)


@dataclass(frozen=True)
class ProviderPolicy:
    """Routing commitment: initial model i and cascade probability s.

    s is semantically inert when i=2 (there is nothing to cascade to);
    equilibrium reporting canonicalizes it to 0 so policies compare equal.
    """

    i: int
    s: float = 0.0

    def __post_init__(self) -> None:
        if self.i not in (1, 2):
            raise ConfigError(f"initial route must be model 1 or 2, got i={self.i!r}")
        if not (isinstance(self.s, (int, float)) and math.isfinite(self.s) and 0.0 <= self.s <= 1.0):
            raise ConfigError(f"cascade probability must satisfy 0 <= s <= 1, got s={self.s!r}")

    def canonical(self) -> ProviderPolicy:
        if self.i == 2 and self.s != 0.0:
            return ProviderPolicy(i=2, s=0.0)
        return self


@dataclass(frozen=True)
class UserResponse:
    """Stationary abandonment probability chosen by the user."""

    q: float

    def __post_init__(self) -> None:
        if not (isinstance(self.q, (int, float)) and math.isfinite(self.q) and 0.0 <= self.q <= 1.0):
            raise ConfigError(f"abandonment probability must satisfy 0 <= q <= 1, got q={self.q!r}")


@dataclass(frozen=True)
class Outcomes:
    """The five expected session functionals for one (i, s, q) triple.

    U and J are always composed from S, L, C through their defining
    identities, so U == V*S - L and J == C + P*(1 - S) hold bit for bit.
    """

    S: float  # eventual success probability
    L: float  # expected total user delay
    C: float  # expected provider service cost
    U: float  # user utility, V*S - L
    J: float  # provider cost, C + P*(1 - S)


def _validate_q(q: float) -> float:
    if not (isinstance(q, (int, float)) and math.isfinite(q) and 0.0 <= q <= 1.0):
        raise ConfigError(f"abandonment probability must satisfy 0 <= q <= 1, got q={q!r}")
    return float(q)


def alpha(cfg: GameConfig, q):
    """Probability that model 1 fails a pass and the user stays: (1-p1)(1-q)."""
    return (1.0 - cfg.p1) * (1.0 - q)


def beta(cfg: GameConfig, q):
    """Expected number of model-2 calls before absorption once routed there."""
    return 1.0 / (cfg.p2 + (1.0 - cfg.p2) * q)


def outcome_components(cfg: GameConfig, i: int, s, q):
    """Closed-form (S, L, C) for policy (i, s) and abandonment q.

    s and q may be floats or broadcastable numpy arrays; the return values
    follow the broadcast shape.  For i=1 every functional is the same
    ratio X = (x1 + alpha*beta*x2*s) / (1 - alpha*(1-s)) with (x1, x2)
    instantiated per functional; for i=2 everything is beta(q) times the
    per-pass quantity, independent of s.
    """
    b = beta(cfg, q)
    if i == 2:
        S = b * cfg.p2
        L = b * cfg.t2
        C = b * cfg.c2
        return S, L, C
    a = alpha(cfg, q)
    den = 1.0 - a * (1.0 - s)
    # p1 > 0 forces alpha < 1, so den > 0 on any valid input.
    assert np.all(den > 0.0), f"absorption denominator must be positive, got min {np.min(den)}"
    ab_s = a * b * s
    S = (cfg.p1 + ab_s * cfg.p2) / den
    L = (cfg.t1 + ab_s * cfg.t2) / den
    C = (cfg.c1 + ab_s * cfg.c2) / den
    return S, L, C


def user_utility(cfg: GameConfig, i: int, s, q):
    """Expected user utility U_i(s, q) = V*S - L, array-friendly."""
    if i == 2:
        return beta(cfg, q) * cfg.xi2
    a = alpha(cfg, q)
    den = 1.0 - a * (1.0 - s)
    return (cfg.xi1 + a * beta(cfg, q) * cfg.xi2 * s) / den


def provider_cost(cfg: GameConfig, i: int, s, q):
    """Expected provider cost J_i(s, q) = C + P*(1 - S), array-friendly."""
    S, _, C = outcome_components(cfg, i, s, q)
    return C + cfg.P * (1.0 - S)


def expected_outcomes(cfg: GameConfig, pol: ProviderPolicy, q: float) -> Outcomes:
    """All five expected functionals for one policy pair."""
    q = _validate_q(q)
    S, L, C = outcome_components(cfg, pol.i, pol.s, q)
    S, L, C = float(S), float(L), float(C)
    return Outcomes(S=S, L=L, C=C, U=cfg.V * S - L, J=C + cfg.P * (1.0 - S))
