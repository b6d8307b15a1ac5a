"""User-side analysis: optimal routes, misalignment, throttling, sweeps.

The provider minimizes cost while the user maximizes utility; the
misalignment gap is the utility the user loses to that difference.
Throttling analysis quantifies the provider's temptation to inflate
latencies past the user's value per pass, and the sweep operation maps
any two parameters (raw or composite) onto a CSV grid of per-cell game
solutions for the plotting toolkit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .model import (
    ABS_TOL,
    ConfigError,
    GameConfig,
    ProviderPolicy,
    Regime,
    UserResponse,
    expected_outcomes,
    net_values,
)
from .optimizer import Equilibrium, solve_equilibrium
from .response import user_best_response

ALIGNED_TOL = 1e-9
PREDICATE_BOUNDARY_BAND = 1e-6

SWEEP_HEADER = "a1,a2,regime,i_star,s_star,q_star,S,U,J,delta_U,throttle_gain,feasible"

RAW_AXES = ("p1", "p2", "t1", "t2", "c1", "c2", "V", "P")
COMPOSITE_AXES = ("xi1", "xi2", "cop_gap")


@dataclass(frozen=True)
class UserOptimum:
    """Routing policy the user would pick if they controlled the provider."""

    policy: ProviderPolicy
    response: UserResponse
    utility: float


@dataclass(frozen=True)
class AlignmentPredicate:
    """Closed-form alignment condition for the active regime.

    ``lhs``/``rhs`` are the two sides of the relevant comparison: the two
    rank differences in the same-sign regimes, and (net value of the
    equilibrium route, equilibrium cascade level) in the mixed regimes.
    """

    kind: str
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class MisalignmentReport:
    delta_u: float
    user_opt: UserOptimum
    provider_opt: Equilibrium
    aligned: bool
    predicate: AlignmentPredicate


@dataclass(frozen=True)
class ThrottleVariant:
    """One throttling option: which latencies were inflated and its payoff."""

    name: str  # "model1" | "model2" | "both"
    t_hat: tuple[float, float]
    j_post: float
    gain: float


@dataclass(frozen=True)
class ThrottleReport:
    """Effect of inflating latencies past the user's value per pass.

    The headline fields describe the best of the three variants (ties
    prefer the joint throttle); ``variants`` records all three so the
    full-throttle gain is always available.  ``t_hat`` may leave the
    normalized [0, 1] latency range by construction.
    """

    j_pre: float
    j_post: float
    gain: float
    t_hat: tuple[float, float]
    variant: str
    delta_u_post: float
    pre: Equilibrium
    post: Equilibrium
    variants: tuple[ThrottleVariant, ...]

    @property
    def full_throttle(self) -> ThrottleVariant:
        """The both-models variant (the construction behind the gain bound)."""
        return self.variants[-1]


def user_optimal_route(cfg: GameConfig) -> UserOptimum:
    """Maximize user utility over routes and cascade levels.

    Closed form per regime: with both models value-dominated the user
    wants the better net-value-per-success route; with both
    latency-dominated they abandon either way and prefer the smaller
    first-pass loss; in the mixed regimes they want the value-dominated
    model routed statically.  Ties go to the standard model.
    """
    nv = net_values(cfg)
    if nv.regime is Regime.BOTH_POSITIVE:
        u1, u2 = nv.xi1 / cfg.p1, nv.xi2 / cfg.p2
        if u2 > u1:
            return UserOptimum(ProviderPolicy(2, 0.0), UserResponse(0.0), u2)
        return UserOptimum(ProviderPolicy(1, 0.0), UserResponse(0.0), u1)
    if nv.regime is Regime.BOTH_NEGATIVE:
        if nv.xi2 > nv.xi1:
            return UserOptimum(ProviderPolicy(2, 0.0), UserResponse(1.0), nv.xi2)
        return UserOptimum(ProviderPolicy(1, 0.0), UserResponse(1.0), nv.xi1)
    if nv.regime is Regime.NEG_POS:
        return UserOptimum(ProviderPolicy(2, 0.0), UserResponse(0.0), nv.xi2 / cfg.p2)
    return UserOptimum(ProviderPolicy(1, 0.0), UserResponse(0.0), nv.xi1 / cfg.p1)


def _sign(x: float) -> int:
    return (x > 0.0) - (x < 0.0)


def _alignment_predicate(cfg: GameConfig, eq: Equilibrium) -> tuple[AlignmentPredicate, float]:
    """Evaluate the regime's alignment condition; also return the distance
    to the nearest predicate boundary (sign predicates are discontinuous,
    so configs inside a small band are legitimately ambiguous)."""
    nv = net_values(cfg)
    if nv.regime is Regime.BOTH_POSITIVE:
        lhs = cfg.cop1 - cfg.cop2
        rhs = nv.xi2 / cfg.p2 - nv.xi1 / cfg.p1
        pred = AlignmentPredicate(
            kind="cost-rank-matches-utility-rank",
            lhs=lhs,
            rhs=rhs,
            holds=_sign(lhs) == _sign(rhs),
        )
        return pred, min(abs(lhs), abs(rhs))
    if nv.regime is Regime.BOTH_NEGATIVE:
        lhs = nv.xi2 - nv.xi1
        rhs = cfg.P - cfg.incremental_cost
        pred = AlignmentPredicate(
            kind="penalty-rank-matches-utility-rank",
            lhs=lhs,
            rhs=rhs,
            holds=_sign(lhs) == _sign(rhs),
        )
        return pred, min(abs(lhs), abs(rhs))
    xi_star = nv.xi1 if eq.policy.i == 1 else nv.xi2
    s_star = eq.policy.s
    pred = AlignmentPredicate(
        kind="equilibrium-routes-value-model-statically",
        lhs=xi_star,
        rhs=s_star,
        holds=xi_star > 0.0 and s_star <= ABS_TOL,
    )
    band = abs(xi_star) if s_star <= ABS_TOL else min(abs(xi_star), s_star)
    return pred, band


def misalignment_gap(cfg: GameConfig, equilibrium: Equilibrium | None = None) -> MisalignmentReport:
    """Utility the user loses to the provider's cost-optimal routing.

    The numeric gap is authoritative; the closed-form predicate is
    evaluated alongside it and the two must agree whenever the config is
    not within the boundary band of the predicate (a disagreement outside
    the band indicates an implementation bug).
    """
    eq = equilibrium if equilibrium is not None else solve_equilibrium(cfg)
    uo = user_optimal_route(cfg)
    delta_u = uo.utility - eq.outcomes.U
    aligned = delta_u <= ALIGNED_TOL
    predicate, boundary_distance = _alignment_predicate(cfg, eq)
    if boundary_distance > PREDICATE_BOUNDARY_BAND and predicate.holds != aligned:
        raise AssertionError(
            f"alignment predicate {predicate} disagrees with numeric gap "
            f"{delta_u} for config {cfg.to_mapping()}"
        )
    return MisalignmentReport(
        delta_u=delta_u,
        user_opt=uo,
        provider_opt=eq,
        aligned=aligned,
        predicate=predicate,
    )


def throttle_analysis(
    cfg: GameConfig,
    epsilon: float = 1e-6,
    pre_equilibrium: Equilibrium | None = None,
) -> ThrottleReport:
    """Best of the three one-sided/joint latency throttles.

    Each throttled game replaces the targeted latencies with V*p_i +
    epsilon (just past value domination, since only the sign of the
    throttled net value matters) and re-solves.  Ties between variants
    prefer the joint throttle.
    """
    if not epsilon > 0.0:
        raise ConfigError(f"throttle epsilon must be positive, got {epsilon}")
    pre = pre_equilibrium if pre_equilibrium is not None else solve_equilibrium(cfg)
    j_pre = pre.outcomes.J
    t1_hat = cfg.V * cfg.p1 + epsilon
    t2_hat = cfg.V * cfg.p2 + epsilon
    plans = (
        ("model1", (t1_hat, cfg.t2)),
        ("model2", (cfg.t1, t2_hat)),
        ("both", (t1_hat, t2_hat)),
    )
    variants: list[ThrottleVariant] = []
    best: tuple[ThrottleVariant, GameConfig, Equilibrium] | None = None
    for name, t_hat in plans:
        throttled = cfg.with_latencies(*t_hat)
        eq = solve_equilibrium(throttled)
        variant = ThrottleVariant(
            name=name, t_hat=t_hat, j_post=eq.outcomes.J, gain=j_pre - eq.outcomes.J
        )
        variants.append(variant)
        if best is None or variant.j_post <= best[0].j_post:
            best = (variant, throttled, eq)
    chosen, throttled, post = best
    delta_u_post = user_optimal_route(throttled).utility - post.outcomes.U
    return ThrottleReport(
        j_pre=j_pre,
        j_post=chosen.j_post,
        gain=chosen.gain,
        t_hat=chosen.t_hat,
        variant=chosen.name,
        delta_u_post=delta_u_post,
        pre=pre,
        post=post,
        variants=tuple(variants),
    )


@dataclass(frozen=True)
class SweepAxis:
    """One sweepable quantity and its value range.

    Raw axes replace a config field directly.  Composite axes re-derive a
    field: xi1/xi2 adjust the matching latency at fixed V and p, and
    cop_gap (c1/p1 - c2/p2) adjusts c2 at fixed c1.
    """

    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self) -> None:
        if self.name not in RAW_AXES + COMPOSITE_AXES:
            raise ConfigError(
                f"unknown sweep axis {self.name!r}; expected one of "
                f"{', '.join(RAW_AXES + COMPOSITE_AXES)}"
            )
        if self.n < 1:
            raise ConfigError(f"axis resolution must be >= 1, got {self.n}")
        if self.n > 1 and not self.lo < self.hi:
            raise ConfigError(f"axis range must satisfy lo < hi, got [{self.lo}, {self.hi}]")

    def values(self) -> np.ndarray:
        if self.n == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class SweepCell:
    a1: float
    a2: float
    feasible: bool
    regime: str = ""
    i_star: int | None = None
    s_star: float | None = None
    q_star: float | None = None
    S: float | None = None
    U: float | None = None
    J: float | None = None
    delta_u: float | None = None
    throttle_gain: float | None = None


@dataclass(frozen=True)
class SweepResult:
    axis1: SweepAxis
    axis2: SweepAxis
    cells: tuple[SweepCell, ...]  # row-major, axis1 outer
    policy: ProviderPolicy | None  # pinned policy, or None for equilibrium sweeps

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(SWEEP_HEADER + "\n")
        for cell in self.cells:
            out.write(_cell_row(cell) + "\n")
        return out.getvalue()


def _fmt(x: float | int | None) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _cell_row(cell: SweepCell) -> str:
    return ",".join(
        [
            _fmt(cell.a1),
            _fmt(cell.a2),
            cell.regime,
            _fmt(cell.i_star),
            _fmt(cell.s_star),
            _fmt(cell.q_star),
            _fmt(cell.S),
            _fmt(cell.U),
            _fmt(cell.J),
            _fmt(cell.delta_u),
            _fmt(cell.throttle_gain),
            "true" if cell.feasible else "false",
        ]
    )


def _apply_axis(params: dict[str, float], name: str, value: float) -> None:
    if name in RAW_AXES:
        params[name] = float(value)
    elif name == "xi1":
        params["t1"] = params["V"] * params["p1"] - float(value)
    elif name == "xi2":
        params["t2"] = params["V"] * params["p2"] - float(value)
    elif name == "cop_gap":
        params["c2"] = params["p2"] * (params["c1"] / params["p1"] - float(value))
    else:  # pragma: no cover - guarded by SweepAxis validation
        raise ConfigError(f"unknown sweep axis {name!r}")


def _evaluate_cell(
    cfg: GameConfig, policy: ProviderPolicy | None, a1: float, a2: float, epsilon: float
) -> SweepCell:
    nv = net_values(cfg)
    if policy is None:
        eq = solve_equilibrium(cfg)
        pol, q_star, out = eq.policy, eq.q_star, eq.outcomes
        pre = eq
    else:
        br = user_best_response(cfg, policy)
        pol, q_star = policy, br.q_star
        out = expected_outcomes(cfg, policy, q_star)
        pre = solve_equilibrium(cfg)
    delta_u = user_optimal_route(cfg).utility - out.U
    gain = throttle_analysis(cfg, epsilon=epsilon, pre_equilibrium=pre).gain
    return SweepCell(
        a1=a1,
        a2=a2,
        feasible=True,
        regime=nv.regime.value,
        i_star=pol.i,
        s_star=pol.s,
        q_star=q_star,
        S=out.S,
        U=out.U,
        J=out.J,
        delta_u=delta_u,
        throttle_gain=gain,
    )


def sweep(
    template: GameConfig,
    axis1: SweepAxis,
    axis2: SweepAxis,
    policy: ProviderPolicy | None = None,
    epsilon: float = 1e-6,
) -> SweepResult:
    """Solve the game over a 2-D parameter grid.

    Cells whose derived configuration violates an invariant are emitted
    with ``feasible=false`` and blank fields rather than silently
    clamped.  With a pinned ``policy`` the per-cell record reports the
    user best response to it; otherwise the full equilibrium.  Rows are
    emitted in deterministic row-major order, axis1 outermost.
    """
    base = template.to_mapping()
    cells: list[SweepCell] = []
    feasible_count = 0
    for v1 in axis1.values():
        for v2 in axis2.values():
            params = dict(base)
            _apply_axis(params, axis1.name, v1)
            _apply_axis(params, axis2.name, v2)
            try:
                cfg = GameConfig.from_mapping(params)
            except ConfigError:
                cells.append(SweepCell(a1=float(v1), a2=float(v2), feasible=False))
                continue
            cells.append(_evaluate_cell(cfg, policy, float(v1), float(v2), epsilon))
            feasible_count += 1
    if feasible_count == 0:
        raise ConfigError(
            f"sweep over {axis1.name} x {axis2.name} produced zero feasible cells"
        )
    return SweepResult(axis1=axis1, axis2=axis2, cells=tuple(cells), policy=policy)
