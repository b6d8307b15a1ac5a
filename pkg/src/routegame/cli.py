"""Command-line front end: config ingestion, subcommand dispatch, record emission.

Every subcommand reads a JSON config document with fields
{p1,p2,t1,t2,c1,c2,V,P} and emits either a flat key=value record or, for
sweeps, a CSV grid.  Output is a pure function of (config, options):
re-running a command produces identical bytes.

Exit codes: 0 success, 2 validation error (the message names the violated
invariant), 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .analysis import (
    SweepAxis,
    misalignment_gap,
    sweep,
    throttle_analysis,
)
from .mc import estimate
from .model import ConfigError, GameConfig, ProviderPolicy
from .optimizer import brute_force_optimum, solve_equilibrium
from .response import user_best_response


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _record(pairs) -> str:
    return "".join(f"{key}={_fmt(value)}\n" for key, value in pairs)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_config(path: str) -> GameConfig:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return GameConfig.from_mapping(data)


def _parse_axis(spec: str, n: int) -> SweepAxis:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"axis must be name:lo:hi, got {spec!r}")
    name, lo_s, hi_s = parts
    try:
        lo, hi = float(lo_s), float(hi_s)
    except ValueError as exc:
        raise ConfigError(f"axis bounds must be numbers, got {spec!r}") from exc
    return SweepAxis(name=name, lo=lo, hi=hi, n=n)


def _parse_res(spec: str) -> tuple[int, int]:
    parts = spec.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"resolution must be N1xN2, got {spec!r}")
    try:
        n1, n2 = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"resolution must be N1xN2 with integers, got {spec!r}") from exc
    return n1, n2


def _cmd_solve(args) -> None:
    cfg = _load_config(args.config)
    eq = brute_force_optimum(cfg) if args.brute_force else solve_equilibrium(cfg)
    out = eq.outcomes
    _emit(
        _record(
            [
                ("i_star", eq.policy.i),
                ("s_star", eq.policy.s),
                ("q_star", eq.q_star),
                ("S", out.S),
                ("L", out.L),
                ("C", out.C),
                ("U", out.U),
                ("J", out.J),
                ("provenance", eq.provenance.value),
                ("s_lo", eq.s_interval[0]),
                ("s_hi", eq.s_interval[1]),
            ]
        ),
        args.out,
    )


def _cmd_best_response(args) -> None:
    cfg = _load_config(args.config)
    pol = ProviderPolicy(i=args.i, s=args.s)
    br = user_best_response(cfg, pol)
    pairs = [
        ("i", pol.i),
        ("s", pol.s),
        ("regime", br.regime.value),
        ("q_star", br.q_star),
        ("kind", br.kind.value),
    ]
    if br.thresholds is not None:
        ts = br.thresholds
        if ts.s0 is not None:
            pairs.append(("s0", ts.s0))
        if ts.s_low is not None:
            pairs.append(("sL", ts.s_low))
        if ts.s_high is not None:
            pairs.append(("sH", ts.s_high))
    _emit(_record(pairs), args.out)


def _cmd_sweep(args) -> None:
    cfg = _load_config(args.config)
    n1, n2 = _parse_res(args.res)
    axis1 = _parse_axis(args.axis1, n1)
    axis2 = _parse_axis(args.axis2, n2)
    policy = None
    if args.i is not None:
        policy = ProviderPolicy(i=args.i, s=args.s if args.s is not None else 0.0)
    elif args.s is not None:
        raise ConfigError("--s requires --i when pinning a sweep policy")
    result = sweep(cfg, axis1, axis2, policy=policy, epsilon=args.epsilon)
    _emit(result.to_csv(), args.out)


def _cmd_simulate(args) -> None:
    cfg = _load_config(args.config)
    pol = ProviderPolicy(i=args.i, s=args.s)
    q = args.q if args.q is not None else user_best_response(cfg, pol).q_star
    est = estimate(cfg, pol, q, n=args.n, seed=args.seed)
    pairs = [("i", pol.i), ("s", pol.s), ("q", q), ("n", est.n), ("seed", est.seed)]
    for key in ("S", "L", "C", "U", "J"):
        pairs.append((f"mean_{key}", est.mean[key]))
        pairs.append((f"stderr_{key}", est.stderr[key]))
    pairs.append(("max_steps_hit", est.max_steps_hit))
    _emit(_record(pairs), args.out)


def _cmd_throttle(args) -> None:
    cfg = _load_config(args.config)
    rep = throttle_analysis(cfg, epsilon=args.epsilon)
    pairs = [
        ("j_pre", rep.j_pre),
        ("j_post", rep.j_post),
        ("gain", rep.gain),
        ("variant", rep.variant),
        ("t1_hat", rep.t_hat[0]),
        ("t2_hat", rep.t_hat[1]),
        ("delta_u_post", rep.delta_u_post),
    ]
    for variant in rep.variants:
        pairs.append((f"gain_{variant.name}", variant.gain))
    _emit(_record(pairs), args.out)


def _cmd_misalign(args) -> None:
    cfg = _load_config(args.config)
    rep = misalignment_gap(cfg)
    eq = rep.provider_opt
    _emit(
        _record(
            [
                ("delta_u", rep.delta_u),
                ("aligned", rep.aligned),
                ("user_i", rep.user_opt.policy.i),
                ("user_s", rep.user_opt.policy.s),
                ("user_q", rep.user_opt.response.q),
                ("user_U", rep.user_opt.utility),
                ("provider_i", eq.policy.i),
                ("provider_s", eq.policy.s),
                ("provider_q", eq.q_star),
                ("provider_U", eq.outcomes.U),
                ("provider_J", eq.outcomes.J),
                ("predicate_kind", rep.predicate.kind),
                ("predicate_lhs", rep.predicate.lhs),
                ("predicate_rhs", rep.predicate.rhs),
                ("predicate_holds", rep.predicate.holds),
            ]
        ),
        args.out,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="routegame",
        description="Solve the two-model routing/cascading game between a provider and a reactive user.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("config", help="JSON config with fields p1,p2,t1,t2,c1,c2,V,P")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("solve", help="provider-optimal policy and equilibrium record")
    add_common(p)
    p.add_argument("--brute-force", action="store_true", help="use the grid oracle instead of the closed forms")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("best-response", help="user best response to a policy (i, s)")
    add_common(p)
    p.add_argument("--i", type=int, required=True, choices=(1, 2), help="initial route")
    p.add_argument("--s", type=float, default=0.0, help="cascade probability (default 0)")
    p.set_defaults(func=_cmd_best_response)

    p = sub.add_parser("sweep", help="2-D parameter sweep to CSV")
    add_common(p)
    p.add_argument("--axis1", required=True, help="outer axis as name:lo:hi")
    p.add_argument("--axis2", required=True, help="inner axis as name:lo:hi")
    p.add_argument("--res", default="101x101", help="grid resolution N1xN2 (default 101x101)")
    p.add_argument("--i", type=int, default=None, choices=(1, 2), help="pin the routing policy instead of solving")
    p.add_argument("--s", type=float, default=None, help="pinned cascade probability (with --i)")
    p.add_argument("--epsilon", type=float, default=1e-6, help="throttle margin used for the gain column")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("simulate", help="Monte-Carlo estimate of the session functionals")
    add_common(p)
    p.add_argument("--i", type=int, required=True, choices=(1, 2), help="initial route")
    p.add_argument("--s", type=float, default=0.0, help="cascade probability (default 0)")
    p.add_argument("--q", type=float, default=None, help="abandonment probability (default: best response)")
    p.add_argument("--n", type=int, default=200_000, help="episode count (default 200000)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("throttle", help="latency-throttling gain report")
    add_common(p)
    p.add_argument("--epsilon", type=float, default=1e-6, help="margin past V*p_i (default 1e-6)")
    p.set_defaults(func=_cmd_throttle)

    p = sub.add_parser("misalign", help="misalignment gap between user and provider optima")
    add_common(p)
    p.set_defaults(func=_cmd_misalign)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValueError as exc:
        # ConfigError, RegimeError, and argument validation all land here.
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception:
        sys.stderr.write("internal error:\n")
        traceback.print_exc(file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
