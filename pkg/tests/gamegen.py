"""Seeded random game generators used across the test suite.

Samplers keep every drawn configuration strictly inside the validity
region and away from the sign boundaries of the net values (|xi_i| is
bounded below), since behavior at an exact sign boundary is governed by
the tie rule rather than by generic optimality.
"""

from __future__ import annotations

import numpy as np

from routegame.model import ConfigError, GameConfig, Regime, net_values

XI_MARGIN = 1e-3

REGIMES = (
    Regime.BOTH_POSITIVE,
    Regime.BOTH_NEGATIVE,
    Regime.NEG_POS,
    Regime.POS_NEG,
)


def _draw_base(rng: np.random.Generator) -> dict[str, float]:
    p1 = rng.uniform(0.15, 0.75)
    p2 = rng.uniform(p1 + 0.08, 0.93)
    c1 = rng.uniform(0.05, 0.55)
    c2 = rng.uniform(c1 + 0.04, 0.95)
    return {
        "p1": p1,
        "p2": p2,
        "c1": c1,
        "c2": c2,
        "V": rng.uniform(0.4, 2.0),
        "P": rng.uniform(0.03, 1.2),
    }


def _xi_range(v_p: float, sign: int) -> tuple[float, float] | None:
    """Feasible xi window keeping t = V*p - xi inside [0, 1], with margin."""
    if sign > 0:
        lo, hi = max(XI_MARGIN, v_p - 1.0), v_p
    else:
        lo, hi = v_p - 1.0, -XI_MARGIN
    return (lo, hi) if lo < hi else None


def random_config(
    rng: np.random.Generator,
    regime: Regime | None = None,
    max_tries: int = 5000,
) -> GameConfig:
    """Draw a valid config, optionally inside one target regime."""
    for _ in range(max_tries):
        base = _draw_base(rng)
        if regime is None:
            t1 = rng.uniform(0.0, 0.97)
            t2 = rng.uniform(t1 + 0.01, 1.0)
        else:
            want1 = 1 if regime in (Regime.BOTH_POSITIVE, Regime.POS_NEG) else -1
            want2 = 1 if regime in (Regime.BOTH_POSITIVE, Regime.NEG_POS) else -1
            r1 = _xi_range(base["V"] * base["p1"], want1)
            r2 = _xi_range(base["V"] * base["p2"], want2)
            if r1 is None or r2 is None:
                continue
            xi1 = rng.uniform(*r1)
            xi2 = rng.uniform(*r2)
            t1 = base["V"] * base["p1"] - xi1
            t2 = base["V"] * base["p2"] - xi2
        try:
            cfg = GameConfig.create(
                p1=base["p1"],
                p2=base["p2"],
                t1=t1,
                t2=t2,
                c1=base["c1"],
                c2=base["c2"],
                V=base["V"],
                P=base["P"],
            )
        except ConfigError:
            continue
        nv = net_values(cfg)
        if min(abs(nv.xi1), abs(nv.xi2)) < XI_MARGIN:
            continue
        if regime is not None and nv.regime is not regime:
            continue
        return cfg
    raise RuntimeError(f"could not sample a config for regime {regime}")


def random_configs(
    rng: np.random.Generator,
    count: int,
    regime: Regime | None = None,
) -> list[GameConfig]:
    return [random_config(rng, regime) for _ in range(count)]


def random_configs_all_regimes(rng: np.random.Generator, per_regime: int) -> list[GameConfig]:
    out: list[GameConfig] = []
    for regime in REGIMES:
        out.extend(random_configs(rng, per_regime, regime))
    return out
