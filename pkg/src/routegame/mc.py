"""Monte-Carlo oracle: simulate the routing chain episode by episode.

Every closed form in the package is checked against unbiased sample
estimates from this simulator.  Episodes follow the chain literally:
pay the current model's latency and compute cost, succeed with its
per-pass probability, otherwise abandon with probability q, otherwise
(from model 1) cascade with probability s.  Model 2 is absorbing until
success or abandonment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import GameConfig, ProviderPolicy, _validate_q

FUNCTIONALS = ("S", "L", "C", "U", "J")

MAX_STEPS = 10**6

# Episodes are simulated in fixed-size blocks, each drawing from its own
# RNG stream keyed by (seed, block index); results are then merged in
# block order.  This keeps estimates bit-identical however the blocks are
# scheduled (including across parallel workers).
BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class EpisodeResult:
    """One simulated session."""

    succeeded: bool
    total_latency: float
    total_cost: float
    steps: int
    truncated: bool = False


@dataclass(frozen=True)
class McEstimate:
    """Sample means and standard errors of the five session functionals.

    ``max_steps_hit`` counts episodes truncated at the step cap; any
    truncation disqualifies the run as an oracle value.
    """

    mean: Mapping[str, float]
    stderr: Mapping[str, float]
    n: int
    seed: int
    max_steps_hit: int


def simulate_episode(
    cfg: GameConfig,
    pol: ProviderPolicy,
    q: float,
    rng: np.random.Generator,
    max_steps: int = MAX_STEPS,
) -> EpisodeResult:
    """Run a single session to absorption (or the step cap)."""
    q = _validate_q(q)
    on_m2 = pol.i == 2
    latency = 0.0
    cost = 0.0
    steps = 0
    while steps < max_steps:
        steps += 1
        m = cfg.m2 if on_m2 else cfg.m1
        latency += m.t
        cost += m.c
        if rng.random() < m.p:
            return EpisodeResult(True, latency, cost, steps)
        if rng.random() < q:
            return EpisodeResult(False, latency, cost, steps)
        if not on_m2 and rng.random() < pol.s:
            on_m2 = True
    return EpisodeResult(False, latency, cost, steps, truncated=True)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))
    )


def _simulate_block(
    cfg: GameConfig,
    pol: ProviderPolicy,
    q: float,
    size: int,
    rng: np.random.Generator,
    max_steps: int,
):
    """Vectorized block of episodes; returns (succeeded, latency, cost, truncated)."""
    succeeded = np.zeros(size, dtype=bool)
    truncated = np.zeros(size, dtype=bool)
    latency = np.zeros(size)
    cost = np.zeros(size)
    idx = np.arange(size)
    on_m2 = np.full(size, pol.i == 2)
    for _ in range(max_steps):
        if idx.size == 0:
            break
        u = rng.random((3, idx.size))
        latency[idx] += np.where(on_m2, cfg.t2, cfg.t1)
        cost[idx] += np.where(on_m2, cfg.c2, cfg.c1)
        success = u[0] < np.where(on_m2, cfg.p2, cfg.p1)
        abandon = ~success & (u[1] < q)
        stay = ~(success | abandon)
        succeeded[idx[success]] = True
        on_m2 = (on_m2 | (u[2] < pol.s))[stay]
        idx = idx[stay]
    else:
        truncated[idx] = True
    return succeeded, latency, cost, truncated


def estimate(
    cfg: GameConfig,
    pol: ProviderPolicy,
    q: float,
    n: int,
    seed: int,
    max_steps: int = MAX_STEPS,
) -> McEstimate:
    """Aggregate n independent episodes into per-functional estimates.

    Deterministic for a fixed seed: episode blocks draw from streams
    derived from (seed, block index) and merge in block order.  Truncated
    episodes count as abandoned and are tallied in ``max_steps_hit``.
    """
    if n < 1000:
        raise ValueError(f"estimate needs at least 1000 episodes, got n={n}")
    q = _validate_q(q)
    succeeded = np.empty(n, dtype=bool)
    latency = np.empty(n)
    cost = np.empty(n)
    truncated = np.empty(n, dtype=bool)
    for block, start in enumerate(range(0, n, BLOCK_SIZE)):
        stop = min(start + BLOCK_SIZE, n)
        s_b, l_b, c_b, t_b = _simulate_block(
            cfg, pol, q, stop - start, _block_rng(seed, block), max_steps
        )
        succeeded[start:stop] = s_b
        latency[start:stop] = l_b
        cost[start:stop] = c_b
        truncated[start:stop] = t_b

    success = succeeded.astype(float)
    utility = cfg.V * success - latency
    provider = cost + cfg.P * (1.0 - success)
    samples = {"S": success, "L": latency, "C": cost, "U": utility, "J": provider}
    mean = {k: float(np.mean(v)) for k, v in samples.items()}
    stderr = {k: float(np.std(v, ddof=1) / np.sqrt(n)) for k, v in samples.items()}
    return McEstimate(
        mean=mean,
        stderr=stderr,
        n=n,
        seed=seed,
        max_steps_hit=int(np.count_nonzero(truncated)),
    )
