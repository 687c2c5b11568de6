"""Agent-based Moran-process simulator: an analytics-independent oracle.

Runs the pairwise-comparison imitation process directly on individual agents,
so fixation fractions and long-run occupancies can be compared against the
analytical formulas without sharing any of their algebra.

Reproducibility: the generator is MT19937 (numba's implementation of the numpy
legacy generator). Each trial owns a stream seeded from (seed, trial index)
via numpy SeedSequence, so results are bit-identical regardless of trial
execution order or worker count. With 32-bit derived seeds, about one
duplicated-seed pair is expected per 10^5 trials; the resulting correlation is
far below the binomial noise floor.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass

import numpy as np

from hybrid_ug import _kernels
from hybrid_ug.dynamics import FixationQuery
from hybrid_ug.game import GameParams, Level, PopulationConfig, Role

GENERATOR_IDENTITY = "mt19937-numba/seedsequence-per-trial"


class SimulationTimeout(RuntimeError):
    """Every realization hit max_steps without absorbing."""


class InsufficientMonomorphicTime(RuntimeError):
    """Less than half of the post-burn-in steps were monomorphic; the mutation
    rate is too large for a small-mutation-limit comparison."""


@dataclass(frozen=True)
class SimConfig:
    """Simulation run description; `mutation_rate` is per update event."""

    cfg: PopulationConfig
    game: GameParams
    seed: int
    mutation_rate: float = 0.0
    max_steps: int = 1_000_000
    trials: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.trials < 1 or self.max_steps < 1:
            raise ValueError("trials and max_steps must be >= 1")


@dataclass(frozen=True)
class FixationEstimate:
    """Monte Carlo fixation fraction with binomial standard error.

    `trials` counts absorbed realizations only; `timeouts` are reported
    separately, never silently dropped.
    """

    p_hat: float
    stderr: float
    trials: int
    timeouts: int = 0

    def agrees_with(self, rho: float, sigmas: float = 3.0) -> bool:
        return abs(self.p_hat - rho) <= sigmas * self.stderr


@dataclass(frozen=True)
class OccupancyEstimate:
    """Fraction of monomorphic post-burn-in time in each corner (STATES order)."""

    occupancy: np.ndarray
    monomorphic_fraction: float
    recorded_steps: int
    realizations: int

    @property
    def argmax_state(self) -> str:
        from hybrid_ug.markov import STATES

        return STATES[int(np.argmax(self.occupancy))]


def _trial_seeds(seed: int, trials: int, offset: int = 0) -> np.ndarray:
    return np.array(
        [
            np.random.SeedSequence((seed, t)).generate_state(1, np.uint32)[0]
            for t in range(offset, offset + trials)
        ],
        dtype=np.int64,
    )


_FIX_ARGS = None


def _fix_init(args) -> None:
    global _FIX_ARGS
    _FIX_ARGS = args


def _fix_chunk(bounds: tuple[int, int]) -> tuple[int, int, int]:
    lo, hi = bounds
    seed, kernel_args = _FIX_ARGS
    seeds = _trial_seeds(seed, hi - lo, offset=lo)
    return _kernels.fixation_trials_kernel(seeds, *kernel_args)


def simulate_fixation(
    q: FixationQuery, sim: SimConfig, workers: int = 1
) -> FixationEstimate:
    """Estimates the fixation probability of `q` by independent races.

    Each realization starts from one mutant among the humans of the focal
    role, the opposing population frozen monomorphic, and runs the imitation
    process until the mutant strategy fixes or goes extinct (mutation must be
    off). Raises SimulationTimeout if no realization absorbs.
    """
    if sim.mutation_rate != 0.0:
        raise ValueError("fixation races require mutation_rate = 0")
    cfg, game = q.cfg, q.game
    kernel_args = (
        q.role is Role.PROPOSER,
        q.mutant_level is Level.HIGH,
        q.opposing_k,
        cfg.n_p, cfg.n_r, cfg.m_p, cfg.m_r,
        game.h, game.l, cfg.beta, cfg.discriminatory,
        sim.max_steps,
    )
    chunk = 4096
    bounds = [
        (lo, min(lo + chunk, sim.trials)) for lo in range(0, sim.trials, chunk)
    ]
    if workers <= 1 or len(bounds) <= 1:
        _fix_init((sim.seed, kernel_args))
        parts = [_fix_chunk(b) for b in bounds]
    else:
        with multiprocessing.Pool(
            workers, initializer=_fix_init, initargs=((sim.seed, kernel_args),)
        ) as pool:
            parts = pool.map(_fix_chunk, bounds)
    fixed = sum(p[0] for p in parts)
    absorbed = sum(p[1] for p in parts)
    timeouts = sum(p[2] for p in parts)
    if absorbed == 0:
        raise SimulationTimeout(
            f"all {sim.trials} realizations exceeded max_steps = {sim.max_steps}"
        )
    p_hat = fixed / absorbed
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / absorbed)
    return FixationEstimate(
        p_hat=p_hat, stderr=stderr, trials=absorbed, timeouts=timeouts
    )


def simulate_long_run(sim: SimConfig) -> OccupancyEstimate:
    """Long-run corner occupancy with both populations evolving under mutation.

    Each realization starts from uniformly random strategy counts, discards a
    burn-in of max_steps // 10, then counts the steps where both human
    populations are monomorphic, per corner. With probability mutation_rate an
    update event replaces imitation by the adoption of a uniformly random
    strategy of the learner's role (self-mutation included, which halves the
    effective rate in a binary strategy space).
    """
    if sim.mutation_rate <= 0.0:
        raise ValueError("long-run occupancy requires mutation_rate > 0")
    cfg, game = sim.cfg, sim.game
    seeds = _trial_seeds(sim.seed, sim.trials)
    counts = np.zeros(4, dtype=np.int64)
    mono = 0
    recorded = 0
    for t in range(sim.trials):
        c, m, r = _kernels.long_run_kernel(
            seeds[t], cfg.n_p, cfg.n_r, cfg.m_p, cfg.m_r,
            game.h, game.l, cfg.beta, cfg.discriminatory,
            sim.mutation_rate, sim.max_steps,
        )
        counts += c
        mono += m
        recorded += r
    if mono < recorded / 2:
        raise InsufficientMonomorphicTime(
            f"only {mono}/{recorded} post-burn-in steps monomorphic; "
            "reduce mutation_rate"
        )
    return OccupancyEstimate(
        occupancy=counts / mono,
        monomorphic_fraction=mono / recorded,
        recorded_steps=recorded,
        realizations=sim.trials,
    )
