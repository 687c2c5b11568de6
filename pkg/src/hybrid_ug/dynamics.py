"""Fermi imitation rule, one-step transition rates and fixation probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass

from hybrid_ug import _kernels
from hybrid_ug.game import GameParams, Level, PopulationConfig, Role


class UnreachableFixation(ValueError):
    """Some T+(j) and T-(j) are both zero, so the ratio in the fixation sum
    is 0/0 and the formula does not apply."""


@dataclass(frozen=True)
class TransitionRates:
    """Probabilities of the High count moving up (t_plus) or down (t_minus)."""

    t_plus: float
    t_minus: float


@dataclass(frozen=True)
class FixationQuery:
    """A single mutant of `mutant_level` invading the complementary resident
    population of `role`, with the opposing population frozen monomorphic at
    `opposing_state`."""

    role: Role
    mutant_level: Level
    opposing_state: Level
    cfg: PopulationConfig
    game: GameParams

    @property
    def opposing_k(self) -> int:
        n_opp = self.cfg.n_r if self.role is Role.PROPOSER else self.cfg.n_p
        return n_opp if self.opposing_state is Level.HIGH else 0


def fermi(pi_self: float, pi_model: float, beta: float) -> float:
    """Probability of copying the role model: 1/(1 + exp(-beta*(pi_model - pi_self))).

    The exponent is clamped so beta up to ~1000 with unit payoff gaps cannot
    overflow; equal payoffs or beta = 0 give exactly 0.5.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return _kernels.fermi_kernel(pi_self, pi_model, beta)


def transition_rates(
    role: Role, k: int, opposing_k: int, cfg: PopulationConfig, game: GameParams
) -> TransitionRates:
    """One-step rates for the High count of `role` at k, opposing count frozen."""
    n = cfg.human_count(role)
    n_opp = cfg.n_r if role is Role.PROPOSER else cfg.n_p
    if not (0 <= k <= n):
        raise ValueError(f"k={k} outside [0, {n}]")
    if not (0 <= opposing_k <= n_opp):
        raise ValueError(f"opposing_k={opposing_k} outside [0, {n_opp}]")
    kernel = (
        _kernels.proposer_rates_kernel
        if role is Role.PROPOSER
        else _kernels.receiver_rates_kernel
    )
    t_plus, t_minus = kernel(
        k, opposing_k, cfg.n_p, cfg.n_r, cfg.m_p, cfg.m_r,
        game.h, game.l, cfg.beta, cfg.discriminatory,
    )
    return TransitionRates(t_plus=t_plus, t_minus=t_minus)


def log_fixation_probability(q: FixationQuery) -> float:
    """log of the fixation probability of the single mutant described by `q`.

    Evaluated with a max-shifted exponential sum over the cumulative log
    rate-ratios (see the kernel), which keeps beta = 100 runs finite and
    resolves probabilities far below the double underflow threshold. Returns
    -inf when the mutant lineage can never advance; raises UnreachableFixation
    on a 0/0 rate ratio.
    """
    cfg, game = q.cfg, q.game
    log_rho = _kernels.fixation_log_kernel(
        q.role is Role.PROPOSER,
        q.mutant_level is Level.HIGH,
        q.opposing_k,
        cfg.n_p, cfg.n_r, cfg.m_p, cfg.m_r,
        game.h, game.l, cfg.beta, cfg.discriminatory,
    )
    if math.isnan(log_rho):
        raise UnreachableFixation(
            f"T+ and T- both vanish along the path for query {q}"
        )
    return log_rho


def fixation_probability(q: FixationQuery) -> float:
    """Fixation probability of the single mutant described by `q`.

    exp of :func:`log_fixation_probability`; underflows to 0 below e^(-745),
    use the log form where such values must stay distinguishable.
    """
    return math.exp(log_fixation_probability(q))
