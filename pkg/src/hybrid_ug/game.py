"""Game definition, population composition and average payoffs.

Two discrete offer levels exist: a fair offer ``h`` and a stingy offer ``l``.
Proposers are High (offer h) or Low (offer l); receivers are High (threshold h)
or Low (threshold l). Each role forms its own well-mixed population, optionally
mixed with committed AI agents.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Role(enum.Enum):
    PROPOSER = "proposer"
    RECEIVER = "receiver"


class Level(enum.Enum):
    HIGH = "H"
    LOW = "L"

    @property
    def other(self) -> "Level":
        return Level.LOW if self is Level.HIGH else Level.HIGH


class AIKind(str, enum.Enum):
    """Behaviour of the AI proposers.

    Samaritan proposers always offer h. Discriminatory proposers offer h only
    to receivers with a high threshold and l otherwise; human proposers
    perceive them as High with probability alpha (see
    :func:`perceived_fair_fraction`). AI receivers are always Samaritan
    (threshold h unconditionally).
    """

    SAMARITAN = "samaritan"
    DISCRIMINATORY = "discriminatory"


@dataclass(frozen=True)
class Strategy:
    role: Role
    level: Level


@dataclass(frozen=True)
class GameParams:
    """Offer pair (h, l) of the discrete Ultimatum Game, 0 <= l < h <= 1."""

    h: float = 0.5
    l: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 <= self.l < self.h <= 1.0):
            raise ValueError(f"require 0 <= l < h <= 1, got h={self.h}, l={self.l}")


@dataclass(frozen=True)
class PopulationConfig:
    """Counts of humans and AI agents per role, AI variant and selection intensity."""

    n_p: int = 100
    n_r: int = 100
    m_p: int = 0
    m_r: int = 0
    ai_kind: AIKind = AIKind.SAMARITAN
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.n_p < 2 or self.n_r < 2:
            raise ValueError("need at least 2 human players per role")
        if self.m_p < 0 or self.m_r < 0:
            raise ValueError("AI counts must be nonnegative")
        if self.beta < 0:
            raise ValueError("selection intensity beta must be >= 0")

    @property
    def discriminatory(self) -> bool:
        return self.ai_kind is AIKind.DISCRIMINATORY

    def human_count(self, role: Role) -> int:
        return self.n_p if role is Role.PROPOSER else self.n_r

    def ai_count(self, role: Role) -> int:
        return self.m_p if role is Role.PROPOSER else self.m_r


@dataclass(frozen=True)
class PopulationState:
    """Counts of High-strategy humans in each role."""

    k_p: int
    k_r: int


def ug_payoff(p: float, q: float) -> tuple[float, float]:
    """One-shot Ultimatum Game payoffs for offer p against threshold q.

    The offer is accepted iff p >= q; acceptance at equality matters because a
    Low receiver accepts the Discriminatory AI's l offer.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("offer and threshold must lie in [0, 1]")
    if p >= q:
        return (1.0 - p, p)
    return (0.0, 0.0)


def proposer_payoffs(
    cfg: PopulationConfig, game: GameParams, k_r: int
) -> tuple[float, float]:
    """Average payoffs (pi_HP, pi_LP) of human proposer strategies.

    k_r is the number of High human receivers. The formulas are identical under
    both AI variants: only the receiver side is rewritten for the
    Discriminatory AI.
    """
    _check_count(k_r, cfg.n_r, "k_r")
    pi_hp = 1.0 - game.h
    pi_lp = (1.0 - game.l) * (cfg.n_r - k_r) / (cfg.n_r + cfg.m_r)
    return pi_hp, pi_lp


def receiver_payoffs(
    cfg: PopulationConfig, game: GameParams, k_p: int
) -> tuple[float, float]:
    """Average payoffs (pi_HR, pi_LR) of human receiver strategies.

    Under the Samaritan variant every AI proposer offers h to everyone; under
    the Discriminatory variant AI proposers pay l to Low receivers, which moves
    the M_P term of pi_LR from the h bucket to the l bucket.
    """
    _check_count(k_p, cfg.n_p, "k_p")
    h, l = game.h, game.l
    denom = cfg.n_p + cfg.m_p
    pi_hr = h * (k_p + cfg.m_p) / denom
    if cfg.discriminatory:
        pi_lr = (h * k_p + l * (cfg.n_p - k_p + cfg.m_p)) / denom
    else:
        pi_lr = (h * (k_p + cfg.m_p) + l * (cfg.n_p - k_p)) / denom
    return pi_hr, pi_lr


def perceived_fair_fraction(cfg: PopulationConfig, k_r: int) -> float:
    """Probability alpha that a Discriminatory AI proposer is perceived as High.

    The AI offers h exactly to the high-threshold receivers, so from a human
    proposer's viewpoint it looks fair with probability equal to the
    high-threshold fraction of the receiver population (AI receivers included).
    """
    if not cfg.discriminatory:
        raise ValueError("perceived_fair_fraction is defined only for Discriminatory AI")
    _check_count(k_r, cfg.n_r, "k_r")
    return (k_r + cfg.m_r) / (cfg.n_r + cfg.m_r)


def _check_count(k: int, n: int, name: str) -> None:
    if not (0 <= k <= n):
        raise ValueError(f"{name}={k} outside [0, {n}]")
