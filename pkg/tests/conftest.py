"""Shared oracles and fixtures.

The linear-solve oracle recomputes fixation probabilities from the defining
absorbing birth-death system instead of the closed-form product formula, so
the two can be compared as independent derivations.
"""

from __future__ import annotations

import numpy as np
import pytest

from hybrid_ug.dynamics import FixationQuery, transition_rates
from hybrid_ug.game import AIKind, GameParams, Level, PopulationConfig, Role
from hybrid_ug.markov import EDGES


def fixation_linear_solve(q: FixationQuery) -> float:
    """Fixation probability of `q` from the absorbing-chain linear system.

    Unknowns x_1..x_{N-1} are absorption-at-N probabilities of the mutant
    count j, satisfying x_j = T+(j) x_{j+1} + T-(j) x_{j-1} + (1-T+-T-) x_j
    with x_0 = 0, x_N = 1; solved densely with numpy.
    """
    n = q.cfg.human_count(q.role)
    a = np.zeros((n - 1, n - 1))
    b = np.zeros(n - 1)
    for j in range(1, n):
        k = j if q.mutant_level is Level.HIGH else n - j
        rates = transition_rates(q.role, k, q.opposing_k, q.cfg, q.game)
        t_plus, t_minus = rates.t_plus, rates.t_minus
        if q.mutant_level is Level.LOW:
            t_plus, t_minus = t_minus, t_plus
        i = j - 1
        a[i, i] = t_plus + t_minus
        if j + 1 < n:
            a[i, i + 1] = -t_plus
        else:
            b[i] += t_plus
        if j - 1 > 0:
            a[i, i - 1] = -t_minus
    x = np.linalg.solve(a, b)
    return float(x[0])


def n12_panel() -> list[tuple[str, FixationQuery]]:
    """Fixed 16-query panel at N = 12: all 8 chain edges under one Samaritan
    and one Discriminatory configuration."""
    game = GameParams()
    configs = [
        PopulationConfig(n_p=12, n_r=12, m_p=1, m_r=1, ai_kind=AIKind.SAMARITAN, beta=0.5),
        PopulationConfig(n_p=12, n_r=12, m_p=2, m_r=0, ai_kind=AIKind.DISCRIMINATORY, beta=0.5),
    ]
    panel = []
    for cfg in configs:
        for src, dst, role, mutant, opp in EDGES:
            panel.append(
                (
                    f"{cfg.ai_kind.value}:{src}->{dst}",
                    FixationQuery(
                        role=role, mutant_level=mutant, opposing_state=opp,
                        cfg=cfg, game=game,
                    ),
                )
            )
    return panel


@pytest.fixture(scope="session")
def panel_n12():
    return n12_panel()
