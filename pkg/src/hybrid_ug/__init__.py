"""Evolution of fairness in the Ultimatum Game for hybrid human-AI populations.

The package computes analytical fixation probabilities for a pairwise-comparison
Moran process in a bipartite (proposer/receiver) population with committed AI
agents, reduces the dynamics to a 4-state Markov chain in the small-mutation
limit, and cross-validates everything with an agent-based Monte Carlo simulator.
"""

from hybrid_ug.game import (
    AIKind,
    GameParams,
    Level,
    PopulationConfig,
    Role,
    perceived_fair_fraction,
    proposer_payoffs,
    receiver_payoffs,
    ug_payoff,
)
from hybrid_ug.dynamics import (
    FixationQuery,
    TransitionRates,
    UnreachableFixation,
    fermi,
    fixation_probability,
    log_fixation_probability,
    transition_rates,
)
from hybrid_ug.markov import (
    EDGES,
    STATES,
    StationaryDistribution,
    TransitionMatrix,
    TransitionReport,
    build_transition_matrix,
    edge_query,
    stationary_distribution,
    transition_report,
)

__version__ = "0.1.0"
