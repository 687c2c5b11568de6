"""Reduced 4-state Markov chain of the small-mutation limit.

States are the monomorphic corners HH, HL, LH, LL (proposer letter first).
Each one-coordinate move i -> j carries probability rho(i -> j) / 2, where rho
is the fixation probability of a single mutant of the changed role and the
factor 1/2 accounts for the mutation landing in either of the two populations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hybrid_ug import _kernels
from hybrid_ug.dynamics import FixationQuery, UnreachableFixation, fixation_probability
from hybrid_ug.game import GameParams, Level, PopulationConfig, Role

STATES: tuple[str, ...] = ("HH", "HL", "LH", "LL")
STATE_INDEX = {s: i for i, s in enumerate(STATES)}

# Directed one-coordinate edges: (from, to, role, mutant level, frozen opposing level).
EDGES: tuple[tuple[str, str, Role, Level, Level], ...] = (
    ("HH", "LH", Role.PROPOSER, Level.LOW, Level.HIGH),
    ("LH", "HH", Role.PROPOSER, Level.HIGH, Level.HIGH),
    ("HL", "LL", Role.PROPOSER, Level.LOW, Level.LOW),
    ("LL", "HL", Role.PROPOSER, Level.HIGH, Level.LOW),
    ("HH", "HL", Role.RECEIVER, Level.LOW, Level.HIGH),
    ("HL", "HH", Role.RECEIVER, Level.HIGH, Level.HIGH),
    ("LH", "LL", Role.RECEIVER, Level.LOW, Level.LOW),
    ("LL", "LH", Role.RECEIVER, Level.HIGH, Level.LOW),
)

# Same table in the integer layout the numba kernel consumes.
_EDGES_ARRAY = np.array(
    [
        (
            STATE_INDEX[a],
            STATE_INDEX[b],
            1 if role is Role.PROPOSER else 0,
            1 if mutant is Level.HIGH else 0,
            1 if opp is Level.HIGH else 0,
        )
        for a, b, role, mutant, opp in EDGES
    ],
    dtype=np.int64,
)

_ROW_SUM_TOL = 1e-12
_STATIONARY_TOL = 1e-10

_CYCLE = (0, 1, 3, 2)  # HH - HL - LL - LH - HH; the only nonzero edges


def _spanning_in_trees() -> np.ndarray:
    """In-trees of the 4-cycle for the tree-theorem stationary solver.

    Entry [root, t, k] is the k-th directed edge (src, dst) of the t-th
    spanning tree rooted at `root`; each tree drops one undirected cycle edge
    and orients the remaining path toward the root.
    """
    undirected = [(_CYCLE[i], _CYCLE[(i + 1) % 4]) for i in range(4)]
    trees = np.zeros((4, 4, 3, 2), dtype=np.int64)
    for root in range(4):
        for t, dropped in enumerate(undirected):
            adj: dict[int, list[int]] = {n: [] for n in range(4)}
            for a, b in undirected:
                if (a, b) != dropped:
                    adj[a].append(b)
                    adj[b].append(a)
            parent = {root: root}
            frontier = [root]
            while frontier:
                u = frontier.pop()
                for v in adj[u]:
                    if v not in parent:
                        parent[v] = u
                        frontier.append(v)
            k = 0
            for v in range(4):
                if v != root:
                    trees[root, t, k, 0] = v
                    trees[root, t, k, 1] = parent[v]
                    k += 1
    return trees


_TREES = _spanning_in_trees()


class DegenerateChain(ValueError):
    """The chain is reducible and its fixed probability vector is not unique."""


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic 4x4 matrix in STATES order, plus its defining parameters.

    `log_weights[i, j]` holds log rho(i -> j) (-inf off the edge set); the
    stationary solver works from it because matrix entries underflow to exact
    zeros once rho drops below ~1e-308.
    """

    matrix: np.ndarray
    log_weights: np.ndarray
    cfg: PopulationConfig
    game: GameParams

    def entry(self, src: str, dst: str) -> float:
        return float(self.matrix[STATE_INDEX[src], STATE_INDEX[dst]])

    def log_rho(self, src: str, dst: str) -> float:
        return float(self.log_weights[STATE_INDEX[src], STATE_INDEX[dst]])


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray
    degenerate: bool = False

    def mass(self, state: str) -> float:
        return float(self.pi[STATE_INDEX[state]])

    @property
    def argmax_state(self) -> str:
        return STATES[int(np.argmax(self.pi))]

    @property
    def frac_h_proposers(self) -> float:
        return self.mass("HH") + self.mass("HL")

    @property
    def frac_h_receivers(self) -> float:
        return self.mass("HH") + self.mass("LH")


@dataclass(frozen=True)
class EdgeReport:
    src: str
    dst: str
    rho: float
    log_rho: float
    benchmark: float
    flag: str  # '>', '=', '<' versus the neutral benchmark


@dataclass(frozen=True)
class TransitionReport:
    cfg: PopulationConfig
    game: GameParams
    edges: tuple[EdgeReport, ...]
    stationary: StationaryDistribution
    notes: tuple[str, ...] = field(default=())

    def to_record(self) -> dict:
        """Flat record for CSV/JSON serialization."""
        rec: dict = {
            "ai_kind": self.cfg.ai_kind.value,
            "N_P": self.cfg.n_p,
            "N_R": self.cfg.n_r,
            "M_P": self.cfg.m_p,
            "M_R": self.cfg.m_r,
            "h": self.game.h,
            "l": self.game.l,
            "beta": self.cfg.beta,
            "degenerate": self.stationary.degenerate,
        }
        for state in STATES:
            rec[f"pi_{state}"] = self.stationary.mass(state)
        rec["frac_HP"] = self.stationary.frac_h_proposers
        rec["frac_HR"] = self.stationary.frac_h_receivers
        rec["edges"] = [
            {
                "from": e.src,
                "to": e.dst,
                "rho": e.rho,
                "log_rho": e.log_rho,
                "benchmark": e.benchmark,
                "flag": e.flag,
            }
            for e in self.edges
        ]
        if self.notes:
            rec["notes"] = list(self.notes)
        return rec


def edge_query(src: str, dst: str, cfg: PopulationConfig, game: GameParams) -> FixationQuery:
    """FixationQuery for the one-coordinate move src -> dst."""
    for a, b, role, mutant, opp in EDGES:
        if a == src and b == dst:
            return FixationQuery(
                role=role, mutant_level=mutant, opposing_state=opp, cfg=cfg, game=game
            )
    raise ValueError(f"{src}->{dst} is not a one-coordinate transition")


def build_transition_matrix(cfg: PopulationConfig, game: GameParams) -> TransitionMatrix:
    logw, ok = _kernels.edge_log_weights_kernel(
        cfg.n_p, cfg.n_r, cfg.m_p, cfg.m_r,
        game.h, game.l, cfg.beta, cfg.discriminatory,
        _EDGES_ARRAY,
    )
    if not ok:
        raise UnreachableFixation("a fixation probability along some edge is 0/0")
    lam = _kernels.matrix_from_log_weights_kernel(logw)
    return TransitionMatrix(matrix=lam, log_weights=logw, cfg=cfg, game=game)


def _dense_stationary(lam: np.ndarray) -> StationaryDistribution:
    """Linear-space fallback: solve (Lambda^T - I) pi = 0 with normalization.

    A rank-deficient system (reducible chain, or edge weights lost to
    underflow) yields the minimum-norm solution, flagged degenerate.
    """
    row_err = np.abs(lam.sum(axis=1) - 1.0).max()
    if row_err > _ROW_SUM_TOL:
        raise ValueError(f"matrix is not row-stochastic (max row error {row_err:.3e})")
    core = lam.T - np.eye(4)
    degenerate = np.linalg.matrix_rank(core, tol=1e-12) < 3
    a = core.copy()
    a[3, :] = 1.0
    b = np.array([0.0, 0.0, 0.0, 1.0])
    if degenerate:
        pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    else:
        pi = np.linalg.solve(a, b)
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    if not degenerate:
        residual = np.abs(pi @ lam - pi).max()
        if residual > _STATIONARY_TOL:
            raise ValueError(f"stationary residual {residual:.3e} exceeds tolerance")
    return StationaryDistribution(pi=pi, degenerate=degenerate)


def stationary_distribution(m: TransitionMatrix | np.ndarray) -> StationaryDistribution:
    """Left fixed probability vector of the chain.

    A TransitionMatrix is solved with the Markov-chain tree theorem on its log
    edge weights, which stays exact at strong selection where the linear-space
    entries underflow (stationary masses down to ~e^(-700) resolve correctly).
    A raw 4x4 row-stochastic array falls back to the dense linear solve. In
    either path a reducible chain yields a flagged degenerate min-norm result.
    """
    if isinstance(m, TransitionMatrix):
        pi, ok = _kernels.stationary_tree_kernel(m.log_weights, _TREES)
        if ok:
            return StationaryDistribution(pi=pi, degenerate=False)
        return StationaryDistribution(pi=_dense_stationary(m.matrix).pi, degenerate=True)
    lam = np.asarray(m, dtype=float)
    if lam.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    return _dense_stationary(lam)


def transition_report(cfg: PopulationConfig, game: GameParams) -> TransitionReport:
    """All 8 directed fixation probabilities, neutral benchmarks (same edge at
    beta = 0), dominance flags and the stationary distribution."""
    matrix = build_transition_matrix(cfg, game)
    stat = stationary_distribution(matrix)
    neutral_cfg = PopulationConfig(
        n_p=cfg.n_p, n_r=cfg.n_r, m_p=cfg.m_p, m_r=cfg.m_r,
        ai_kind=cfg.ai_kind, beta=0.0,
    )
    edges = []
    for src, dst, *_ in EDGES:
        log_rho = matrix.log_rho(src, dst)
        rho = float(np.exp(log_rho))
        benchmark = fixation_probability(edge_query(src, dst, neutral_cfg, game))
        if abs(rho - benchmark) <= 1e-9:
            flag = "="
        else:
            flag = ">" if rho > benchmark else "<"
        edges.append(
            EdgeReport(
                src=src, dst=dst, rho=rho, log_rho=log_rho,
                benchmark=benchmark, flag=flag,
            )
        )
    notes = []
    if cfg.discriminatory and cfg.m_r > 0:
        notes.append(
            "discriminatory AI proposers combined with M_R > 0 Samaritan AI "
            "receivers: formulas applied as written, configuration untested in "
            "the source experiments"
        )
    return TransitionReport(
        cfg=cfg, game=game, edges=tuple(edges), stationary=stat, notes=tuple(notes)
    )
