"""Parameter-grid runner, critical-mass search and marginal summaries.

Grid points are independent pure computations evaluated by the shared numba
kernels; the runner partitions consecutive index blocks across worker
processes and writes records in committed lexicographic order (M_P, M_R, h, l,
beta — the GridSpec field order), so output is byte-identical for any worker
count.
"""

from __future__ import annotations

import csv
import math
import multiprocessing
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from hybrid_ug import _kernels
from hybrid_ug.game import AIKind, GameParams, PopulationConfig
from hybrid_ug.markov import STATES, _EDGES_ARRAY, _TREES, build_transition_matrix, _dense_stationary

CSV_COLUMNS = (
    "ai_kind", "N_P", "N_R", "M_P", "M_R", "h", "l", "beta",
    "pi_HH", "pi_HL", "pi_LH", "pi_LL", "frac_HP", "frac_HR", "degenerate",
)

_CHUNK = 8192


def _float_axis(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive lattice start, start+step, ..., stop, rounded to kill drift."""
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(round((stop - start) / step)) + 1
    if count < 1 or abs(start + (count - 1) * step - stop) > 1e-9:
        raise ValueError(f"stop {stop} is not start {start} plus a whole number of steps {step}")
    return tuple(round(start + i * step, 10) for i in range(count))


def _int_axis(start: int, stop: int, step: int) -> tuple[int, ...]:
    if step <= 0:
        raise ValueError("step must be positive")
    if (stop - start) % step != 0:
        raise ValueError(f"stop {stop} is not start {start} plus a whole number of steps {step}")
    return tuple(range(start, stop + 1, step))


@dataclass(frozen=True)
class GridSpec:
    """Cartesian lattice of sweep points.

    Iteration (and output) order is lexicographic in the field order below:
    M_P outermost, then M_R, h, l, and beta innermost.
    """

    m_p_values: tuple[int, ...]
    m_r_values: tuple[int, ...]
    h_values: tuple[float, ...]
    l_values: tuple[float, ...]
    betas: tuple[float, ...]
    ai_kind: AIKind = AIKind.SAMARITAN
    n_p: int = 100
    n_r: int = 100

    def __post_init__(self) -> None:
        for name in ("m_p_values", "m_r_values", "h_values", "l_values", "betas"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must be non-empty")
        if any(m < 0 for m in self.m_p_values + self.m_r_values):
            raise ValueError("AI counts must be nonnegative")
        if self.n_p < 2 or self.n_r < 2:
            raise ValueError("need at least 2 human players per role")
        if any(b < 0 for b in self.betas):
            raise ValueError("beta values must be >= 0")
        if any(not 0.0 <= x <= 1.0 for x in self.h_values + self.l_values):
            raise ValueError("h and l values must lie in [0, 1]")

    @property
    def total_points(self) -> int:
        return (
            len(self.m_p_values) * len(self.m_r_values)
            * len(self.h_values) * len(self.l_values) * len(self.betas)
        )

    @classmethod
    def reference_samaritan(cls) -> "GridSpec":
        """Full robustness lattice: M step 5, h in [0.4, 0.6] and l in [0.1, 0.3]
        step 0.01, beta in {0.1, 1, 10, 100}."""
        return cls(
            m_p_values=_int_axis(0, 100, 5),
            m_r_values=_int_axis(0, 100, 5),
            h_values=_float_axis(0.4, 0.6, 0.01),
            l_values=_float_axis(0.1, 0.3, 0.01),
            betas=(0.1, 1.0, 10.0, 100.0),
            ai_kind=AIKind.SAMARITAN,
        )

    @classmethod
    def reference_discriminatory(cls) -> "GridSpec":
        """Discriminatory robustness lattice: M_R fixed at 0, otherwise the
        Samaritan ranges."""
        return cls(
            m_p_values=_int_axis(0, 100, 5),
            m_r_values=(0,),
            h_values=_float_axis(0.4, 0.6, 0.01),
            l_values=_float_axis(0.1, 0.3, 0.01),
            betas=(0.1, 1.0, 10.0, 100.0),
            ai_kind=AIKind.DISCRIMINATORY,
        )

    @classmethod
    def from_mapping(cls, data: dict) -> "GridSpec":
        """Builds a spec from a parsed config mapping; unknown keys rejected.

        Axis tables hold {start, stop, step}; scalars: ai_kind, n_p, n_r;
        betas is an explicit list.
        """
        known = {"m_p", "m_r", "h", "l", "betas", "ai_kind", "n_p", "n_r"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = {"m_p", "m_r", "h", "l", "betas"} - set(data)
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")

        def axis(key: str, integer: bool):
            table = data[key]
            if not isinstance(table, dict) or set(table) != {"start", "stop", "step"}:
                raise ValueError(f"axis '{key}' needs exactly the keys start, stop, step")
            if integer:
                return _int_axis(int(table["start"]), int(table["stop"]), int(table["step"]))
            return _float_axis(float(table["start"]), float(table["stop"]), float(table["step"]))

        return cls(
            m_p_values=axis("m_p", True),
            m_r_values=axis("m_r", True),
            h_values=axis("h", False),
            l_values=axis("l", False),
            betas=tuple(float(b) for b in data["betas"]),
            ai_kind=AIKind(data.get("ai_kind", "samaritan")),
            n_p=int(data.get("n_p", 100)),
            n_r=int(data.get("n_r", 100)),
        )


@dataclass(frozen=True)
class SweepRecord:
    """One grid point: coordinates, stationary masses and derived fractions."""

    ai_kind: AIKind
    n_p: int
    n_r: int
    m_p: int
    m_r: int
    h: float
    l: float
    beta: float
    pi: tuple[float, float, float, float]  # HH, HL, LH, LL
    degenerate: bool

    @property
    def frac_hp(self) -> float:
        return self.pi[0] + self.pi[1]

    @property
    def frac_hr(self) -> float:
        return self.pi[0] + self.pi[2]

    def mass(self, state: str) -> float:
        return self.pi[STATES.index(state)]

    def csv_row(self) -> tuple[str, ...]:
        def num(x: float) -> str:
            return format(x, ".12g")

        return (
            self.ai_kind.value, str(self.n_p), str(self.n_r),
            str(self.m_p), str(self.m_r),
            num(self.h), num(self.l), num(self.beta),
            num(self.pi[0]), num(self.pi[1]), num(self.pi[2]), num(self.pi[3]),
            num(self.frac_hp), num(self.frac_hr),
            "true" if self.degenerate else "false",
        )


@dataclass(frozen=True)
class SweepSummary:
    """Grid accounting: records + skipped = total lattice points, exact."""

    records: int
    skipped: int

    @property
    def total(self) -> int:
        return self.records + self.skipped


class NotReached(Exception):
    """No AI count up to the scan bound meets the dominance criterion."""


def _grid_points(spec: GridSpec) -> tuple[np.ndarray, ...]:
    """Coordinate arrays for all valid (l < h) points, lexicographic order,
    plus the skipped count."""
    mp_v = np.array(spec.m_p_values, dtype=np.float64)
    mr_v = np.array(spec.m_r_values, dtype=np.float64)
    h_v = np.array(spec.h_values, dtype=np.float64)
    l_v = np.array(spec.l_values, dtype=np.float64)
    b_v = np.array(spec.betas, dtype=np.float64)
    grids = np.meshgrid(mp_v, mr_v, h_v, l_v, b_v, indexing="ij")
    mp, mr, h, l, beta = (g.ravel() for g in grids)
    valid = l < h
    return mp[valid], mr[valid], h[valid], l[valid], beta[valid], int((~valid).sum())


_WORKER_SPEC: GridSpec | None = None
_WORKER_POINTS: tuple[np.ndarray, ...] | None = None


def _worker_init(spec: GridSpec, points: tuple[np.ndarray, ...]) -> None:
    global _WORKER_SPEC, _WORKER_POINTS
    _WORKER_SPEC = spec
    _WORKER_POINTS = points


def _worker_chunk(bounds: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = bounds
    spec, (mp, mr, h, l, beta) = _WORKER_SPEC, _WORKER_POINTS
    return _kernels.grid_chunk_kernel(
        spec.n_p, spec.n_r, mp[lo:hi], mr[lo:hi], h[lo:hi], l[lo:hi], beta[lo:hi],
        spec.ai_kind is AIKind.DISCRIMINATORY, _EDGES_ARRAY, _TREES,
    )


def run_grid(spec: GridSpec, workers: int = 1) -> Iterator[SweepRecord | SweepSummary]:
    """Streams one SweepRecord per valid grid point, then one SweepSummary.

    Output order is the committed lexicographic order regardless of `workers`.
    Degenerate points are resolved by the dense min-norm fallback and flagged,
    never aborting the sweep.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    mp, mr, h, l, beta, skipped = _grid_points(spec)
    points = (mp, mr, h, l, beta)
    n = mp.shape[0]
    bounds = [(lo, min(lo + _CHUNK, n)) for lo in range(0, n, _CHUNK)]

    def emit(lo: int, pis: np.ndarray, status: np.ndarray) -> Iterator[SweepRecord]:
        for i in range(pis.shape[0]):
            degenerate = status[i] != 0
            pi = pis[i]
            if degenerate:
                cfg = PopulationConfig(
                    n_p=spec.n_p, n_r=spec.n_r,
                    m_p=int(mp[lo + i]), m_r=int(mr[lo + i]),
                    ai_kind=spec.ai_kind, beta=beta[lo + i],
                )
                game = GameParams(h=h[lo + i], l=l[lo + i])
                pi = _dense_stationary(build_transition_matrix(cfg, game).matrix).pi
            yield SweepRecord(
                ai_kind=spec.ai_kind, n_p=spec.n_p, n_r=spec.n_r,
                m_p=int(mp[lo + i]), m_r=int(mr[lo + i]),
                h=float(h[lo + i]), l=float(l[lo + i]), beta=float(beta[lo + i]),
                pi=(float(pi[0]), float(pi[1]), float(pi[2]), float(pi[3])),
                degenerate=bool(degenerate),
            )

    if workers == 1 or len(bounds) <= 1:
        _worker_init(spec, points)
        for lo, hi in bounds:
            pis, status = _worker_chunk((lo, hi))
            yield from emit(lo, pis, status)
    else:
        with multiprocessing.Pool(
            workers, initializer=_worker_init, initargs=(spec, points)
        ) as pool:
            for (lo, _), (pis, status) in zip(bounds, pool.imap(_worker_chunk, bounds)):
                yield from emit(lo, pis, status)
    yield SweepSummary(records=n, skipped=skipped)


def write_csv(stream: Iterable[SweepRecord | SweepSummary], path) -> SweepSummary:
    """Writes a record stream to CSV (header mandatory, 12 significant digits)
    and returns the trailing summary. The file holds only the header and data
    rows; accounting lives in the returned summary."""
    summary = None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for item in stream:
            if isinstance(item, SweepSummary):
                summary = item
            else:
                writer.writerow(item.csv_row())
    if summary is None:
        raise ValueError("record stream ended without a summary")
    return summary


def read_csv(path) -> list[SweepRecord]:
    """Reads a sweep CSV back into records (inverse of write_csv, layout only)."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(CSV_COLUMNS):
            raise ValueError(f"unexpected CSV columns: {reader.fieldnames}")
        for row in reader:
            records.append(
                SweepRecord(
                    ai_kind=AIKind(row["ai_kind"]),
                    n_p=int(row["N_P"]), n_r=int(row["N_R"]),
                    m_p=int(row["M_P"]), m_r=int(row["M_R"]),
                    h=float(row["h"]), l=float(row["l"]), beta=float(row["beta"]),
                    pi=(
                        float(row["pi_HH"]), float(row["pi_HL"]),
                        float(row["pi_LH"]), float(row["pi_LL"]),
                    ),
                    degenerate=row["degenerate"] == "true",
                )
            )
    return records


def _stationary_hh(
    m_p: int, m_r: int, beta: float, ai_kind: AIKind, game: GameParams,
    n_p: int, n_r: int,
) -> float:
    pi, status = _kernels.grid_point_kernel(
        n_p, n_r, float(m_p), float(m_r), game.h, game.l, beta,
        ai_kind is AIKind.DISCRIMINATORY, _EDGES_ARRAY, _TREES,
    )
    if status != 0:
        cfg = PopulationConfig(
            n_p=n_p, n_r=n_r, m_p=m_p, m_r=m_r, ai_kind=ai_kind, beta=beta
        )
        pi = _dense_stationary(build_transition_matrix(cfg, game).matrix).pi
    return float(pi[0])


def threshold_search(
    beta: float,
    ai_kind: AIKind,
    vary: str,
    fixed_other_m: int = 0,
    game: GameParams = GameParams(),
    n_p: int = 100,
    n_r: int = 100,
    criterion: float = 0.5,
) -> int:
    """Smallest AI count making the fully fair state dominant.

    Scans M = 0, 1, ..., N linearly (monotonicity is empirical, not assumed)
    and returns the first M with stationary pi(HH) > `criterion`. The default
    criterion 0.5 identifies the same integer as any cutoff in (0.1, 0.9) at
    strong selection, where the transition is a near-step. `vary` is "m_r" or
    "m_p"; the other count is held at `fixed_other_m`. Raises NotReached when
    no M suffices.
    """
    if vary not in ("m_p", "m_r"):
        raise ValueError("vary must be 'm_p' or 'm_r'")
    n = n_p if vary == "m_p" else n_r
    for m in range(n + 1):
        m_p, m_r = (m, fixed_other_m) if vary == "m_p" else (fixed_other_m, m)
        if _stationary_hh(m_p, m_r, beta, ai_kind, game, n_p, n_r) > criterion:
            return m
    raise NotReached(f"no {vary} <= {n} reaches pi(HH) > {criterion}")


def tradeoff_frontier(
    beta: float,
    ai_kind: AIKind = AIKind.SAMARITAN,
    game: GameParams = GameParams(),
    n_p: int = 100,
    n_r: int = 100,
    m_p_values: Sequence[int] | None = None,
    criterion: float = 0.5,
) -> list[tuple[int, int | None]]:
    """Minimal M_R achieving fair dominance for each M_P column.

    Returns (m_p, m_r) pairs in M_P order; m_r is None where even M_R = N_R
    fails (per-column NotReached).
    """
    if m_p_values is None:
        m_p_values = range(0, n_p + 1, 5)
    frontier: list[tuple[int, int | None]] = []
    for m_p in m_p_values:
        try:
            m_r = threshold_search(
                beta, ai_kind, "m_r", fixed_other_m=m_p, game=game,
                n_p=n_p, n_r=n_r, criterion=criterion,
            )
        except NotReached:
            m_r = None
        frontier.append((int(m_p), m_r))
    return frontier


@dataclass(frozen=True)
class MarginalCurve:
    """Mean and standard deviation of each stationary mass along one axis,
    aggregated over all other grid dimensions."""

    axis: str
    values: tuple[float, ...]
    mean: np.ndarray  # shape (len(values), 4), STATES order
    std: np.ndarray  # same shape

    def mean_mass(self, state: str) -> np.ndarray:
        return self.mean[:, STATES.index(state)]


_AXIS_FIELDS = {"m_p": "m_p", "m_r": "m_r", "h": "h", "l": "l", "beta": "beta"}


def marginal_curves(records: Iterable[SweepRecord], axis: str) -> MarginalCurve:
    """Per-axis-value mean and dispersion of the stationary masses.

    These are the quantities drawn as lines and shaded bands in the marginal
    plots. Dispersion is the population standard deviation (exactly 0 for an
    axis with a single grid value).
    """
    if axis not in _AXIS_FIELDS:
        raise ValueError(f"axis must be one of {sorted(_AXIS_FIELDS)}")
    field_name = _AXIS_FIELDS[axis]
    sums: dict[float, np.ndarray] = {}
    sq_sums: dict[float, np.ndarray] = {}
    counts: dict[float, int] = {}
    for rec in records:
        key = getattr(rec, field_name)
        pi = np.array(rec.pi)
        if key not in sums:
            sums[key] = np.zeros(4)
            sq_sums[key] = np.zeros(4)
            counts[key] = 0
        sums[key] += pi
        sq_sums[key] += pi * pi
        counts[key] += 1
    if not sums:
        raise ValueError("no records to summarize")
    values = tuple(sorted(sums))
    mean = np.stack([sums[v] / counts[v] for v in values])
    var = np.stack([sq_sums[v] / counts[v] for v in values]) - mean * mean
    std = np.sqrt(np.clip(var, 0.0, None))
    return MarginalCurve(axis=axis, values=values, mean=mean, std=std)
