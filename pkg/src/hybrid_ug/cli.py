"""Command-line interface: single-point queries, sweeps, simulation, figure data.

Exit codes: 0 success, 2 usage/parameter error, 3 computation failure. Every
file output gets a JSON manifest beside it with the resolved parameters needed
to reproduce it exactly. Numeric output uses 12 significant digits.
"""

from __future__ import annotations

import datetime
import json
import os
import sys
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import hybrid_ug
from hybrid_ug.game import AIKind, GameParams, PopulationConfig
from hybrid_ug.dynamics import UnreachableFixation, fixation_probability
from hybrid_ug.markov import (
    STATES,
    build_transition_matrix,
    edge_query,
    stationary_distribution,
    transition_report,
)
from hybrid_ug import sweep as sweep_mod
from hybrid_ug import simulate as sim_mod

_WORKERS_ENV = "HYBRID_UG_WORKERS"


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(_WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _round12(obj):
    """Recursively renders floats at 12 significant digits for diffable output."""
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _emit(record: dict) -> None:
    click.echo(json.dumps(_round12(record), sort_keys=False))


def _write_manifest(output: Path, params: dict, extra: dict | None = None) -> None:
    manifest = {
        "tool": "hybrid-ug",
        "version": hybrid_ug.__version__,
        "parameters": _round12(params),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": [output.name],
    }
    if extra:
        manifest.update(_round12(extra))
    output.with_name(output.name + ".manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n"
    )


def _population(np_, nr, mp, mr, ai, beta) -> PopulationConfig:
    return PopulationConfig(
        n_p=np_, n_r=nr, m_p=mp, m_r=mr, ai_kind=AIKind(ai), beta=beta
    )


def _pop_options(fn):
    for opt in reversed(
        [
            click.option("--np", "np_", type=int, default=100, show_default=True,
                         help="Human proposers."),
            click.option("--nr", type=int, default=100, show_default=True,
                         help="Human receivers."),
            click.option("--n", type=int, default=None,
                         help="Sets both --np and --nr."),
            click.option("--mp", type=int, default=0, show_default=True,
                         help="AI proposers."),
            click.option("--mr", type=int, default=0, show_default=True,
                         help="AI receivers."),
            click.option("--h", "h", type=float, default=0.5, show_default=True,
                         help="Fair offer / high threshold."),
            click.option("--l", "l", type=float, default=0.1, show_default=True,
                         help="Stingy offer / low threshold."),
            click.option("--beta", type=float, default=1.0, show_default=True,
                         help="Selection intensity."),
            click.option("--ai", type=click.Choice([k.value for k in AIKind]),
                         default=AIKind.SAMARITAN.value, show_default=True,
                         help="AI proposer behaviour."),
        ]
    ):
        fn = opt(fn)
    return fn


def _resolve_n(n, np_, nr) -> tuple[int, int]:
    return (n, n) if n is not None else (np_, nr)


class _Cli(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (ValueError, UnreachableFixation, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except (sim_mod.SimulationTimeout, sim_mod.InsufficientMonomorphicTime) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)


@click.group(cls=_Cli)
@click.version_option(hybrid_ug.__version__)
def main() -> None:
    """Analytical and simulated fairness dynamics of hybrid human-AI
    Ultimatum Game populations."""


@main.command()
@_pop_options
def stationary(np_, nr, n, mp, mr, h, l, beta, ai) -> None:
    """Stationary distribution over the four monomorphic states."""
    np_, nr = _resolve_n(n, np_, nr)
    cfg = _population(np_, nr, mp, mr, ai, beta)
    game = GameParams(h=h, l=l)
    stat = stationary_distribution(build_transition_matrix(cfg, game))
    _emit(
        {
            "ai_kind": cfg.ai_kind.value,
            "N_P": cfg.n_p, "N_R": cfg.n_r, "M_P": cfg.m_p, "M_R": cfg.m_r,
            "h": game.h, "l": game.l, "beta": cfg.beta,
            **{f"pi_{s}": stat.mass(s) for s in STATES},
            "frac_HP": stat.frac_h_proposers,
            "frac_HR": stat.frac_h_receivers,
            "argmax": stat.argmax_state,
            "degenerate": stat.degenerate,
        }
    )


def _parse_edge(edge: str) -> tuple[str, str]:
    parts = edge.upper().split("-")
    if len(parts) != 2 or any(p not in STATES for p in parts):
        raise click.BadParameter(
            f"edge must look like HL-HH with states in {STATES}", param_hint="--edge"
        )
    return parts[0], parts[1]


@main.command()
@_pop_options
@click.option("--edge", default=None, help="One directed edge, e.g. HL-HH.")
@click.option("--all-edges", is_flag=True, help="Emit the full transition report.")
def fixation(np_, nr, n, mp, mr, h, l, beta, ai, edge, all_edges) -> None:
    """Fixation probability for one chain edge, or the full 8-edge report."""
    if (edge is None) == (not all_edges):
        raise click.UsageError("provide exactly one of --edge or --all-edges")
    np_, nr = _resolve_n(n, np_, nr)
    cfg = _population(np_, nr, mp, mr, ai, beta)
    game = GameParams(h=h, l=l)
    if all_edges:
        _emit(transition_report(cfg, game).to_record())
        return
    src, dst = _parse_edge(edge)
    rho = fixation_probability(edge_query(src, dst, cfg, game))
    _emit({"edge": f"{src}-{dst}", "rho": rho, "beta": cfg.beta})


@main.command(name="sweep")
@click.argument("config", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV output path (required with a config).")
@click.option("--workers", type=int, default=None,
              help=f"Worker processes (default ${_WORKERS_ENV} or 1).")
@click.option("--threshold", "threshold_axis", type=click.Choice(["mp", "mr"]),
              default=None, help="Critical-mass search instead of a grid run.")
@click.option("--frontier", is_flag=True,
              help="Minimal-M_R frontier over M_P columns instead of a grid run.")
@click.option("--beta", type=float, default=100.0, show_default=True,
              help="Selection intensity for --threshold/--frontier.")
@click.option("--ai", type=click.Choice([k.value for k in AIKind]), default=None,
              help="AI kind (overrides the config file).")
@click.option("--fixed-m", type=int, default=0, show_default=True,
              help="The non-varied AI count for --threshold.")
@click.option("--criterion", type=float, default=0.5, show_default=True,
              help="pi(HH) dominance cutoff for --threshold/--frontier.")
@click.option("--h", "h", type=float, default=0.5, show_default=True)
@click.option("--l", "l", type=float, default=0.1, show_default=True)
def sweep_cmd(config, out, workers, threshold_axis, frontier, beta, ai, fixed_m,
              criterion, h, l) -> None:
    """Grid sweep from a TOML config, or a threshold/frontier search."""
    workers = workers if workers is not None else _default_workers()
    game = GameParams(h=h, l=l)
    if threshold_axis is not None:
        kind = AIKind(ai) if ai else AIKind.SAMARITAN
        vary = "m_p" if threshold_axis == "mp" else "m_r"
        try:
            value = sweep_mod.threshold_search(
                beta, kind, vary, fixed_other_m=fixed_m, game=game,
                criterion=criterion,
            )
        except sweep_mod.NotReached:
            value = None
        _emit(
            {
                "threshold": value, "vary": vary, "beta": beta,
                "ai_kind": kind.value, "criterion": criterion,
                "fixed_other_m": fixed_m, "h": game.h, "l": game.l,
            }
        )
        return
    if frontier:
        kind = AIKind(ai) if ai else AIKind.SAMARITAN
        pairs = sweep_mod.tradeoff_frontier(beta, kind, game=game, criterion=criterion)
        _emit(
            {
                "frontier": [{"M_P": p, "M_R": r} for p, r in pairs],
                "beta": beta, "ai_kind": kind.value, "criterion": criterion,
                "h": game.h, "l": game.l,
            }
        )
        return
    if config is None or out is None:
        raise click.UsageError("a grid run needs CONFIG and --out")
    with open(config, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise click.UsageError(f"malformed config {config}: {exc}")
    if ai:
        data["ai_kind"] = ai
    spec = sweep_mod.GridSpec.from_mapping(data)
    out_path = Path(out)
    try:
        summary = sweep_mod.write_csv(sweep_mod.run_grid(spec, workers=workers), out_path)
    except BaseException:
        out_path.unlink(missing_ok=True)
        raise
    _write_manifest(
        out_path,
        {
            "config": str(config), "resolved_grid": _spec_params(spec),
            "workers": workers,
        },
        extra={"records": summary.records, "skipped": summary.skipped},
    )
    dominant = _frequency_summary(out_path, spec)
    _emit(
        {
            "records": summary.records, "skipped": summary.skipped,
            "out": str(out_path), **dominant,
        }
    )


def _spec_params(spec: sweep_mod.GridSpec) -> dict:
    return {
        "ai_kind": spec.ai_kind.value, "n_p": spec.n_p, "n_r": spec.n_r,
        "m_p_values": list(spec.m_p_values), "m_r_values": list(spec.m_r_values),
        "h_values": list(spec.h_values), "l_values": list(spec.l_values),
        "betas": list(spec.betas),
    }


def _frequency_summary(path: Path, spec: sweep_mod.GridSpec) -> dict:
    """Dominance frequencies of the written CSV (streamed, no reload)."""
    import csv as _csv

    hh_near_one = ll_dominant = total = 0
    cutoff = 0.99 if spec.ai_kind is AIKind.SAMARITAN else 0.995
    with open(path, newline="") as fh:
        for row in _csv.DictReader(fh):
            total += 1
            masses = [float(row[f"pi_{s}"]) for s in STATES]
            if spec.ai_kind is AIKind.SAMARITAN:
                if masses[0] > cutoff:
                    hh_near_one += 1
            elif masses[0] >= cutoff:
                hh_near_one += 1
            if max(masses) == masses[3]:
                ll_dominant += 1
    return {
        "hh_near_one_fraction": hh_near_one / total if total else 0.0,
        "ll_dominant_fraction": ll_dominant / total if total else 0.0,
        "hh_cutoff": cutoff,
    }


@main.group()
def simulate() -> None:
    """Agent-based Monte Carlo oracle."""


@simulate.command(name="fixation")
@_pop_options
@click.option("--edge", required=True, help="Directed edge, e.g. HL-HH.")
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, required=True, help="RNG seed (no default).")
@click.option("--max-steps", type=float, default=1e6, show_default=True)
@click.option("--workers", type=int, default=None)
def simulate_fixation_cmd(np_, nr, n, mp, mr, h, l, beta, ai, edge, trials, seed,
                          max_steps, workers) -> None:
    """Monte Carlo fixation estimate for one chain edge."""
    np_, nr = _resolve_n(n, np_, nr)
    workers = workers if workers is not None else _default_workers()
    cfg = _population(np_, nr, mp, mr, ai, beta)
    game = GameParams(h=h, l=l)
    src, dst = _parse_edge(edge)
    q = edge_query(src, dst, cfg, game)
    sim = sim_mod.SimConfig(
        cfg=cfg, game=game, seed=seed, trials=trials, max_steps=int(max_steps)
    )
    est = sim_mod.simulate_fixation(q, sim, workers=workers)
    _emit(
        {
            "edge": f"{src}-{dst}",
            "p_hat": est.p_hat, "stderr": est.stderr,
            "trials": est.trials, "timeouts": est.timeouts,
            "seed": seed, "generator": sim_mod.GENERATOR_IDENTITY,
        }
    )


@simulate.command(name="longrun")
@_pop_options
@click.option("--mu", type=float, default=1e-4, show_default=True,
              help="Mutation probability per update event.")
@click.option("--steps", type=float, default=1e8, show_default=True)
@click.option("--trials", type=int, default=1, show_default=True,
              help="Independent realizations to aggregate.")
@click.option("--seed", type=int, required=True, help="RNG seed (no default).")
def simulate_longrun_cmd(np_, nr, n, mp, mr, h, l, beta, ai, mu, steps, trials,
                         seed) -> None:
    """Long-run monomorphic-corner occupancy under rare mutation."""
    np_, nr = _resolve_n(n, np_, nr)
    cfg = _population(np_, nr, mp, mr, ai, beta)
    game = GameParams(h=h, l=l)
    sim = sim_mod.SimConfig(
        cfg=cfg, game=game, seed=seed, mutation_rate=mu,
        max_steps=int(steps), trials=trials,
    )
    occ = sim_mod.simulate_long_run(sim)
    _emit(
        {
            **{f"occ_{s}": float(occ.occupancy[i]) for i, s in enumerate(STATES)},
            "argmax": occ.argmax_state,
            "monomorphic_fraction": occ.monomorphic_fraction,
            "recorded_steps": occ.recorded_steps,
            "realizations": occ.realizations,
            "mu": mu, "seed": seed, "generator": sim_mod.GENERATOR_IDENTITY,
        }
    )


_FIGURES = ("fig1", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9")


@main.command()
@click.argument("figure_id", type=click.Choice(_FIGURES))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
              show_default=True, help="Output directory.")
@click.option("--workers", type=int, default=None)
def figure(figure_id, out_dir, workers) -> None:
    """Writes the CSV bundle behind one figure; reruns are byte-identical."""
    workers = workers if workers is not None else _default_workers()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = _FIGURE_BUILDERS[figure_id](out, workers)
    _emit({"figure": figure_id, "outputs": [str(p) for p in written]})


def _fraction_lines(out: Path, name: str, kind: AIKind, varies: tuple[str, ...],
                    workers: int) -> list[Path]:
    """Long-format curves: human H-fractions vs AI count, one row per
    (vary, M, beta, role)."""
    import csv as _csv

    game = GameParams()
    path = out / f"{name}.csv"
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["vary", "M", "beta", "role", "fraction"])
        for vary in varies:
            for beta in (0.1, 1.0, 10.0, 100.0):
                for m in range(0, 101):
                    cfg = PopulationConfig(
                        m_p=m if vary == "m_p" else 0,
                        m_r=m if vary == "m_r" else 0,
                        ai_kind=kind, beta=beta,
                    )
                    stat = stationary_distribution(build_transition_matrix(cfg, game))
                    for role, frac in (
                        ("proposer", stat.frac_h_proposers),
                        ("receiver", stat.frac_h_receivers),
                    ):
                        writer.writerow(
                            [vary, m, format(beta, ".12g"), role, format(frac, ".12g")]
                        )
    _write_manifest(path, {"figure": name, "ai_kind": kind.value, "varies": varies})
    return [path]


def _figure_fig1(out: Path, workers: int) -> list[Path]:
    return _fraction_lines(out, "fig1", AIKind.SAMARITAN, ("m_p", "m_r"), workers)


def _figure_fig7(out: Path, workers: int) -> list[Path]:
    return _fraction_lines(out, "fig7", AIKind.DISCRIMINATORY, ("m_p",), workers)


def _sweep_to_file(spec: sweep_mod.GridSpec, path: Path, workers: int) -> None:
    summary = sweep_mod.write_csv(sweep_mod.run_grid(spec, workers=workers), path)
    _write_manifest(
        path, {"resolved_grid": _spec_params(spec), "workers": workers},
        extra={"records": summary.records, "skipped": summary.skipped},
    )


def _figure_fig3(out: Path, workers: int) -> list[Path]:
    spec = sweep_mod.GridSpec(
        m_p_values=tuple(range(0, 101, 5)),
        m_r_values=tuple(range(0, 101, 5)),
        h_values=(0.5,), l_values=(0.1,),
        betas=(0.1, 1.0, 10.0, 100.0),
    )
    grid_path = out / "fig3.csv"
    _sweep_to_file(spec, grid_path, workers)
    frontier_path = out / "fig3_frontier.csv"
    import csv as _csv

    with open(frontier_path, "w", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["beta", "M_P", "M_R"])
        for beta in (0.1, 1.0, 10.0, 100.0):
            for m_p, m_r in sweep_mod.tradeoff_frontier(beta):
                writer.writerow(
                    [format(beta, ".12g"), m_p, "" if m_r is None else m_r]
                )
    _write_manifest(frontier_path, {"figure": "fig3", "content": "frontier"})
    return [grid_path, frontier_path]


def _figure_fig4(out: Path, workers: int) -> list[Path]:
    path = out / "fig4.csv"
    _sweep_to_file(sweep_mod.GridSpec.reference_samaritan(), path, workers)
    return [path]


def _figure_fig9(out: Path, workers: int) -> list[Path]:
    path = out / "fig9.csv"
    _sweep_to_file(sweep_mod.GridSpec.reference_discriminatory(), path, workers)
    return [path]


def _marginal_figure(out: Path, name: str, spec: sweep_mod.GridSpec,
                     axes: tuple[str, ...], workers: int) -> list[Path]:
    import csv as _csv

    records = [
        item
        for item in sweep_mod.run_grid(spec, workers=workers)
        if isinstance(item, sweep_mod.SweepRecord)
    ]
    path = out / f"{name}.csv"
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["axis", "value", "state", "mean", "std"])
        for axis in axes:
            curve = sweep_mod.marginal_curves(records, axis)
            for i, value in enumerate(curve.values):
                for j, state in enumerate(STATES):
                    writer.writerow(
                        [
                            axis, format(value, ".12g"), state,
                            format(curve.mean[i, j], ".12g"),
                            format(curve.std[i, j], ".12g"),
                        ]
                    )
    _write_manifest(
        path,
        {"figure": name, "axes": axes, "resolved_grid": _spec_params(spec),
         "workers": workers},
    )
    return [path]


def _figure_fig5(out: Path, workers: int) -> list[Path]:
    return _marginal_figure(
        out, "fig5", sweep_mod.GridSpec.reference_samaritan(), ("m_p", "m_r"), workers
    )


def _figure_fig6(out: Path, workers: int) -> list[Path]:
    return _marginal_figure(
        out, "fig6", sweep_mod.GridSpec.reference_samaritan(), ("h", "l"), workers
    )


def _figure_fig8(out: Path, workers: int) -> list[Path]:
    """Transition reports for the four discriminatory-AI panel configurations."""
    panels = [
        {"m_p": 0, "beta": 0.1},
        {"m_p": 1, "beta": 0.1},
        {"m_p": 0, "beta": 1.0},
        {"m_p": 14, "beta": 1.0},
    ]
    records = []
    for panel in panels:
        cfg = PopulationConfig(
            m_p=panel["m_p"], ai_kind=AIKind.DISCRIMINATORY, beta=panel["beta"]
        )
        records.append(transition_report(cfg, GameParams()).to_record())
    path = out / "fig8.json"
    path.write_text(json.dumps(_round12(records), indent=2) + "\n")
    _write_manifest(path, {"figure": "fig8", "panels": panels})
    return [path]


_FIGURE_BUILDERS = {
    "fig1": _figure_fig1,
    "fig3": _figure_fig3,
    "fig4": _figure_fig4,
    "fig5": _figure_fig5,
    "fig6": _figure_fig6,
    "fig7": _figure_fig7,
    "fig8": _figure_fig8,
    "fig9": _figure_fig9,
}


if __name__ == "__main__":
    main()
