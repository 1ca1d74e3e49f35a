"""
CLI for the local degree splitting library.

Usage:
    dsplit generate       # Write a generated graph as JSON
    dsplit run            # Run one algorithm and write artifact, metrics and report
    dsplit verify         # Check an artifact file against a contract
    dsplit bench          # Sweep a matrix of graphs and seeds, one JSON line per run
    dsplit results        # Summarise bench runs recorded in DuckDB
"""

import json
import logging
from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from .artifacts import read_artifact
from .config import get_data_dir, get_output_dir, load_algorithms_config, load_experiment_matrix
from .errors import DsplitError, ParameterError
from .graph import FamilySpec, Graph, generate as generate_graph
from .oracles import Contract, ValidationReport, check
from .runner import (
    ExperimentSpec,
    RunRecord,
    apply_overrides,
    expand_entry,
    parse_seeds,
    run_bench,
    run_experiment,
    write_json,
)
from .simulator import write_phase_log
from .storage import ResultsDatabase

app = typer.Typer(
    name="dsplit",
    help="Degree splitting, sinkless orientation and edge coloring in the LOCAL model",
    no_args_is_help=True,
)
console = Console()

EXIT_FAILED = 1
EXIT_USAGE = 2


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log phase details")):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _usage_error(exc: Exception) -> typer.Exit:
    console.print(f"[red]Error:[/red] {escape(str(exc))}")
    return typer.Exit(EXIT_USAGE)


def _family(family: str, n: int, delta: Optional[int], p: Optional[float], a: Optional[int], seed: int) -> FamilySpec:
    return FamilySpec(family=family, n=n, delta=delta, p=p, a=a, seed=seed)


def _print_report(report: ValidationReport) -> None:
    for result in report.checks:
        mark = "[green]pass[/green]" if result.passed else "[red]FAIL[/red]"
        witness = "" if result.witness is None else f"  witness: {escape(json.dumps(result.witness, default=str))}"
        console.print(f"  {mark} {result.name}{witness}")


@app.command()
def generate(
    family: str = typer.Option(..., "--family", help="cycle, clique, regular, gnp, forest_union or tree"),
    n: int = typer.Option(..., "--n"),
    delta: Optional[int] = typer.Option(None, "--delta"),
    p: Optional[float] = typer.Option(None, "--p"),
    a: Optional[int] = typer.Option(None, "--a"),
    seed: int = typer.Option(0, "--seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output file (default: output dir)"),
):
    """
    Generate a graph and write it as JSON.
    """
    try:
        spec = _family(family, n, delta, p, a, seed)
        g = generate_graph(spec)
    except (ValidationError, DsplitError) as exc:
        raise _usage_error(exc)
    out = out or get_output_dir() / f"{family}-n{n}-s{seed}.graph.json"
    write_json(out, g.to_json())
    console.print(f"[green]✓[/green] {spec.label()}: {g.n} nodes, {g.m} edges, max degree {g.max_degree} → {out}")


@app.command()
def run(
    algo: str = typer.Option(..., "--algo", help="Algorithm id (see README)"),
    family: str = typer.Option(..., "--family"),
    n: int = typer.Option(..., "--n"),
    delta: Optional[int] = typer.Option(None, "--delta"),
    p: Optional[float] = typer.Option(None, "--p"),
    a: Optional[int] = typer.Option(None, "--a"),
    eps: Optional[float] = typer.Option(None, "--eps"),
    x: Optional[int] = typer.Option(None, "--x"),
    x_rule: str = typer.Option("fixed", "--x-rule"),
    mode: Optional[str] = typer.Option(None, "--mode"),
    seed: int = typer.Option(0, "--seed", help="Seeds both the graph and the algorithm"),
    max_rounds: Optional[int] = typer.Option(None, "--max-rounds", help="Fail the run above this round count"),
    out: Optional[Path] = typer.Option(None, "--out"),
    log_out: Optional[Path] = typer.Option(None, "--log-out", help="JSON-lines per-phase round log"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="Alternative algorithms.yaml"),
    settings: list[str] = typer.Option([], "--set", help="Override a constant: section.field=value"),
):
    """
    Run one algorithm and write {graph, algorithm, artifact, metrics, report} as JSON.
    """
    try:
        config = apply_overrides(load_algorithms_config(config_path), settings)
        spec = ExperimentSpec(
            graph=_family(family, n, delta, p, a, seed), algorithm=algo, eps=eps, x=x, x_rule=x_rule,
            a=a, mode=mode, seeds=[seed], max_rounds=max_rounds, out=out,
        )
        record = run_experiment(spec, seed, config)
    except (ValidationError, ParameterError) as exc:
        raise _usage_error(exc)
    except DsplitError as exc:
        console.print(f"[red]Run failed:[/red] {type(exc).__name__}: {escape(str(exc))}")
        raise typer.Exit(EXIT_FAILED)

    out = out or get_output_dir() / f"{algo}-{family}-n{n}-s{seed}.json"
    write_json(out, record.to_json())
    if log_out is not None:
        write_phase_log(log_out, record.metrics)
    _summarise(record, out)
    if not record.passed:
        raise typer.Exit(EXIT_FAILED)


def _summarise(record: RunRecord, out: Path) -> None:
    status = "[green]✓ verified[/green]" if record.passed else "[red]✗ verification failed[/red]"
    console.print(f"{status} {record.spec.algorithm} on {record.spec.graph.label()} "
                  f"seed {record.seed}: {record.metrics.rounds} rounds → {out}")
    _print_report(record.report)


@app.command()
def verify(
    graph_path: Path = typer.Option(..., "--graph", exists=True, dir_okay=False),
    artifact_path: Path = typer.Option(..., "--artifact", exists=True, dir_okay=False),
    contract: str = typer.Option(..., "--contract", help="sinkless, proper, balance:T, in_out:DIN,DOUT, forests[:star]"),
):
    """
    Check an artifact against a contract; exit 1 with a witness on failure.
    """
    try:
        with open(graph_path) as f:
            g = Graph.from_json(json.load(f))
        artifact = read_artifact(artifact_path)
        report = check(g, artifact, Contract.parse(contract))
    except (ValidationError, ParameterError, KeyError, ValueError) as exc:
        raise _usage_error(exc)
    except DsplitError as exc:
        console.print(f"[red]✗ {type(exc).__name__}:[/red] {escape(str(exc))}")
        raise typer.Exit(EXIT_FAILED)
    label = "[green]✓ passed[/green]" if report.passed else "[red]✗ failed[/red]"
    console.print(f"{label} {report.contract}")
    _print_report(report)
    if not report.passed:
        raise typer.Exit(EXIT_FAILED)


@app.command()
def bench(
    algo: Optional[str] = typer.Option(None, "--algo"),
    matrix: Optional[str] = typer.Option(None, "--matrix", help="Named matrix from config/experiments.yaml"),
    family: Optional[str] = typer.Option(None, "--family"),
    n: Optional[int] = typer.Option(None, "--n"),
    delta: Optional[int] = typer.Option(None, "--delta"),
    p: Optional[float] = typer.Option(None, "--p"),
    a: Optional[int] = typer.Option(None, "--a"),
    eps: Optional[float] = typer.Option(None, "--eps"),
    x: Optional[int] = typer.Option(None, "--x"),
    mode: Optional[str] = typer.Option(None, "--mode"),
    seeds: str = typer.Option("1", "--seeds", help="1..20 or 1,2,3"),
    max_rounds: Optional[int] = typer.Option(None, "--max-rounds"),
    out: Optional[Path] = typer.Option(None, "--out", help="JSON-lines output"),
    db: Optional[Path] = typer.Option(None, "--db", help="Also record rows in this DuckDB file"),
    config_path: Optional[Path] = typer.Option(None, "--config"),
    settings: list[str] = typer.Option([], "--set"),
):
    """
    Run an algorithm over seeds (or a named matrix) and write one JSON line per run.
    """
    try:
        config = apply_overrides(load_algorithms_config(config_path), settings)
        if matrix is not None:
            sweep = matrix
            specs = [spec for entry in load_experiment_matrix(matrix).entries for spec in expand_entry(entry)]
        else:
            if algo is None or family is None or n is None:
                raise ParameterError("bench needs --matrix, or --algo, --family and --n")
            sweep = f"{algo}:{family}"
            specs = [ExperimentSpec(graph=_family(family, n, delta, p, a, 0), algorithm=algo, eps=eps, x=x,
                                    a=a, mode=mode, seeds=parse_seeds(seeds), max_rounds=max_rounds)]
    except (ValidationError, ParameterError) as exc:
        raise _usage_error(exc)

    out = out or get_output_dir() / f"bench-{sweep.replace(':', '-')}.jsonl"
    database = ResultsDatabase(db) if db is not None else None
    log_id = database.log_sweep_start(sweep) if database else None
    rows = []
    try:
        with open(out, "w") as f:
            for row in run_bench(specs, sweep, config):
                rows.append(row)
                f.write(row.model_dump_json() + "\n")
        if database:
            database.insert_rows(rows)
            database.log_sweep_complete(log_id, len(rows))
    except DsplitError as exc:
        console.print(f"[red]✗ run {len(rows) + 1} of {sweep} failed:[/red] "
                      f"{type(exc).__name__}: {escape(str(exc))}")
        if database:
            database.log_sweep_error(log_id, str(exc))
        raise typer.Exit(EXIT_FAILED)
    finally:
        if database:
            database.close()

    failed = [r for r in rows if not r.passed]
    table = Table(title=f"Bench {sweep}")
    table.add_column("Algorithm", style="cyan")
    table.add_column("Runs", justify="right")
    table.add_column("Passed", justify="right")
    table.add_column("Max rounds", justify="right")
    for name in sorted({r.algorithm for r in rows}):
        mine = [r for r in rows if r.algorithm == name]
        table.add_row(name, str(len(mine)), str(sum(r.passed for r in mine)), str(max(r.rounds for r in mine)))
    console.print(table)
    console.print(f"{len(rows)} rows → {out}")
    if failed:
        raise typer.Exit(EXIT_FAILED)


@app.command()
def results(
    db: Optional[Path] = typer.Option(None, "--db", help="DuckDB file (default: data/results.duckdb)"),
):
    """
    Show per-algorithm summaries of recorded bench runs.
    """
    database = ResultsDatabase(db or get_data_dir() / "results.duckdb")
    try:
        stats = database.get_bench_stats()
        summary = database.algorithm_summary()
    finally:
        database.close()

    table = Table(title="Results")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("Runs", f"{stats['total_runs']:,}")
    table.add_row("Failed", str(stats["failed_runs"]))
    table.add_row("Algorithms", str(stats["algorithms"]))
    table.add_row("Completed sweeps", str(stats["sweeps"]))
    console.print(table)

    if not summary.empty:
        per_algo = Table(title="By algorithm")
        per_algo.add_column("Algorithm", style="cyan")
        per_algo.add_column("Runs", justify="right")
        per_algo.add_column("Passed", justify="right")
        per_algo.add_column("Mean rounds", justify="right")
        per_algo.add_column("Max rounds", justify="right")
        for _, row in summary.iterrows():
            per_algo.add_row(row["algorithm"], str(row["runs"]), str(row["passed"]),
                             f"{row['mean_rounds']:.1f}", str(row["max_rounds"]))
        console.print(per_algo)


if __name__ == "__main__":
    app()
