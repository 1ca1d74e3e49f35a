#!/usr/bin/env python3
"""
Run named bench matrices and record every row in DuckDB.

Each matrix comes from config/experiments.yaml. Rows go to data/results.duckdb
(sweep_log tracks running / complete / error per matrix), and the shattering
rows are checked against the frozen shatter_constant.

Usage:
    python scripts/run_acceptance_suite.py                # smoke matrix
    python scripts/run_acceptance_suite.py sinkless shattering arboricity
"""

import math
import sys
from datetime import datetime
from pathlib import Path

from rich.console import Console

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import load_algorithms_config, load_experiment_matrix
from src.errors import DsplitError
from src.runner import expand_entry, run_bench
from src.storage import ResultsDatabase

console = Console(force_terminal=True)

# Fraction of shattering runs that must stay within the calibrated bound
SHATTER_COMPLIANCE = 0.99


def run_matrix(name: str, db: ResultsDatabase, config) -> int:
    matrix = load_experiment_matrix(name)
    specs = [spec for entry in matrix.entries for spec in expand_entry(entry)]
    total_runs = sum(len(spec.seeds) for spec in specs)
    console.print(f"\n[bold]Matrix {name}[/bold]: {matrix.description or ''} ({total_runs} runs)")

    log_id = db.log_sweep_start(name)
    rows = []
    try:
        for row in run_bench(specs, name, config):
            rows.append(row)
            if not row.passed:
                console.print(f"  [red]✗ {row.algorithm} n={row.n} Δ={row.delta} seed {row.seed}[/red]")
            if len(rows) % 50 == 0:
                console.print(f"  [dim]{len(rows)}/{total_runs}[/dim]")
        inserted = db.insert_rows(rows)
        db.log_sweep_complete(log_id, inserted)
    except DsplitError as e:
        db.insert_rows(rows)
        db.log_sweep_error(log_id, f"{type(e).__name__}: {e}")
        console.print(f"  [red]Error after {len(rows)} runs: {e}[/red]")
        return len(rows)

    failed = sum(1 for r in rows if not r.passed)
    colour = "green" if failed == 0 else "red"
    console.print(f"  [{colour}]✓ {len(rows) - failed}/{len(rows)} passed[/{colour}]")
    return len(rows)


def check_shattering(db: ResultsDatabase, shatter_constant: float) -> None:
    df = db.query_df("""
        SELECT n, delta, max_bad_component FROM bench_runs
        WHERE algorithm = 'shatter_sinkless' AND max_bad_component IS NOT NULL
    """)
    if df.empty:
        return
    bound = shatter_constant * df["delta"] ** 2 * df["n"].map(lambda n: math.log(max(n, 2)))
    share = float((df["max_bad_component"] <= bound).mean())
    colour = "green" if share >= SHATTER_COMPLIANCE else "red"
    console.print(f"Shattering within {shatter_constant}·Δ²·ln n: [{colour}]{share:.1%}[/{colour}] of {len(df)} runs")


def main():
    start = datetime.now()
    console.print("[bold]=== Acceptance Suite ===[/bold]")
    console.print(f"Started: {start}")

    names = sys.argv[1:] or ["smoke"]
    config = load_algorithms_config()
    db = ResultsDatabase()

    total = 0
    for name in names:
        total += run_matrix(name, db, config)

    check_shattering(db, config.sinkless.shatter_constant)

    stats = db.get_bench_stats()
    console.print(f"\n[bold green]=== Complete ===[/bold green]")
    console.print(f"Runs this session: {total:,}")
    console.print(f"Total runs in DB: {stats['total_runs']:,} ({stats['failed_runs']} failed)")
    console.print(f"Duration: {datetime.now() - start}")

    db.close()


if __name__ == "__main__":
    main()
