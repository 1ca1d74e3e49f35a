"""DuckDB storage layer for bench results."""

from pathlib import Path
from typing import TYPE_CHECKING, Optional

import duckdb

from .config import get_data_dir

if TYPE_CHECKING:
    from .runner import BenchRow

BENCH_COLUMNS = (
    "sweep", "algorithm", "family", "n", "delta", "a", "eps", "seed", "rounds", "messages",
    "passed", "palette_size", "max_out_degree", "max_bad_component",
)


class ResultsDatabase:
    def __init__(self, db_path: Optional[Path] = None):
        if db_path is None:
            db_path = get_data_dir() / "results.duckdb"
        self.db_path = db_path
        self.conn = duckdb.connect(str(db_path))
        self._init_schema()

    def _init_schema(self):
        self.conn.execute("""
            CREATE SEQUENCE IF NOT EXISTS bench_runs_id_seq START 1
        """)
        self.conn.execute("""
            CREATE TABLE IF NOT EXISTS bench_runs (
                id INTEGER DEFAULT nextval('bench_runs_id_seq') PRIMARY KEY,
                sweep VARCHAR NOT NULL,
                algorithm VARCHAR NOT NULL,
                family VARCHAR NOT NULL,
                n INTEGER NOT NULL,
                delta INTEGER NOT NULL,
                a INTEGER,
                eps DOUBLE,
                seed BIGINT NOT NULL,
                rounds INTEGER NOT NULL,
                messages BIGINT NOT NULL,
                passed BOOLEAN NOT NULL,
                palette_size INTEGER,
                max_out_degree INTEGER,
                max_bad_component INTEGER,
                recorded_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            )
        """)

        self.conn.execute("""
            CREATE SEQUENCE IF NOT EXISTS sweep_log_id_seq START 1
        """)
        self.conn.execute("""
            CREATE TABLE IF NOT EXISTS sweep_log (
                id INTEGER DEFAULT nextval('sweep_log_id_seq') PRIMARY KEY,
                sweep VARCHAR NOT NULL,
                status VARCHAR NOT NULL,
                rows_inserted INTEGER DEFAULT 0,
                started_at TIMESTAMP,
                completed_at TIMESTAMP,
                error_message VARCHAR
            )
        """)

        self.conn.execute("CREATE INDEX IF NOT EXISTS idx_bench_algorithm ON bench_runs(algorithm)")
        self.conn.execute("CREATE INDEX IF NOT EXISTS idx_bench_sweep ON bench_runs(sweep)")

    def insert_rows(self, rows: list["BenchRow"], batch_size: int = 1000) -> int:
        if not rows:
            return 0

        total_inserted = 0
        placeholders = ", ".join("?" for _ in BENCH_COLUMNS)
        for i in range(0, len(rows), batch_size):
            batch = rows[i : i + batch_size]
            values = [tuple(getattr(r, column) for column in BENCH_COLUMNS) for r in batch]
            self.conn.executemany(
                f"INSERT INTO bench_runs ({', '.join(BENCH_COLUMNS)}) VALUES ({placeholders})",
                values,
            )
            total_inserted += len(batch)

        return total_inserted

    def log_sweep_start(self, sweep: str) -> int:
        result = self.conn.execute(
            """
            INSERT INTO sweep_log (sweep, status, started_at)
            VALUES (?, 'running', CURRENT_TIMESTAMP)
            RETURNING id
            """,
            [sweep],
        ).fetchone()
        return result[0]

    def log_sweep_complete(self, log_id: int, rows_inserted: int):
        self.conn.execute(
            """
            UPDATE sweep_log
            SET status = 'complete', rows_inserted = ?, completed_at = CURRENT_TIMESTAMP
            WHERE id = ?
            """,
            [rows_inserted, log_id],
        )

    def log_sweep_error(self, log_id: int, error: str):
        self.conn.execute(
            """
            UPDATE sweep_log
            SET status = 'error', error_message = ?, completed_at = CURRENT_TIMESTAMP
            WHERE id = ?
            """,
            [error, log_id],
        )

    def get_bench_stats(self) -> dict:
        stats = {}

        result = self.conn.execute("SELECT COUNT(*) FROM bench_runs").fetchone()
        stats["total_runs"] = result[0]

        result = self.conn.execute("SELECT COUNT(*) FROM bench_runs WHERE NOT passed").fetchone()
        stats["failed_runs"] = result[0]

        result = self.conn.execute("SELECT COUNT(DISTINCT algorithm) FROM bench_runs").fetchone()
        stats["algorithms"] = result[0]

        result = self.conn.execute("SELECT COUNT(*) FROM sweep_log WHERE status = 'complete'").fetchone()
        stats["sweeps"] = result[0]

        return stats

    def algorithm_summary(self):
        return self.query_df("""
            SELECT algorithm, COUNT(*) AS runs, SUM(CAST(passed AS INTEGER)) AS passed,
                   AVG(rounds) AS mean_rounds, MAX(rounds) AS max_rounds,
                   MAX(max_bad_component) AS max_bad_component
            FROM bench_runs
            GROUP BY algorithm
            ORDER BY algorithm
        """)

    def query(self, sql: str):
        return self.conn.execute(sql).fetchall()

    def query_df(self, sql: str):
        return self.conn.execute(sql).fetchdf()

    def close(self):
        self.conn.close()
