import json

import pytest
from typer.testing import CliRunner

from src.artifacts import PaletteColoring, write_artifact
from src.cli import app

runner = CliRunner()


@pytest.fixture
def cycle4_file(tmp_path):
    path = tmp_path / "cycle4.graph.json"
    result = runner.invoke(app, ["generate", "--family", "cycle", "--n", "4", "--out", str(path)])
    assert result.exit_code == 0, result.output
    return path


def test_run_writes_verified_record(tmp_path):
    out = tmp_path / "run.json"
    phases = tmp_path / "phases.jsonl"
    result = runner.invoke(app, ["run", "--family", "regular", "--n", "20", "--delta", "3", "--algo", "sinkless",
                                 "--seed", "1", "--out", str(out), "--log-out", str(phases)])
    assert result.exit_code == 0, result.output
    record = json.loads(out.read_text())
    assert set(record) == {"graph", "algorithm", "seed", "artifact", "metrics", "report"}
    assert record["report"]["passed"] is True
    assert phases.exists()


def test_run_defaults_to_output_dir(tmp_path):
    result = runner.invoke(app, ["run", "--family", "cycle", "--n", "6", "--algo", "base_color"])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "runs" / "base_color-cycle-n6-s0.json").exists()


@pytest.mark.parametrize("args", [
    ["--algo", "teleport"],
    ["--algo", "split_low"],
    ["--algo", "sinkless", "--set", "sinkless.nosuch=1"],
    ["--algo", "sinkless", "--mode", "luby-rounds"],
])
def test_run_usage_errors_exit_2(args):
    result = runner.invoke(app, ["run", "--family", "cycle", "--n", "8", *args])
    assert result.exit_code == 2


def test_run_over_round_limit_exits_1(tmp_path):
    result = runner.invoke(app, ["run", "--family", "cycle", "--n", "8", "--algo", "base_color",
                                 "--max-rounds", "0", "--out", str(tmp_path / "run.json")])
    assert result.exit_code == 1
    assert "FAIL" in result.output


def test_unmet_precondition_is_a_usage_error():
    result = runner.invoke(app, ["run", "--family", "cycle", "--n", "8", "--algo", "randomized_color",
                                 "--eps", "0.5"])
    assert result.exit_code == 2
    assert "max degree" in result.output


def test_verify_accepts_proper_coloring(tmp_path, cycle4_file):
    artifact = tmp_path / "proper.json"
    write_artifact(artifact, PaletteColoring(3, {0: 0, 1: 1, 2: 0, 3: 1}))
    result = runner.invoke(app, ["verify", "--graph", str(cycle4_file), "--artifact", str(artifact),
                                 "--contract", "proper"])
    assert result.exit_code == 0, result.output


def test_verify_reports_witness_for_tampered_coloring(tmp_path, cycle4_file):
    artifact = tmp_path / "tampered.json"
    write_artifact(artifact, PaletteColoring(3, {0: 0, 1: 0, 2: 1, 3: 2}))
    result = runner.invoke(app, ["verify", "--graph", str(cycle4_file), "--artifact", str(artifact),
                                 "--contract", "proper"])
    assert result.exit_code == 1
    assert "witness" in result.output


def test_verify_rejects_malformed_contract(tmp_path, cycle4_file):
    artifact = tmp_path / "proper.json"
    write_artifact(artifact, PaletteColoring(3, {0: 0, 1: 1, 2: 0, 3: 1}))
    result = runner.invoke(app, ["verify", "--graph", str(cycle4_file), "--artifact", str(artifact),
                                 "--contract", "balance"])
    assert result.exit_code == 2


def test_bench_writes_rows_and_records_them(tmp_path):
    out = tmp_path / "bench.jsonl"
    db = tmp_path / "results.duckdb"
    result = runner.invoke(app, ["bench", "--algo", "euler_split", "--family", "regular", "--n", "20",
                                 "--delta", "4", "--seeds", "1..3", "--out", str(out), "--db", str(db)])
    assert result.exit_code == 0, result.output
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert [row["seed"] for row in rows] == [1, 2, 3]
    assert all(row["passed"] for row in rows)

    summary = runner.invoke(app, ["results", "--db", str(db)])
    assert summary.exit_code == 0, summary.output
    assert "euler_split" in summary.output


def test_bench_needs_a_target():
    result = runner.invoke(app, ["bench", "--algo", "sinkless"])
    assert result.exit_code == 2


def test_bench_unknown_matrix():
    result = runner.invoke(app, ["bench", "--matrix", "nightly"])
    assert result.exit_code == 2
