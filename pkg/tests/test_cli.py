import json
from pathlib import Path

import pytest

from adaptforge.cli import main

TOY = {
    "fixture": "h4_linear_3",
    "basis": "canonical",
    "frozen": [1],
    "deleted": [3, 4, 5, 6, 7],
    "max_iters": 4,
}


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload))
    return path


def test_run_produces_artifacts(tmp_path):
    cfg = write_json(tmp_path / "m.json", TOY)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    for name in ("header.json", "trace.jsonl", "summary.json", "energy_error.csv",
                 "fidelity.csv", "measurements.csv", "resources.csv"):
        assert (out / name).exists(), name
    summary = json.loads((out / "summary.json").read_text())
    assert summary["final_energy"] >= summary["e_fci"] - 1e-9
    header = json.loads((out / "header.json").read_text())
    assert header["config"]["fixture"] == "h4_linear_3"
    assert len(header["fixture_checksum"]) == 64


def test_run_invalid_fixture_exits_4(tmp_path):
    cfg = write_json(tmp_path / "m.json", {**TOY, "fixture": "nonexistent"})
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 4
    assert not out.exists()


def test_run_bad_config_exits_2(tmp_path):
    cfg = write_json(tmp_path / "m.json", {**TOY, "bogus_key": 1})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_dry_run_computes_nothing(tmp_path, capsys):
    cfg = write_json(tmp_path / "m.json", TOY)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--dry-run"]) == 0
    assert not out.exists()
    plan = json.loads(capsys.readouterr().out)
    assert plan["plan"]["fixture"] == "h4_linear_3"


def test_trace_reproducible_byte_identical(tmp_path):
    cfg = write_json(tmp_path / "m.json", TOY)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(out2)]) == 0
    assert (out1 / "trace.jsonl").read_bytes() == (out2 / "trace.jsonl").read_bytes()


def test_sweep_empty_suite(tmp_path):
    suite = write_json(tmp_path / "suite.json", {"runs": []})
    out = tmp_path / "out"
    assert main(["sweep", "--suite", str(suite), "--out", str(out)]) == 0
    table = (out / "sweep_summary.csv").read_text().splitlines()
    assert len(table) == 1  # header only


def test_sweep_runs_and_reports(tmp_path):
    runs = [
        {**TOY, "label": "toy_a"},
        {**TOY, "label": "toy_b", "basis": "uhf-no"},
        {**TOY, "label": "broken", "fixture": "missing"},
    ]
    suite = write_json(tmp_path / "suite.json", {"runs": runs})
    out = tmp_path / "out"
    status = main(["sweep", "--suite", str(suite), "--out", str(out)])
    assert status == 3  # one failure reported in aggregate
    lines = (out / "sweep_summary.csv").read_text().splitlines()
    assert len(lines) == 4
    assert (out / "toy_a" / "trace.jsonl").exists()
    assert (out / "toy_b" / "trace.jsonl").exists()
    assert not (out / "broken").exists()


def test_active_scan(tmp_path):
    out = tmp_path / "scan"
    status = main([
        "active-scan", "--fixture", "h4_linear_3", "--basis", "canonical",
        "--min", "2", "--max", "3", "--frozen", "1", "--max-iters", "3",
        "--out", str(out),
    ])
    assert status == 0
    summary = (out / "scan_h4_linear_3_canonical_summary.csv").read_text().splitlines()
    assert len(summary) == 3  # header + two sizes
    assert (out / "scan_h4_linear_3_canonical_2" / "trace.jsonl").exists()
    assert (out / "scan_h4_linear_3_canonical_3" / "trace.jsonl").exists()


def test_active_scan_bad_range(tmp_path):
    status = main([
        "active-scan", "--fixture", "h4_linear_3", "--min", "5", "--max", "2",
        "--out", str(tmp_path / "x"),
    ])
    assert status == 2


def test_shipped_benchmark_suite_is_valid():
    from adaptforge.cli import _validate_manifest
    from adaptforge.engine import AdaptConfig

    suite_path = Path(__file__).resolve().parents[1] / "suites" / "benchmark.json"
    suite = json.loads(suite_path.read_text())
    assert len(suite["runs"]) == 32  # 6 H4 x 4 variants + 2 H2O x 4 variants
    labels = set()
    for manifest in suite["runs"]:
        manifest = dict(manifest)
        labels.add(manifest.pop("label"))
        config = AdaptConfig.from_dict(manifest)
        _validate_manifest(config)
    assert len(labels) == 32


def test_fixture_dir_override(tmp_path, monkeypatch):
    monkeypatch.setenv("ADAPTFORGE_FIXTURES", str(tmp_path))
    cfg = write_json(tmp_path / "m.json", TOY)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 4
