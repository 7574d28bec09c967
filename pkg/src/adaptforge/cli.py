"""Command-line entry point: single runs, benchmark sweeps, active-space scans."""

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from adaptforge import __version__
from adaptforge.engine import AdaptConfig, AdaptResult, run_adapt
from adaptforge.io_integrals import FcidumpError, fixture_path, load_fixture
from adaptforge.resources import resource_curve
from adaptforge.scf import ScfConvergenceError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_FIXTURE = 4


def _checksum(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _validate_manifest(config: AdaptConfig) -> None:
    if config.fixture is None:
        raise FcidumpError("manifest names no fixture")
    path = fixture_path(config.fixture)
    if not path.exists():
        raise FileNotFoundError(f"fixture file {path} does not exist")
    load_fixture(config.fixture)  # parse errors surface before any compute


def _write_artifacts(out_dir: Path, config: AdaptConfig, result: AdaptResult) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    header = {
        "adaptforge_version": __version__,
        "config": config.to_dict(),
        "fixture_checksum": _checksum(fixture_path(config.fixture)),
    }
    (out_dir / "header.json").write_text(json.dumps(header, indent=2) + "\n")

    with (out_dir / "trace.jsonl").open("w") as fh:
        for row in result.rows:
            fh.write(json.dumps(row.as_dict()) + "\n")

    summary = {
        "final_energy": result.final_energy,
        "e_fci": result.e_fci,
        "energy_error": result.final_energy - result.e_fci,
        "stop_reason": result.stop_reason,
        "n_operators": len(result.operator_labels),
        "operators": result.operator_labels,
        "thetas": result.thetas,
        "pool_size_by_phase": result.pool_size_by_phase,
        "operators_to_chemical_accuracy": result.operators_to_accuracy(),
        "degraded_steps": result.degraded_steps,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    def write_csv(name: str, fields: list[str], rows: list[dict]) -> None:
        with (out_dir / name).open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)

    write_csv(
        "energy_error.csv",
        ["iteration", "n_parameters", "phase", "energy", "energy_error_ha"],
        [
            {
                "iteration": r.iteration,
                "n_parameters": r.n_parameters,
                "phase": r.phase,
                "energy": r.energy,
                "energy_error_ha": r.energy_error_vs_fci,
            }
            for r in result.rows
        ],
    )
    write_csv(
        "fidelity.csv",
        ["iteration", "n_parameters", "phase", "fidelity", "one_minus_fidelity"],
        [
            {
                "iteration": r.iteration,
                "n_parameters": r.n_parameters,
                "phase": r.phase,
                "fidelity": r.fidelity,
                "one_minus_fidelity": None if r.fidelity is None else 1.0 - r.fidelity,
            }
            for r in result.rows
        ],
    )
    write_csv(
        "measurements.csv",
        [
            "iteration", "n_parameters", "phase",
            "cumulative_energy_evaluations", "cumulative_gradient_evaluations",
            "cumulative_optimizer_gradient_evaluations",
        ],
        [
            {
                "iteration": r.iteration,
                "n_parameters": r.n_parameters,
                "phase": r.phase,
                "cumulative_energy_evaluations": r.cumulative_energy_evaluations,
                "cumulative_gradient_evaluations": r.cumulative_gradient_evaluations,
                "cumulative_optimizer_gradient_evaluations":
                    r.cumulative_optimizer_gradient_evaluations,
            }
            for r in result.rows
        ],
    )
    write_csv(
        "resources.csv",
        ["iteration", "n_parameters", "energy_error_ha", "total_gates", "cnot_gates", "depth"],
        resource_curve(result.rows),
    )


def cmd_run(args) -> int:
    try:
        manifest = json.loads(Path(args.config).read_text())
        config = AdaptConfig.from_dict(manifest)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _validate_manifest(config)
    except (FcidumpError, FileNotFoundError) as exc:
        print(f"fixture error: {exc}", file=sys.stderr)
        return EXIT_FIXTURE
    if args.dry_run:
        print(json.dumps({"plan": config.to_dict(), "out": str(args.out)}, indent=2))
        return EXIT_OK
    try:
        result = run_adapt(config)
    except (ScfConvergenceError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _write_artifacts(Path(args.out), config, result)
    err = result.final_energy - result.e_fci
    print(f"{config.fixture} [{config.basis}/{config.phase_mode}]: "
          f"E={result.final_energy:.10f}  |E-E_FCI|={err:.3e}  "
          f"operators={len(result.operator_labels)}  stop={result.stop_reason}")
    return EXIT_OK


def _run_one(payload: tuple[dict, str]) -> dict:
    manifest, out_dir = payload
    manifest = dict(manifest)
    label = manifest.pop("label", None)
    config = AdaptConfig.from_dict(manifest)
    if not label:
        label = (
            f"{config.fixture}_{config.basis}_{config.phase_mode}"
            + (f"{config.n_s}" if config.phase_mode == "subspace" else "")
        )
    try:
        _validate_manifest(config)
        result = run_adapt(config)
    except Exception as exc:  # aggregate reporting; the sweep must survive
        return {"label": label, "status": f"failed: {exc}"}
    _write_artifacts(Path(out_dir) / label, config, result)
    return {
        "label": label,
        "status": "ok",
        "fixture": config.fixture,
        "basis": config.basis,
        "mode": config.phase_mode,
        "n_s": config.n_s or "",
        "final_energy": result.final_energy,
        "e_fci": result.e_fci,
        "energy_error": result.final_energy - result.e_fci,
        "n_operators": len(result.operator_labels),
        "operators_to_chemical_accuracy": result.operators_to_accuracy(),
        "stop_reason": result.stop_reason,
    }


def cmd_sweep(args) -> int:
    try:
        suite = json.loads(Path(args.suite).read_text())
        runs = suite["runs"] if isinstance(suite, dict) else suite
    except (OSError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payloads = [(manifest, str(out_dir)) for manifest in runs]
    if args.jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(_run_one, payloads))
    else:
        records = [_run_one(p) for p in payloads]

    fields = ["label", "status", "fixture", "basis", "mode", "n_s", "final_energy",
              "e_fci", "energy_error", "n_operators",
              "operators_to_chemical_accuracy", "stop_reason"]
    with (out_dir / "sweep_summary.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for rec in records:
            writer.writerow(rec)
    failures = [r for r in records if r["status"] != "ok"]
    for rec in records:
        print(f"{rec['label']}: {rec['status']}")
    return EXIT_OK if not failures else EXIT_NUMERICAL


def cmd_active_scan(args) -> int:
    try:
        ints = load_fixture(args.fixture)
    except FileNotFoundError as exc:
        print(f"fixture error: {exc}", file=sys.stderr)
        return EXIT_FIXTURE
    except FcidumpError as exc:
        print(f"fixture error: {exc}", file=sys.stderr)
        return EXIT_FIXTURE
    frozen = [int(x) for x in args.frozen.split(",") if x != ""] if args.frozen else []
    n_full = ints.n_orb - len(frozen)
    if not (0 < args.min <= args.max <= n_full):
        print(f"config error: scan range must lie in (0, {n_full}]", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    for size in range(args.min, args.max + 1):
        n_delete = n_full - size
        deleted = list(range(ints.n_orb - n_delete, ints.n_orb))
        config = AdaptConfig(
            fixture=args.fixture, basis=args.basis, frozen=tuple(frozen),
            deleted=tuple(deleted), tol=args.tol, max_iters=args.max_iters,
        )
        try:
            result = run_adapt(config)
        except (ScfConvergenceError, RuntimeError, ValueError) as exc:
            print(f"numerical failure at size {size}: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        label = f"scan_{args.fixture}_{args.basis}_{size}"
        _write_artifacts(out_dir / label, config, result)
        summary_rows.append({
            "active_orbitals": size,
            "qubits": 2 * size,
            "final_energy": result.final_energy,
            "e_fci": result.e_fci,
            "energy_error": result.final_energy - result.e_fci,
            "n_operators": len(result.operator_labels),
            "operators_to_chemical_accuracy": result.operators_to_accuracy(),
        })
        print(f"size {size}: error {result.final_energy - result.e_fci:.3e} "
              f"({len(result.operator_labels)} operators)")
    with (out_dir / f"scan_{args.fixture}_{args.basis}_summary.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary_rows[0].keys()))
        writer.writeheader()
        writer.writerows(summary_rows)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adaptforge",
        description="Noiseless ADAPT-VQE simulator with natural-orbital and "
                    "subspace-projection enhancements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one manifest")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--dry-run", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute a suite of manifests")
    p_sweep.add_argument("--suite", required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", default="out")
    p_sweep.set_defaults(func=cmd_sweep)

    p_scan = sub.add_parser("active-scan", help="error curves across active-space sizes")
    p_scan.add_argument("--fixture", required=True)
    p_scan.add_argument("--basis", default="canonical", choices=["canonical", "uhf-no"])
    p_scan.add_argument("--min", type=int, required=True)
    p_scan.add_argument("--max", type=int, required=True)
    p_scan.add_argument("--frozen", default="")
    p_scan.add_argument("--tol", type=float, default=1e-4)
    p_scan.add_argument("--max-iters", type=int, default=120, dest="max_iters")
    p_scan.add_argument("--out", default="out")
    p_scan.set_defaults(func=cmd_active_scan)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
