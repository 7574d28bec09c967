"""generate-fixtures entry point."""

import argparse
import sys
from pathlib import Path

from fixturegen.generate import generate, verify
from fixturegen.geometries import benchmark_geometries


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="generate-fixtures")
    parser.add_argument("--out", type=Path, default=Path("fixtures"))
    parser.add_argument("--only", help="generate a single labelled geometry")
    parser.add_argument(
        "--verify", action="store_true",
        help="check existing fixtures in --out against their sidecars instead of generating",
    )
    args = parser.parse_args(argv)

    specs = benchmark_geometries()
    if args.only:
        specs = [s for s in specs if s.label == args.only]
        if not specs:
            print(f"unknown label {args.only}", file=sys.stderr)
            return 2

    if args.verify:
        ok = True
        for spec in specs:
            good, msg = verify(args.out / f"{spec.label}.fcidump", args.out / f"{spec.label}.json")
            print(f"{spec.label}: {msg}")
            ok &= good
        return 0 if ok else 1

    for spec in specs:
        sidecar = generate(spec, args.out)
        print(f"{spec.label}: NORB={sidecar['n_orb']} RHF={sidecar['rhf_energy']:.10f} "
              f"UHF={sidecar['uhf_energy']:.10f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
