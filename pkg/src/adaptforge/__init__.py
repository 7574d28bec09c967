"""adaptforge: a noiseless ADAPT-VQE simulator with natural-orbital initial
states, orbital-subspace projection, an exact FCI oracle, and circuit-resource
accounting."""

from adaptforge.io_integrals import (
    FIXTURE_LABELS,
    IntegralSet,
    load_fixture,
    load_sidecar,
    parse_fcidump,
    write_fcidump,
)
from adaptforge.scf import (
    OrbitalRotation,
    ScfSolution,
    freeze_and_select,
    natural_orbitals,
    rotate_integrals,
    run_rhf,
    run_uhf,
)
from adaptforge.engine import AdaptConfig, AdaptResult, run_adapt

__version__ = "0.1.0"

__all__ = [
    "AdaptConfig",
    "AdaptResult",
    "FIXTURE_LABELS",
    "IntegralSet",
    "OrbitalRotation",
    "ScfSolution",
    "freeze_and_select",
    "load_fixture",
    "load_sidecar",
    "natural_orbitals",
    "parse_fcidump",
    "rotate_integrals",
    "run_adapt",
    "run_rhf",
    "run_uhf",
    "write_fcidump",
]
