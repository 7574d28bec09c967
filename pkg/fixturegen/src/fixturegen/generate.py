"""Drive the integral engine end to end: FCIDUMP files plus sidecar JSON."""

import hashlib
import json
from pathlib import Path

import numpy as np

from fixturegen.basis import ANGSTROM_TO_BOHR, NUCLEAR_CHARGE, build_basis
from fixturegen.fulci import fci_ground_energy, freeze_core
from fixturegen.geometries import GeometrySpec
from fixturegen.hf import mo_transform, rhf, uhf
from fixturegen.integrals import integral_tensors

# CAS used by all water runs in the main package: freeze the O 1s-dominated
# orbital, drop the two highest virtuals.
H2O_ACTIVE = {"frozen": [0], "deleted": [11, 12]}


def write_fcidump(path: Path, h, eri, e_core, n_elec, ms2=0, threshold=1e-14):
    n = h.shape[0]
    lines = [f" &FCI NORB={n:3d},NELEC={n_elec:3d},MS2={ms2:d},"]
    lines.append("  ORBSYM=" + "1," * n)
    lines.append("  ISYM=1,")
    lines.append(" &END")
    fmt = " {: .16E} {:4d} {:4d} {:4d} {:4d}"
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(i + 1):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    v = eri[i, j, k, l]
                    if abs(v) > threshold:
                        lines.append(fmt.format(v, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            if abs(h[i, j]) > threshold:
                lines.append(fmt.format(h[i, j], i + 1, j + 1, 0, 0))
    lines.append(fmt.format(e_core, 0, 0, 0, 0))
    path.write_text("\n".join(lines) + "\n")


def _checksum(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def generate(spec: GeometrySpec, out_dir: Path) -> dict:
    """Produce <label>.fcidump and <label>.json in out_dir; returns the sidecar dict."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    atoms_bohr = [
        (sym, np.array(xyz, dtype=float) * ANGSTROM_TO_BOHR, NUCLEAR_CHARGE[sym])
        for sym, xyz in spec.atoms
    ]
    functions = build_basis([(sym, pos) for sym, pos, _ in atoms_bohr])
    s, t, v, eri_ao, e_nuc = integral_tensors(functions, atoms_bohr)
    h_ao = t + v

    e_rhf, c, eps = rhf(s, h_ao, eri_ao, spec.n_elec, e_nuc)
    e_uhf, _ = uhf(s, h_ao, eri_ao, spec.n_elec, e_nuc)
    h_mo, eri_mo = mo_transform(h_ao, eri_ao, c)

    n_orb = h_mo.shape[0]
    dump_path = out_dir / f"{spec.label}.fcidump"
    write_fcidump(dump_path, h_mo, eri_mo, e_nuc, spec.n_elec)

    fci_energy = None
    active = None
    n_det = None
    if n_orb <= 8:
        fci_energy = fci_ground_energy(h_mo, eri_mo, e_nuc, spec.n_elec, n_orb)
    else:
        frozen = H2O_ACTIVE["frozen"]
        deleted = H2O_ACTIVE["deleted"]
        act = [p for p in range(n_orb) if p not in frozen and p not in deleted]
        h_eff, eri_act, e_eff = freeze_core(h_mo, eri_mo, e_nuc, frozen, act)
        n_act_elec = spec.n_elec - 2 * len(frozen)
        cas_energy = fci_ground_energy(h_eff, eri_act, e_eff, n_act_elec, len(act))
        active = {
            "frozen": frozen,
            "deleted": deleted,
            "n_orb": len(act),
            "n_elec": n_act_elec,
            "fci_energy": cas_energy,
        }

    sidecar = {
        "label": spec.label,
        "basis": spec.basis,
        "geometry": {"atoms": [[sym, list(xyz)] for sym, xyz in spec.atoms], "unit": "angstrom"},
        "n_orb": n_orb,
        "n_elec": spec.n_elec,
        "rhf_energy": e_rhf,
        "uhf_energy": e_uhf,
        "fci_energy": fci_energy,
        "active_space": active,
        "checksum": _checksum(dump_path),
    }
    (out_dir / f"{spec.label}.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return sidecar


def verify(fixture_path: Path, sidecar_path: Path, tol: float = 1e-8) -> tuple[bool, str]:
    """Check the committed fixture against its sidecar using the main package's RHF."""
    fixture_path = Path(fixture_path)
    sidecar_path = Path(sidecar_path)
    if not sidecar_path.exists():
        return False, f"missing sidecar {sidecar_path}"
    sidecar = json.loads(sidecar_path.read_text())
    if _checksum(fixture_path) != sidecar["checksum"]:
        return False, "checksum mismatch"

    from adaptforge.io_integrals import parse_fcidump
    from adaptforge.scf import run_rhf

    ints = parse_fcidump(fixture_path.read_text())
    sol = run_rhf(ints)
    delta = abs(sol.energy - sidecar["rhf_energy"])
    if delta > tol:
        return False, f"RHF mismatch: {sol.energy} vs sidecar {sidecar['rhf_energy']}"
    return True, f"ok (|dE|={delta:.2e})"
