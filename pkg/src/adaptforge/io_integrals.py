"""FCIDUMP parsing/writing and the spatial-orbital integral container."""

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_NAMELIST_RE = re.compile(r"&FCI(.*?)(?:&END|/)", re.DOTALL | re.IGNORECASE)
_KEY_RE = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^=]+?)(?=(?:,?\s*[A-Za-z0-9_]+\s*=)|$)", re.DOTALL)


class FcidumpError(ValueError):
    """Malformed FCIDUMP content."""


@dataclass
class IntegralSet:
    """One/two-electron integrals over spatial orbitals, chemist notation (pq|rs)."""

    n_orb: int
    n_elec: int
    ms2: int
    h_core: np.ndarray
    eri: np.ndarray
    e_core: float = 0.0

    def validate(self, tol: float = 1e-12) -> None:
        n = self.n_orb
        assert self.h_core.shape == (n, n)
        assert self.eri.shape == (n, n, n, n)
        if np.max(np.abs(self.h_core - self.h_core.T)) > tol:
            raise ValueError("h_core is not symmetric")
        e = self.eri
        for perm in (
            e.transpose(1, 0, 2, 3),
            e.transpose(0, 1, 3, 2),
            e.transpose(2, 3, 0, 1),
        ):
            if np.max(np.abs(e - perm)) > tol:
                raise ValueError("eri violates 8-fold permutational symmetry")

    def copy(self) -> "IntegralSet":
        return IntegralSet(
            self.n_orb, self.n_elec, self.ms2,
            self.h_core.copy(), self.eri.copy(), self.e_core,
        )


def _fill_eri(eri: np.ndarray, i: int, j: int, k: int, l: int, value: float) -> None:
    for p, q in ((i, j), (j, i)):
        for r, s in ((k, l), (l, k)):
            eri[p, q, r, s] = value
            eri[r, s, p, q] = value


def parse_fcidump(text: str) -> IntegralSet:
    """Parse Molpro-convention FCIDUMP text (1-based indices, 8-fold ERI symmetry)."""
    m = _NAMELIST_RE.search(text)
    if m is None:
        raise FcidumpError("no &FCI namelist found")
    header = {}
    for key, raw in _KEY_RE.findall(m.group(1)):
        header[key.upper()] = raw.strip().rstrip(",")
    try:
        n_orb = int(header["NORB"])
        n_elec = int(header["NELEC"])
    except (KeyError, ValueError) as exc:
        raise FcidumpError(f"namelist missing or invalid NORB/NELEC: {exc}") from exc
    ms2 = int(header.get("MS2", "0") or 0)
    if n_orb <= 0:
        raise FcidumpError(f"invalid NORB={n_orb}")

    h_core = np.zeros((n_orb, n_orb))
    eri = np.zeros((n_orb, n_orb, n_orb, n_orb))
    e_core = 0.0
    seen: dict[tuple, tuple[int, float]] = {}

    body = text[m.end():]
    for offset, line in enumerate(body.splitlines()):
        line_no = text[: m.end()].count("\n") + 1 + offset
        stripped = line.strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 5:
            raise FcidumpError(f"line {line_no}: expected 'value i j k l', got {stripped!r}")
        try:
            value = float(parts[0])
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError as exc:
            raise FcidumpError(f"line {line_no}: {exc}") from exc
        for idx in (i, j, k, l):
            if idx < 0 or idx > n_orb:
                raise FcidumpError(f"line {line_no}: index {idx} out of range for NORB={n_orb}")

        if i == j == k == l == 0:
            key = ("core",)
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {line_no}: one-electron entry with a zero index")
            key = ("h", min(i, j), max(i, j))
        elif 0 in (i, j, k, l):
            raise FcidumpError(f"line {line_no}: mixed zero/nonzero indices")
        else:
            a, b = sorted((i, j))
            c, d = sorted((k, l))
            key = ("v",) + min((a, b, c, d), (c, d, a, b))

        if key in seen and abs(seen[key][1] - value) > 1e-10:
            raise FcidumpError(
                f"line {line_no}: conflicting duplicate of line {seen[key][0]} "
                f"({seen[key][1]} vs {value})"
            )
        seen[key] = (line_no, value)

        if key[0] == "core":
            e_core = value
        elif key[0] == "h":
            h_core[i - 1, j - 1] = value
            h_core[j - 1, i - 1] = value
        else:
            _fill_eri(eri, i - 1, j - 1, k - 1, l - 1, value)

    return IntegralSet(n_orb, n_elec, ms2, h_core, eri, e_core)


def write_fcidump(ints: IntegralSet, threshold: float = 1e-14) -> str:
    """Emit unique-representative entries; parse(write(x)) == x to 1e-12."""
    n = ints.n_orb
    lines = [f" &FCI NORB={n:3d},NELEC={ints.n_elec:3d},MS2={ints.ms2:d},"]
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
                    v = ints.eri[i, j, k, l]
                    if abs(v) > threshold:
                        lines.append(fmt.format(v, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            if abs(ints.h_core[i, j]) > threshold:
                lines.append(fmt.format(ints.h_core[i, j], i + 1, j + 1, 0, 0))
    lines.append(fmt.format(ints.e_core, 0, 0, 0, 0))
    return "\n".join(lines) + "\n"


def fixture_dir() -> Path:
    """Committed fixture directory, overridable via ADAPTFORGE_FIXTURES."""
    env = os.environ.get("ADAPTFORGE_FIXTURES")
    if env:
        return Path(env)
    return Path(__file__).parent / "fixtures"


def fixture_path(label: str) -> Path:
    return fixture_dir() / f"{label}.fcidump"


def load_fixture(label: str) -> IntegralSet:
    path = fixture_path(label)
    if not path.exists():
        raise FileNotFoundError(f"fixture {label!r} not found at {path}")
    return parse_fcidump(path.read_text())


def load_sidecar(label: str) -> dict:
    import json

    path = fixture_dir() / f"{label}.json"
    return json.loads(path.read_text())


FIXTURE_LABELS = [
    "h4_linear_1.5", "h4_linear_3", "h4_square_1.5", "h4_square_3",
    "h4_tetra_1.5", "h4_tetra_3", "h2o_1", "h2o_3",
]
