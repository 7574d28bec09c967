"""Benchmark geometry set: H4 arrangements and water, coordinates in angstrom."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class GeometrySpec:
    label: str
    atoms: tuple[tuple[str, tuple[float, float, float]], ...]
    basis: str = "3-21G"
    n_elec: int = 0

    @property
    def charge_sum(self) -> int:
        from fixturegen.basis import NUCLEAR_CHARGE

        return sum(NUCLEAR_CHARGE[sym] for sym, _ in self.atoms)


def h4_linear(d: float) -> GeometrySpec:
    atoms = tuple(("H", (0.0, 0.0, i * d)) for i in range(4))
    return GeometrySpec(f"h4_linear_{d:g}", atoms, n_elec=4)


def h4_square(d: float) -> GeometrySpec:
    atoms = (
        ("H", (0.0, 0.0, 0.0)),
        ("H", (d, 0.0, 0.0)),
        ("H", (d, d, 0.0)),
        ("H", (0.0, d, 0.0)),
    )
    return GeometrySpec(f"h4_square_{d:g}", atoms, n_elec=4)


def h4_tetrahedral(d: float) -> GeometrySpec:
    # regular tetrahedron with edge length d
    s = d / (2.0 * math.sqrt(2.0))
    verts = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    atoms = tuple(("H", (s * x, s * y, s * z)) for x, y, z in verts)
    return GeometrySpec(f"h4_tetra_{d:g}", atoms, n_elec=4)


def h2o(r_oh: float, angle_deg: float = 104.5) -> GeometrySpec:
    half = math.radians(angle_deg) / 2.0
    atoms = (
        ("O", (0.0, 0.0, 0.0)),
        ("H", (r_oh * math.sin(half), 0.0, r_oh * math.cos(half))),
        ("H", (-r_oh * math.sin(half), 0.0, r_oh * math.cos(half))),
    )
    return GeometrySpec(f"h2o_{r_oh:g}", atoms, n_elec=10)


def benchmark_geometries() -> list[GeometrySpec]:
    out = []
    for d in (1.5, 3.0):
        out.append(h4_linear(d))
        out.append(h4_square(d))
        out.append(h4_tetrahedral(d))
    for r in (1.0, 3.0):
        out.append(h2o(r))
    return out
