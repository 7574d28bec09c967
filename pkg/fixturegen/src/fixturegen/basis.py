"""3-21G basis data and contracted-Gaussian construction."""

from dataclasses import dataclass

import numpy as np

# Published 3-21G parameters (Binkley/Pople/Hehre), normalized-primitive
# contraction coefficients. SP shells share exponents between s and p.
BASIS_321G = {
    "H": [
        ("S", [(5.4471780, 0.1562850), (0.8245472, 0.9046910)]),
        ("S", [(0.1831916, 1.0000000)]),
    ],
    "O": [
        ("S", [(322.0370000, 0.0592394), (48.4308000, 0.3515000), (10.4206000, 0.7076580)]),
        ("SP", [(7.4029400, -0.4044530, 0.2445860), (1.5762000, 1.2215600, 0.8539550)]),
        ("SP", [(0.3736840, 1.0000000, 1.0000000)]),
    ],
}

NUCLEAR_CHARGE = {"H": 1, "O": 8}

# CODATA 2018 Bohr radius
ANGSTROM_TO_BOHR = 1.0 / 0.529177210903


@dataclass
class ContractedGaussian:
    """One contracted Cartesian Gaussian: sum_k c_k * N_k * x^l y^m z^n exp(-a_k r^2)."""

    center: np.ndarray
    lmn: tuple[int, int, int]
    exps: np.ndarray
    coefs: np.ndarray  # includes primitive norms and contracted renormalization


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def primitive_norm(alpha: float, lmn: tuple[int, int, int]) -> float:
    l, m, n = lmn
    num = (2.0 * alpha / np.pi) ** 0.75 * (4.0 * alpha) ** ((l + m + n) / 2.0)
    den = np.sqrt(
        _double_factorial(2 * l - 1)
        * _double_factorial(2 * m - 1)
        * _double_factorial(2 * n - 1)
    )
    return num / den


def build_basis(atoms: list[tuple[str, np.ndarray]]) -> list[ContractedGaussian]:
    """Expand 3-21G shells into contracted Cartesian functions.

    `atoms` holds (symbol, position-in-bohr). Order: per atom, shells in the
    published order, p components in (x, y, z) order.
    """
    from fixturegen.integrals import contracted_overlap

    functions = []
    for symbol, pos in atoms:
        for shell_type, primitives in BASIS_321G[symbol]:
            exps = np.array([p[0] for p in primitives])
            if shell_type == "S":
                comps = [((0, 0, 0), np.array([p[1] for p in primitives]))]
            elif shell_type == "SP":
                s_coefs = np.array([p[1] for p in primitives])
                p_coefs = np.array([p[2] for p in primitives])
                comps = [((0, 0, 0), s_coefs)]
                for lmn in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
                    comps.append((lmn, p_coefs))
            else:
                raise ValueError(f"unsupported shell type {shell_type}")
            for lmn, raw in comps:
                coefs = raw * np.array([primitive_norm(a, lmn) for a in exps])
                g = ContractedGaussian(np.asarray(pos, dtype=float), lmn, exps, coefs)
                g.coefs = coefs / np.sqrt(contracted_overlap(g, g))
                functions.append(g)
    return functions
