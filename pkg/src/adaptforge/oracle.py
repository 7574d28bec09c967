"""Exact references and diagnostics: FCI, density matrices, fidelity, MP1 amplitudes."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from adaptforge.io_integrals import IntegralSet
from adaptforge.qubit_map import (
    FermionOperator,
    SectorBasis,
    Statevector,
    alpha_orbital,
    beta_orbital,
    expectation,
    jordan_wigner,
    number_operator,
    s_squared_operator,
    sector_basis,
    to_sector_matrix,
)
from adaptforge.scf import ScfSolution


class InvalidDensityError(ValueError):
    pass


@dataclass
class OneParticleDensity:
    """Spin-summed spatial 1-RDM."""

    rho: np.ndarray

    def validate(self, n_elec: float | None = None) -> None:
        if np.max(np.abs(self.rho - self.rho.conj().T)) > 1e-10:
            raise InvalidDensityError("1-RDM is not Hermitian")
        vals = np.linalg.eigvalsh(self.rho)
        if vals.min() < -1e-8 or vals.max() > 2.0 + 1e-8:
            raise InvalidDensityError(f"occupation eigenvalues outside [0,2]: {vals}")
        if n_elec is not None and abs(np.trace(self.rho).real - n_elec) > 1e-8:
            raise InvalidDensityError("1-RDM trace does not match the electron count")


def sector_of_state(psi: Statevector, n_qubits: int) -> SectorBasis:
    """Particle sector of a (sector-pure) statevector, from its dominant amplitude."""
    idx = int(np.argmax(np.abs(psi)))
    n_alpha = bin(idx & 0x5555555555555555).count("1")
    n_beta = bin(idx & 0xAAAAAAAAAAAAAAAA).count("1")
    sector = sector_basis(n_qubits, n_alpha, n_beta)
    inside = float(np.linalg.norm(psi[sector.states]))
    total = float(np.linalg.norm(psi))
    if abs(inside - total) > 1e-8:
        raise ValueError("statevector is not confined to one particle sector")
    return sector


def fci_ground_state(h: sp.spmatrix, n_elec: int | None = None,
                     ms2: int = 0) -> tuple[float, Statevector]:
    """Lowest eigenpair of a full-register sparse Hamiltonian.

    When `n_elec` is given, the Lanczos start vector is projected onto the
    matching particle sector, which pins the iteration to that sector since the
    Hamiltonian commutes with the number operator.
    """
    dim = h.shape[0]
    n_qubits = dim.bit_length() - 1
    if 1 << n_qubits != dim:
        raise ValueError("matrix dimension is not a power of two")
    # deterministic start vector: eigsh defaults to a random one
    if n_elec is not None:
        n_alpha = (n_elec + ms2) // 2
        sector = sector_basis(n_qubits, n_alpha, n_elec - n_alpha)
        v0 = np.zeros(dim)
        v0[sector.states] = 1.0
        v0 /= np.linalg.norm(v0)
    else:
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
    if dim <= 512:
        dense = h.toarray()
        vals, vecs = np.linalg.eigh(dense)
        if n_elec is not None:
            # restrict to the sector block explicitly at small scale
            mask = np.zeros(dim, dtype=bool)
            mask[sector.states] = True
            sub = dense[np.ix_(mask, mask)]
            svals, svecs = np.linalg.eigh(sub)
            energy = float(svals[0])
            vec = np.zeros(dim, dtype=complex)
            vec[np.where(mask)[0]] = svecs[:, 0]
        else:
            energy, vec = float(vals[0]), vecs[:, 0].astype(complex)
    else:
        vals, vecs = spla.eigsh(h, k=1, which="SA", v0=v0, maxiter=10000)
        energy, vec = float(vals[0]), vecs[:, 0].astype(complex)
    residual = np.linalg.norm(h.dot(vec) - energy * vec)
    if residual > 1e-9:
        raise RuntimeError(f"eigensolver residual {residual:.2e} above 1e-9")
    return energy, vec


def fci_ground_state_sector(h_sector: sp.spmatrix) -> tuple[float, np.ndarray]:
    """Sector-compressed variant used for large registers."""
    dim = h_sector.shape[0]
    if dim <= 512:
        vals, vecs = np.linalg.eigh(h_sector.toarray())
        energy, vec = float(vals[0]), vecs[:, 0].astype(complex)
    else:
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        vals, vecs = spla.eigsh(h_sector, k=1, which="SA", v0=v0, maxiter=10000)
        energy, vec = float(vals[0]), vecs[:, 0].astype(complex)
    residual = np.linalg.norm(h_sector.dot(vec) - energy * vec)
    if residual > 1e-9:
        raise RuntimeError(f"eigensolver residual {residual:.2e} above 1e-9")
    return energy, vec


_EXCITATION_CACHE: dict[tuple, list[list[sp.spmatrix]]] = {}


def _excitation_matrices(sector: SectorBasis, n_orb: int) -> list[list[sp.spmatrix]]:
    key = (sector.n_qubits, sector.n_alpha, sector.n_beta, n_orb)
    if key not in _EXCITATION_CACHE:
        mats = []
        for p in range(n_orb):
            row = []
            for q in range(n_orb):
                f = FermionOperator.from_term(((alpha_orbital(p), 1), (alpha_orbital(q), 0)))
                f = f + FermionOperator.from_term(((beta_orbital(p), 1), (beta_orbital(q), 0)))
                row.append(to_sector_matrix(jordan_wigner(f), sector))
            mats.append(row)
        _EXCITATION_CACHE[key] = mats
    return _EXCITATION_CACHE[key]


def one_rdm_sector(coords: np.ndarray, sector: SectorBasis, n_orb: int) -> OneParticleDensity:
    mats = _excitation_matrices(sector, n_orb)
    rho = np.zeros((n_orb, n_orb))
    for p in range(n_orb):
        for q in range(p + 1):
            val = np.vdot(coords, mats[p][q].dot(coords))
            rho[p, q] = val.real
            rho[q, p] = val.real
    return OneParticleDensity(rho)


def one_rdm(psi: Statevector, n_orb: int) -> OneParticleDensity:
    """Spin-summed 1-RDM of a sector-pure statevector over 2*n_orb qubits."""
    sector = sector_of_state(psi, 2 * n_orb)
    return one_rdm_sector(sector.compress(psi), sector, n_orb)


def fidelity(rho_ref: OneParticleDensity, rho: OneParticleDensity) -> float:
    """Uhlmann-style fidelity of trace-normalized one-particle densities, in [0,1]."""
    r1 = np.asarray(rho_ref.rho, dtype=float)
    r2 = np.asarray(rho.rho, dtype=float)
    if r1.shape != r2.shape:
        raise ValueError("density dimensions differ")
    r1 = r1 / np.trace(r1)
    r2 = r2 / np.trace(r2)
    vals, vecs = np.linalg.eigh(r1)
    if vals.min() < -1e-8:
        raise InvalidDensityError(f"negative occupation {vals.min():.3e} in reference density")
    sqrt_r1 = vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    inner = sqrt_r1 @ r2 @ sqrt_r1
    ivals = np.linalg.eigvalsh(inner)
    if ivals.min() < -1e-8:
        raise InvalidDensityError(f"negative eigenvalue {ivals.min():.3e} in fidelity kernel")
    value = float(np.sum(np.sqrt(np.clip(ivals, 0.0, None))) ** 2)
    if value < -1e-9 or value > 1.0 + 1e-9:
        raise RuntimeError(f"fidelity {value} escaped [0,1] beyond tolerance")
    return min(max(value, 0.0), 1.0)


@dataclass
class Mp1Amplitudes:
    """Spin-orbital MP1 doubles amplitudes; flagged entries had near-zero denominators."""

    t: np.ndarray  # [occ_so, occ_so, virt_so, virt_so]
    flagged: np.ndarray
    occupied: list[int]
    virtual: list[int]


def mp1_amplitudes(ints: IntegralSet, sol: ScfSolution, den_tol: float = 1e-8) -> Mp1Amplitudes:
    """First-order doubles amplitudes -<ab||ij>/(e_a+e_b-e_i-e_j) over spin orbitals.

    Integrals are transformed into the solution's canonical MO basis first, so
    any orthonormal input basis is accepted.
    """
    if sol.kind != "restricted":
        raise ValueError("MP1 amplitudes require a restricted solution")
    n_occ = ints.n_elec // 2
    n_orb = ints.n_orb
    c = sol.c_alpha
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", ints.eri, c, c, c, c, optimize=True)
    occ = [2 * p + s for p in range(n_occ) for s in (0, 1)]
    virt = [2 * p + s for p in range(n_occ, n_orb) for s in (0, 1)]
    eps = sol.eps_alpha

    def spatial(so: int) -> tuple[int, int]:
        return so // 2, so % 2

    def phys(a, b, i, j) -> float:
        # <ab|ij> = (a i|b j) with spin conservation a~i, b~j
        (pa, sa), (pb, sb), (pi, si), (pj, sj) = map(spatial, (a, b, i, j))
        if sa != si or sb != sj:
            return 0.0
        return eri_mo[pa, pi, pb, pj]

    no, nv = len(occ), len(virt)
    t = np.zeros((no, no, nv, nv))
    flagged = np.zeros((no, no, nv, nv), dtype=bool)
    for ii, i in enumerate(occ):
        for jj, j in enumerate(occ):
            for aa, a in enumerate(virt):
                for bb, b in enumerate(virt):
                    num = phys(a, b, i, j) - phys(a, b, j, i)
                    den = eps[a // 2] + eps[b // 2] - eps[i // 2] - eps[j // 2]
                    if abs(den) < den_tol:
                        flagged[ii, jj, aa, bb] = True
                        continue
                    t[ii, jj, aa, bb] = -num / den
    return Mp1Amplitudes(t, flagged, occ, virt)


def mp2_energy(ints: IntegralSet, sol: ScfSolution) -> float:
    """Second-order correlation energy assembled from the MP1 amplitudes."""
    amps = mp1_amplitudes(ints, sol)
    c = sol.c_alpha
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", ints.eri, c, c, c, c, optimize=True)

    def spatial(so: int) -> tuple[int, int]:
        return so // 2, so % 2

    def phys(a, b, i, j) -> float:
        (pa, sa), (pb, sb), (pi, si), (pj, sj) = map(spatial, (a, b, i, j))
        if sa != si or sb != sj:
            return 0.0
        return eri_mo[pa, pi, pb, pj]

    e2 = 0.0
    for ii, i in enumerate(amps.occupied):
        for jj, j in enumerate(amps.occupied):
            for aa, a in enumerate(amps.virtual):
                for bb, b in enumerate(amps.virtual):
                    anti = phys(a, b, i, j) - phys(a, b, j, i)
                    e2 += 0.25 * amps.t[ii, jj, aa, bb] * anti
    return float(e2)


def spin_and_number(psi: Statevector, n_qubits: int | None = None) -> tuple[float, float]:
    """(<S^2>, <N>) of a sector-pure statevector."""
    if n_qubits is None:
        n_qubits = int(np.log2(len(psi)))
    sector = sector_of_state(psi, n_qubits)
    coords = sector.compress(psi)
    s2 = expectation(to_sector_matrix(s_squared_operator(n_qubits // 2), sector), coords)
    n = expectation(to_sector_matrix(number_operator(n_qubits), sector), coords)
    return s2, n


def amplitude_report(elements) -> list[tuple[int, float]]:
    """(operator id, |theta|) in ansatz order."""
    return [(op.id, abs(theta)) for op, theta in elements]
