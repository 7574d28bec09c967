"""Spin-singlet-adapted excitation pool, orbital-subspace restriction, and embedding.

The pool follows the standard two-combination singlet basis for doubles: for
each quadruple (i<=j occupied, a<=b virtual) there are up to two linearly
independent singlet couplings; coincident indices collapse them to one, which
a Gram-matrix rank check removes.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from adaptforge.qubit_map import (
    FermionOperator,
    QubitOperator,
    SectorBasis,
    alpha_orbital,
    beta_orbital,
    jordan_wigner,
    to_sector_matrix,
    to_sparse,
)

Excitation = tuple  # ("s", i, a) | ("d", i, j, a, b, variant)


@dataclass
class PoolOperator:
    id: int
    label: str
    excitation: Excitation
    generator: FermionOperator  # anti-Hermitian, unit coefficient norm
    qubit_form: QubitOperator
    _matrices: dict = field(default_factory=dict, repr=False)

    def matrix(self, register) -> sp.csr_matrix:
        """Sparse realization, cached per register (SectorBasis or qubit count)."""
        if isinstance(register, SectorBasis):
            key = (register.n_qubits, register.n_alpha, register.n_beta)
            if key not in self._matrices:
                self._matrices[key] = to_sector_matrix(self.qubit_form, register)
        else:
            key = ("full", int(register))
            if key not in self._matrices:
                self._matrices[key] = to_sparse(self.qubit_form, int(register))
        return self._matrices[key]


@dataclass(frozen=True)
class SubspaceMap:
    """Ordered full-space spatial orbitals retained in the subspace."""

    active_spatial: tuple[int, ...]

    @property
    def n_s(self) -> int:
        return len(self.active_spatial)

    def validate(self, n_occ: int, n_orb: int | None = None) -> None:
        act = self.active_spatial
        if any(b <= a for a, b in zip(act, act[1:])):
            raise ValueError("active orbitals must be strictly increasing")
        if self.n_s % 2 == 0 and n_orb is not None:
            n_virt = n_orb - n_occ
            if self.n_s // 2 <= min(n_occ, n_virt):
                occ = sum(1 for p in act if p < n_occ)
                if occ != self.n_s // 2:
                    raise ValueError("even subspace must balance occupied and virtual orbitals")

    def compact_index(self, full: int) -> int:
        return self.active_spatial.index(full)


def _single_excitation(i: int, a: int) -> FermionOperator:
    t = FermionOperator.from_term(((alpha_orbital(a), 1), (alpha_orbital(i), 0)), 1.0)
    t = t + FermionOperator.from_term(((beta_orbital(a), 1), (beta_orbital(i), 0)), 1.0)
    return t


def _double_excitation(i: int, j: int, a: int, b: int, variant: int) -> FermionOperator:
    """Singlet-coupled ij->ab pair excitations.

    Variant 0 couples both pairs to triplets (total singlet), variant 1 couples
    both to singlets; both commute with S^2, S_z, and N.
    """
    aa, ab = alpha_orbital(a), beta_orbital(a)
    ba, bb = alpha_orbital(b), beta_orbital(b)
    ia, ib = alpha_orbital(i), beta_orbital(i)
    ja, jb = alpha_orbital(j), beta_orbital(j)

    def term(p, q, r, s, c):
        # a^+_p a^+_q a_r a_s
        return FermionOperator.from_term(((p, 1), (q, 1), (r, 0), (s, 0)), c)

    if variant == 0:
        w2, w1 = 2.0 / np.sqrt(12.0), 1.0 / np.sqrt(12.0)
        t = term(aa, ba, ja, ia, w2)
        t = t + term(ab, bb, jb, ib, w2)
        t = t + term(aa, bb, jb, ia, w1)
        t = t + term(aa, bb, ja, ib, w1)
        t = t + term(ab, ba, jb, ia, w1)
        t = t + term(ab, ba, ja, ib, w1)
    else:
        t = term(aa, bb, jb, ia, 0.5)
        t = t - term(aa, bb, ja, ib, 0.5)
        t = t - term(ab, ba, jb, ia, 0.5)
        t = t + term(ab, ba, ja, ib, 0.5)
    return t


def _anti_hermitian(t: FermionOperator) -> FermionOperator:
    return (t - t.dagger()).normal_ordered()


def _coefficient_vector(ops: list[FermionOperator]) -> np.ndarray:
    keys = sorted({t for op in ops for t in op.terms})
    mat = np.zeros((len(ops), len(keys)), dtype=complex)
    for r, op in enumerate(ops):
        for c, key in enumerate(keys):
            mat[r, c] = op.terms.get(key, 0.0)
    return mat


def _independent(ops: list[FermionOperator], tol: float = 1e-10) -> list[int]:
    """Indices of a maximal linearly independent subset, preferring earlier entries."""
    if not ops:
        return []
    mat = _coefficient_vector(ops)
    keep: list[int] = []
    for r in range(len(ops)):
        trial = mat[keep + [r]]
        gram = trial @ trial.conj().T
        rank = np.linalg.matrix_rank(gram, tol=tol)
        if rank == len(keep) + 1:
            keep.append(r)
    return keep


def build_pool(n_orb: int, n_occ: int) -> list[PoolOperator]:
    """Occupied-to-virtual singlet singles and doubles, deterministic order."""
    if not 0 < n_occ < n_orb:
        raise ValueError("need at least one occupied and one virtual orbital")
    pool: list[PoolOperator] = []

    def append(label: str, excitation: Excitation, t: FermionOperator) -> None:
        gen = _anti_hermitian(t)
        norm = gen.coefficient_norm()
        if norm < 1e-12:
            return
        gen = gen * (1.0 / norm)
        pool.append(PoolOperator(
            id=len(pool), label=label, excitation=excitation,
            generator=gen, qubit_form=jordan_wigner(gen).simplify(),
        ))

    for i in range(n_occ):
        for a in range(n_occ, n_orb):
            append(f"{i}->{a}", ("s", i, a), _single_excitation(i, a))

    for i in range(n_occ):
        for j in range(i, n_occ):
            for a in range(n_occ, n_orb):
                for b in range(a, n_orb):
                    cands = []
                    for v in (0, 1):
                        gen = _anti_hermitian(_double_excitation(i, j, a, b, v))
                        if gen.coefficient_norm() > 1e-12:
                            cands.append((v, gen))
                    for k in _independent([gen for _, gen in cands]):
                        v = cands[k][0]
                        append(
                            f"({i},{j})->({a},{b}){'AB'[v]}",
                            ("d", i, j, a, b, v),
                            _double_excitation(i, j, a, b, v),
                        )
    return pool


def _map_excitation(exc: Excitation, index_map: dict[int, int]) -> Excitation:
    if exc[0] == "s":
        return ("s", index_map[exc[1]], index_map[exc[2]])
    _, i, j, a, b, v = exc
    return ("d", index_map[i], index_map[j], index_map[a], index_map[b], v)


def restrict_pool(pool: list[PoolOperator], smap: SubspaceMap) -> list[PoolOperator]:
    """Operators whose spatial indices all lie in the subspace, re-indexed compactly.

    The restricted operators are rebuilt on the compact register so their ids
    run 0..len-1 and their labels use subspace indices.
    """
    full_to_compact = {p: k for k, p in enumerate(smap.active_spatial)}
    out: list[PoolOperator] = []
    for op in pool:
        indices = op.excitation[1:3] if op.excitation[0] == "s" else op.excitation[1:5]
        if not all(p in full_to_compact for p in indices):
            continue
        exc = _map_excitation(op.excitation, full_to_compact)
        if exc[0] == "s":
            t = _single_excitation(exc[1], exc[2])
            label = f"{exc[1]}->{exc[2]}"
        else:
            t = _double_excitation(*exc[1:])
            label = f"({exc[1]},{exc[2]})->({exc[3]},{exc[4]}){'AB'[exc[5]]}"
        gen = _anti_hermitian(t)
        gen = gen * (1.0 / gen.coefficient_norm())
        out.append(PoolOperator(
            id=len(out), label=label, excitation=exc,
            generator=gen, qubit_form=jordan_wigner(gen).simplify(),
        ))
    return out


def embed_ansatz(
    subspace_elements: list[tuple[PoolOperator, float]],
    smap: SubspaceMap,
    full_pool: list[PoolOperator],
) -> list[tuple[PoolOperator, float]]:
    """Carry a subspace ansatz into the full space: same excitations, same amplitudes."""
    compact_to_full = dict(enumerate(smap.active_spatial))
    by_excitation = {op.excitation: op for op in full_pool}
    out: list[tuple[PoolOperator, float]] = []
    for op, theta in subspace_elements:
        target = _map_excitation(op.excitation, compact_to_full)
        if target not in by_excitation:
            raise RuntimeError(f"subspace operator {op.label} has no full-space image")
        out.append((by_excitation[target], theta))
    return out


def select_subspace(source, n_s: int, criterion: str = "occupancy") -> SubspaceMap:
    """Choose n_s orbitals around the Fermi level.

    Canonical solutions use orbital energies; natural-orbital rotations use the
    configured criterion: occupation distance from 1 ("occupancy", default) or
    the Fock-expectation diagonal ("fock"). Ties resolve to the lower index.
    """
    from adaptforge.scf import OrbitalRotation, ScfSolution

    if isinstance(source, ScfSolution):
        n_orb = source.c_alpha.shape[0]
        n_occ = source.n_elec // 2
        scores = source.eps_alpha
        mode = "energy"
    elif isinstance(source, OrbitalRotation):
        n_orb = source.u.shape[0]
        n_occ = int(round(float(source.occupancies.sum())) // 2)
        if criterion == "fock":
            if source.fock_diagonal is None:
                raise ValueError("rotation carries no Fock diagonal metadata")
            scores = source.fock_diagonal
            mode = "energy"
        else:
            scores = source.occupancies
            mode = "occupancy"
    else:
        raise TypeError(f"cannot select a subspace from {type(source).__name__}")

    if n_s % 2 or n_s > n_orb:
        raise ValueError(f"subspace size must be even and <= {n_orb}, got {n_s}")
    n_virt = n_orb - n_occ
    # balanced split around the Fermi level, clamped when one block is smaller
    k_occ = min(n_occ, n_s // 2)
    if n_s - k_occ > n_virt:
        k_occ = n_s - n_virt
    k_vir = n_s - k_occ
    if k_occ < 1 or k_vir < 1:
        raise ValueError("subspace must retain occupied and virtual orbitals")

    if mode == "energy":
        occ_sel = sorted(range(n_occ), key=lambda p: (-scores[p], p))[:k_occ]
        vir_sel = sorted(range(n_occ, n_orb), key=lambda p: (scores[p], p))[:k_vir]
    else:
        occ_sel = sorted(range(n_occ), key=lambda p: (abs(scores[p] - 1.0), p))[:k_occ]
        vir_sel = sorted(range(n_occ, n_orb), key=lambda p: (abs(scores[p] - 1.0), p))[:k_vir]
    smap = SubspaceMap(tuple(sorted(occ_sel + vir_sel)))
    smap.validate(n_occ, n_orb)
    return smap
