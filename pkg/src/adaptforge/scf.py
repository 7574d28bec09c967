"""Self-consistent field in the orthonormal orbital basis of the integral file.

Restricted and unrestricted solutions, natural orbitals from the total UHF
density, integral rotation between orbital bases, and frozen-core/active-space
reduction. The input basis is orthonormal (FCIDUMP of canonical MOs), so there
is no overlap matrix anywhere.
"""

from dataclasses import dataclass

import numpy as np

from adaptforge.io_integrals import IntegralSet


class ScfConvergenceError(RuntimeError):
    def __init__(self, label: str, energy: float, error_norm: float, iterations: int):
        super().__init__(
            f"{label} did not converge after {iterations} iterations "
            f"(last E={energy:.12f}, |[F,D]|={error_norm:.3e})"
        )
        self.energy = energy
        self.error_norm = error_norm


@dataclass
class ScfSolution:
    kind: str  # "restricted" | "unrestricted"
    c_alpha: np.ndarray
    c_beta: np.ndarray
    eps_alpha: np.ndarray
    eps_beta: np.ndarray
    energy: float
    density_total: np.ndarray
    n_elec: int
    fock_alpha: np.ndarray
    fock_beta: np.ndarray


@dataclass
class OrbitalRotation:
    """Unitary over spatial orbitals with occupation metadata."""

    u: np.ndarray
    occupancies: np.ndarray
    provenance: str  # "canonical" | "natural" | "external"
    fock_diagonal: np.ndarray | None = None

    def validate(self, n_elec: int | None = None) -> None:
        n = self.u.shape[0]
        if np.max(np.abs(self.u.T @ self.u - np.eye(n))) > 1e-10:
            raise ValueError("rotation is not unitary")
        occ = self.occupancies
        if np.any(np.diff(occ) > 1e-12):
            raise ValueError("occupancies not sorted descending")
        if np.any(occ < -1e-10) or np.any(occ > 2.0 + 1e-10):
            raise ValueError("occupancies outside [0, 2]")
        if n_elec is not None and abs(occ.sum() - n_elec) > 1e-8:
            raise ValueError("occupancies do not sum to the electron count")


def _coulomb_exchange(eri: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    j = np.einsum("pqrs,rs->pq", eri, d, optimize=True)
    k = np.einsum("prqs,rs->pq", eri, d, optimize=True)
    return j, k


class _Diis:
    """Pulay extrapolation over stacked Fock matrices, history-limited."""

    def __init__(self, history: int = 8):
        self.history = history
        self.focks: list[np.ndarray] = []
        self.errors: list[np.ndarray] = []

    def extrapolate(self, fock: np.ndarray, error: np.ndarray) -> np.ndarray:
        self.focks.append(fock.copy())
        self.errors.append(error.copy())
        if len(self.focks) > self.history:
            self.focks.pop(0)
            self.errors.pop(0)
        m = len(self.focks)
        if m < 2:
            return fock
        b = -np.ones((m + 1, m + 1))
        b[m, m] = 0.0
        for i in range(m):
            for j in range(m):
                b[i, j] = np.vdot(self.errors[i], self.errors[j])
        rhs = np.zeros(m + 1)
        rhs[m] = -1.0
        try:
            coef = np.linalg.solve(b, rhs)[:m]
        except np.linalg.LinAlgError:
            # fall back to plain damping on a singular DIIS system
            return 0.5 * (fock + self.focks[-2])
        return np.tensordot(coef, np.array(self.focks), axes=1)


def run_rhf(ints: IntegralSet, max_iter: int = 300,
            e_tol: float = 1e-10, d_tol: float = 1e-8) -> ScfSolution:
    """Closed-shell Roothaan iterations with DIIS acceleration.

    The initial density occupies the first n_occ input orbitals: FCIDUMP bases
    are canonical MOs, so that guess reproduces the solution the basis encodes
    instead of hopping to a different stationary point on degenerate systems.
    """
    if ints.n_elec % 2:
        raise ValueError("run_rhf requires an even electron count")
    n_occ = ints.n_elec // 2
    h = ints.h_core
    d = np.zeros_like(h)
    d[:n_occ, :n_occ] = 2.0 * np.eye(n_occ)
    diis = _Diis()
    energy, err_norm = np.inf, np.inf
    for _ in range(max_iter):
        j, k = _coulomb_exchange(ints.eri, d)
        f = h + j - 0.5 * k
        e_new = 0.5 * np.einsum("pq,pq->", d, h + f) + ints.e_core
        err = f @ d - d @ f
        err_norm = np.max(np.abs(err))
        f_eff = diis.extrapolate(f, err)
        eps, c = np.linalg.eigh(f_eff)
        d_new = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
        converged = abs(e_new - energy) < e_tol and np.max(np.abs(d_new - d)) < d_tol
        d, energy = d_new, e_new
        if converged:
            j, k = _coulomb_exchange(ints.eri, d)
            f = h + j - 0.5 * k
            eps, c = np.linalg.eigh(f)
            d = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
            return ScfSolution(
                kind="restricted", c_alpha=c, c_beta=c.copy(),
                eps_alpha=eps, eps_beta=eps.copy(),
                energy=float(energy), density_total=d,
                n_elec=ints.n_elec, fock_alpha=f, fock_beta=f.copy(),
            )
    raise ScfConvergenceError("RHF", float(energy), float(err_norm), max_iter)


# (alpha_deg, beta_deg, n_frontier_pairs) guesses tried in order; the lowest
# converged minimum wins. One fixed angle is not enough: stretched water needs
# opposite-spin mixing while square H4 prefers the alpha-only rotation.
UHF_SEEDS: list[tuple[float, float, int]] = [
    (30.0, 0.0, 1),
    (30.0, -30.0, 1),
    (45.0, 0.0, 1),
    (45.0, -45.0, 1),
    (30.0, -30.0, 2),
]


def _mixed_guess(c0: np.ndarray, n_alpha: int, seed: tuple[float, float, int]):
    alpha_deg, beta_deg, n_pairs = seed
    ca, cb = c0.copy(), c0.copy()
    for k in range(n_pairs):
        occ, vir = n_alpha - 1 - k, n_alpha + k
        if occ < 0 or vir >= ca.shape[1]:
            break
        for c, deg in ((ca, alpha_deg), (cb, beta_deg)):
            th = np.deg2rad(deg)
            homo, lumo = c[:, occ].copy(), c[:, vir].copy()
            c[:, occ] = np.cos(th) * homo + np.sin(th) * lumo
            c[:, vir] = -np.sin(th) * homo + np.cos(th) * lumo
    return ca, cb


def _uhf_iterate(ints: IntegralSet, ca: np.ndarray, cb: np.ndarray,
                 n_alpha: int, n_beta: int, max_iter: int,
                 e_tol: float, d_tol: float, damp_until: int = 15) -> ScfSolution:
    h = ints.h_core
    da = ca[:, :n_alpha] @ ca[:, :n_alpha].T
    db = cb[:, :n_beta] @ cb[:, :n_beta].T
    diis = _Diis()
    energy, err_norm = np.inf, np.inf
    f_prev = None
    for it in range(max_iter):
        jt, _ = _coulomb_exchange(ints.eri, da + db)
        _, ka = _coulomb_exchange(ints.eri, da)
        _, kb = _coulomb_exchange(ints.eri, db)
        fa, fb = h + jt - ka, h + jt - kb
        e_new = 0.5 * (
            np.einsum("pq,pq->", da + db, h)
            + np.einsum("pq,pq->", da, fa)
            + np.einsum("pq,pq->", db, fb)
        ) + ints.e_core
        erra, errb = fa @ da - da @ fa, fb @ db - db @ fb
        err_norm = max(np.max(np.abs(erra)), np.max(np.abs(errb)))
        use_diis = it >= damp_until
        stacked = np.stack([fa, fb])
        if not use_diis and f_prev is not None:
            stacked = 0.4 * stacked + 0.6 * f_prev
        f_prev = stacked
        f_eff = diis.extrapolate(stacked, np.stack([erra, errb])) if use_diis else stacked
        epsa, ca = np.linalg.eigh(f_eff[0])
        epsb, cb = np.linalg.eigh(f_eff[1])
        da_new = ca[:, :n_alpha] @ ca[:, :n_alpha].T
        db_new = cb[:, :n_beta] @ cb[:, :n_beta].T
        delta = max(np.max(np.abs(da_new - da)), np.max(np.abs(db_new - db)))
        converged = abs(e_new - energy) < e_tol and delta < d_tol and it > damp_until
        da, db, energy = da_new, db_new, e_new
        if converged:
            epsa, ca = np.linalg.eigh(fa)
            epsb, cb = np.linalg.eigh(fb)
            da = ca[:, :n_alpha] @ ca[:, :n_alpha].T
            db = cb[:, :n_beta] @ cb[:, :n_beta].T
            return ScfSolution(
                kind="unrestricted", c_alpha=ca, c_beta=cb,
                eps_alpha=epsa, eps_beta=epsb,
                energy=float(energy), density_total=da + db,
                n_elec=ints.n_elec, fock_alpha=fa, fock_beta=fb,
            )
    raise ScfConvergenceError("UHF", float(energy), float(err_norm), max_iter)


def run_uhf(ints: IntegralSet, seeds=None, max_iter: int = 2000,
            e_tol: float = 1e-10, d_tol: float = 1e-8) -> ScfSolution:
    """Unrestricted SCF over symmetry-breaking guesses; keeps the lowest minimum.

    Each seed is (alpha_deg, beta_deg, n_pairs): frontier occupied/virtual
    rotations applied per spin block. For even electron counts E_UHF <= E_RHF
    is guaranteed: the restricted solution is itself a UHF stationary point and
    is returned when no seed lands below it.
    """
    n_alpha = (ints.n_elec + ints.ms2) // 2
    n_beta = ints.n_elec - n_alpha
    rhf_sol = None
    if ints.n_elec % 2 == 0 and ints.ms2 == 0:
        rhf_sol = run_rhf(ints, max_iter=max_iter)
        c0 = rhf_sol.c_alpha
    else:
        _, c0 = np.linalg.eigh(ints.h_core)
    if seeds is None:
        seeds = UHF_SEEDS
    best: ScfSolution | None = None
    failures: list[str] = []
    for seed in seeds:
        ca, cb = _mixed_guess(c0, n_alpha, seed)
        try:
            sol = _uhf_iterate(ints, ca, cb, n_alpha, n_beta, max_iter, e_tol, d_tol)
        except ScfConvergenceError as exc:
            failures.append(str(exc))
            continue
        if best is None or sol.energy < best.energy:
            best = sol
    if rhf_sol is not None and (best is None or best.energy > rhf_sol.energy):
        return ScfSolution(
            kind="unrestricted",
            c_alpha=rhf_sol.c_alpha, c_beta=rhf_sol.c_beta,
            eps_alpha=rhf_sol.eps_alpha, eps_beta=rhf_sol.eps_beta,
            energy=rhf_sol.energy, density_total=rhf_sol.density_total,
            n_elec=ints.n_elec,
            fock_alpha=rhf_sol.fock_alpha, fock_beta=rhf_sol.fock_beta,
        )
    if best is None:
        raise ScfConvergenceError("UHF", float("nan"), float("nan"), max_iter)
    return best


def natural_orbitals(sol: ScfSolution, rhf_fock: np.ndarray | None = None) -> OrbitalRotation:
    """Eigenbasis of the spin-summed density, sorted by descending occupation.

    Equal occupancies are ordered by the index of the dominant canonical
    component so the output is deterministic. `rhf_fock` supplies the Fock
    matrix used for the orbital-energy metadata; defaults to the solution's
    spin-averaged Fock.
    """
    occ, vecs = np.linalg.eigh(sol.density_total)
    occ, vecs = occ[::-1].copy(), vecs[:, ::-1].copy()
    order = sorted(
        range(len(occ)),
        key=lambda k: (-round(occ[k] / 1e-10), int(np.argmax(np.abs(vecs[:, k])))),
    )
    occ = occ[order]
    u = vecs[:, order]
    # fix the sign convention: largest component positive
    for k in range(u.shape[1]):
        lead = np.argmax(np.abs(u[:, k]))
        if u[lead, k] < 0:
            u[:, k] = -u[:, k]
    occ = np.clip(occ, 0.0, 2.0)
    fock = rhf_fock if rhf_fock is not None else 0.5 * (sol.fock_alpha + sol.fock_beta)
    fock_diag = np.einsum("pk,pq,qk->k", u, fock, u)
    return OrbitalRotation(u=u, occupancies=occ, provenance="natural", fock_diagonal=fock_diag)


def rotate_integrals(ints: IntegralSet, rot: OrbitalRotation) -> IntegralSet:
    """Transform integrals into the basis given by the rotation's columns."""
    u = rot.u
    if u.shape != (ints.n_orb, ints.n_orb):
        raise ValueError("rotation dimension does not match the integral set")
    h = u.T @ ints.h_core @ u
    eri = np.einsum("pqrs,pi,qj,rk,sl->ijkl", ints.eri, u, u, u, u, optimize=True)
    return IntegralSet(ints.n_orb, ints.n_elec, ints.ms2, h, eri, ints.e_core)


def freeze_and_select(ints: IntegralSet, frozen_occ: list[int],
                      deleted_virt: list[int]) -> IntegralSet:
    """Fold frozen doubly-occupied orbitals into effective integrals and drop virtuals."""
    if not frozen_occ and not deleted_virt:
        return ints
    n_occ = ints.n_elec // 2
    frozen = sorted(frozen_occ)
    deleted = sorted(deleted_virt)
    if set(frozen) & set(deleted):
        raise ValueError("frozen and deleted lists overlap")
    if any(p < 0 or p >= n_occ for p in frozen):
        raise ValueError("frozen orbitals must be doubly occupied in the reference")
    if any(p < n_occ or p >= ints.n_orb for p in deleted):
        raise ValueError("deleted orbitals must be reference virtuals")

    active = [p for p in range(ints.n_orb) if p not in frozen and p not in deleted]
    e_core = ints.e_core
    for i in frozen:
        e_core += 2.0 * ints.h_core[i, i]
        for j in frozen:
            e_core += 2.0 * ints.eri[i, i, j, j] - ints.eri[i, j, j, i]
    h_eff = ints.h_core[np.ix_(active, active)].copy()
    for i in frozen:
        h_eff += (
            2.0 * ints.eri[np.ix_(active, active, [i], [i])][:, :, 0, 0]
            - ints.eri[np.ix_(active, [i], [i], active)][:, 0, 0, :]
        )
    eri_act = ints.eri[np.ix_(active, active, active, active)].copy()
    return IntegralSet(
        len(active), ints.n_elec - 2 * len(frozen), ints.ms2, h_eff, eri_act, float(e_core)
    )
