"""AO-basis RHF/UHF with DIIS, used only to produce canonical MOs and reference energies."""

import numpy as np


class DiisBuffer:
    def __init__(self, max_vecs: int = 8):
        self.max_vecs = max_vecs
        self.focks: list[np.ndarray] = []
        self.errors: list[np.ndarray] = []

    def push(self, fock: np.ndarray, error: np.ndarray) -> np.ndarray:
        self.focks.append(fock)
        self.errors.append(error)
        if len(self.focks) > self.max_vecs:
            self.focks.pop(0)
            self.errors.pop(0)
        n = len(self.focks)
        if n < 2:
            return fock
        b = -np.ones((n + 1, n + 1))
        b[n, n] = 0.0
        for i in range(n):
            for j in range(n):
                b[i, j] = np.vdot(self.errors[i], self.errors[j])
        rhs = np.zeros(n + 1)
        rhs[n] = -1.0
        try:
            coef = np.linalg.solve(b, rhs)
        except np.linalg.LinAlgError:
            return fock
        out = np.zeros_like(fock)
        for i in range(n):
            out += coef[i] * self.focks[i]
        return out


def _orthogonalizer(s: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(s)
    return vecs @ np.diag(vals**-0.5) @ vecs.T


def _build_jk(eri: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    j = np.einsum("pqrs,rs->pq", eri, d)
    k = np.einsum("prqs,rs->pq", eri, d)
    return j, k


def rhf(s, h, eri, n_elec, e_nuc, max_iter=300, e_tol=1e-12, d_tol=1e-10):
    """Closed-shell SCF. Returns (energy, C, eps) with MOs sorted by energy."""
    if n_elec % 2:
        raise ValueError("RHF requires an even electron count")
    n_occ = n_elec // 2
    x = _orthogonalizer(s)
    eps, c_ortho = np.linalg.eigh(x.T @ h @ x)
    c = x @ c_ortho
    d = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
    diis = DiisBuffer()
    energy = 0.0
    for it in range(max_iter):
        j, k = _build_jk(eri, d)
        f = h + j - 0.5 * k
        e_new = 0.5 * np.einsum("pq,pq->", d, h + f) + e_nuc
        err = x.T @ (f @ d @ s - s @ d @ f) @ x
        f_eff = diis.push(f, err) if it > 1 else f
        eps, c_ortho = np.linalg.eigh(x.T @ f_eff @ x)
        c = x @ c_ortho
        d_new = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
        if abs(e_new - energy) < e_tol and np.max(np.abs(d_new - d)) < d_tol:
            # canonicalize against the un-extrapolated Fock
            eps, c_ortho = np.linalg.eigh(x.T @ f @ x)
            c = x @ c_ortho
            return e_new, c, eps
        d, energy = d_new, e_new
    raise RuntimeError(f"RHF did not converge in {max_iter} iterations (E={energy})")


# (alpha_deg, beta_deg, n_frontier_pairs): deterministic seed ladder; the lowest
# converged solution wins. A single fixed angle lands in high local minima for
# some of the stretched geometries.
UHF_SEEDS = [
    (30.0, 0.0, 1),
    (30.0, -30.0, 1),
    (45.0, 0.0, 1),
    (45.0, -45.0, 1),
    (30.0, -30.0, 2),
]


def _uhf_single(s, h, eri, n_elec, e_nuc, c0, seed, max_iter, e_tol, d_tol, damp_until=15):
    alpha_deg, beta_deg, n_pairs = seed
    na = (n_elec + 1) // 2
    nb = n_elec - na
    x = _orthogonalizer(s)
    ca, cb = c0.copy(), c0.copy()
    for k in range(n_pairs):
        occ, vir = na - 1 - k, na + k
        if occ < 0 or vir >= ca.shape[1]:
            break
        for cc, deg in ((ca, alpha_deg), (cb, beta_deg)):
            th = np.deg2rad(deg)
            homo, lumo = cc[:, occ].copy(), cc[:, vir].copy()
            cc[:, occ] = np.cos(th) * homo + np.sin(th) * lumo
            cc[:, vir] = -np.sin(th) * homo + np.cos(th) * lumo
    da = ca[:, :na] @ ca[:, :na].T
    db = cb[:, :nb] @ cb[:, :nb].T
    diis_a, diis_b = DiisBuffer(), DiisBuffer()
    energy = 0.0
    fa_prev = fb_prev = None
    for it in range(max_iter):
        jt, _ = _build_jk(eri, da + db)
        _, ka = _build_jk(eri, da)
        _, kb = _build_jk(eri, db)
        fa = h + jt - ka
        fb = h + jt - kb
        e_new = 0.5 * (
            np.einsum("pq,pq->", da + db, h)
            + np.einsum("pq,pq->", da, fa)
            + np.einsum("pq,pq->", db, fb)
        ) + e_nuc
        erra = x.T @ (fa @ da @ s - s @ da @ fa) @ x
        errb = x.T @ (fb @ db @ s - s @ db @ fb) @ x
        use_diis = it >= damp_until
        if not use_diis and fa_prev is not None:
            fa = 0.4 * fa + 0.6 * fa_prev
            fb = 0.4 * fb + 0.6 * fb_prev
        fa_prev, fb_prev = fa, fb
        fa_eff = diis_a.push(fa, erra) if use_diis else fa
        fb_eff = diis_b.push(fb, errb) if use_diis else fb
        _, ca_o = np.linalg.eigh(x.T @ fa_eff @ x)
        _, cb_o = np.linalg.eigh(x.T @ fb_eff @ x)
        ca = x @ ca_o
        cb = x @ cb_o
        da_new = ca[:, :na] @ ca[:, :na].T
        db_new = cb[:, :nb] @ cb[:, :nb].T
        delta_d = max(np.max(np.abs(da_new - da)), np.max(np.abs(db_new - db)))
        converged = abs(e_new - energy) < e_tol and delta_d < d_tol and it > damp_until
        da, db, energy = da_new, db_new, e_new
        if converged:
            return e_new, (ca, cb)
    raise RuntimeError(f"UHF seed {seed} did not converge (E={energy})")


def uhf(s, h, eri, n_elec, e_nuc, max_iter=2000, e_tol=1e-12, d_tol=1e-10):
    """Spin-unrestricted SCF over the deterministic seed ladder; lowest minimum wins."""
    if n_elec % 2 == 0:
        e_rhf, c0, _ = rhf(s, h, eri, n_elec, e_nuc)
    else:
        x = _orthogonalizer(s)
        _, c_ortho = np.linalg.eigh(x.T @ h @ x)
        c0 = x @ c_ortho
        e_rhf = np.inf
    best = (e_rhf, None)
    failures = []
    for seed in UHF_SEEDS:
        try:
            e, cs = _uhf_single(s, h, eri, n_elec, e_nuc, c0, seed, max_iter, e_tol, d_tol)
        except RuntimeError as exc:
            failures.append(str(exc))
            continue
        if e < best[0]:
            best = (e, cs)
    if best[1] is None and n_elec % 2:
        raise RuntimeError("all UHF seeds failed: " + "; ".join(failures))
    if best[1] is None:
        best = (e_rhf, (c0, c0))  # no broken-symmetry solution below RHF
    return best


def mo_transform(h, eri, c):
    """AO->MO transform; returns (h_mo, eri_mo) with chemist-index ERI."""
    h_mo = c.T @ h @ c
    tmp = np.einsum("pqrs,pi->iqrs", eri, c, optimize=True)
    tmp = np.einsum("iqrs,qj->ijrs", tmp, c, optimize=True)
    tmp = np.einsum("ijrs,rk->ijks", tmp, c, optimize=True)
    eri_mo = np.einsum("ijks,sl->ijkl", tmp, c, optimize=True)
    return h_mo, eri_mo
