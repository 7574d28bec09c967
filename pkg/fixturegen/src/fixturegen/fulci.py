"""Determinant-based FCI (Slater-Condon rules) for sidecar reference energies.

Independent of the main package's qubit-space machinery on purpose: the two
routes cross-validate each other.
"""

from itertools import combinations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def _strings(n_orb: int, n_elec: int) -> list[int]:
    return [sum(1 << i for i in occ) for occ in combinations(range(n_orb), n_elec)]


def _occ_list(mask: int) -> list[int]:
    out = []
    i = 0
    while mask >> i:
        if (mask >> i) & 1:
            out.append(i)
        i += 1
    return out


def _single_sign(mask: int, i: int, a: int) -> int:
    lo, hi = (i, a) if i < a else (a, i)
    between = mask & (((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
    return -1 if bin(between).count("1") % 2 else 1


def _single_element(h, eri, occ_same, occ_other, i, a):
    val = h[i, a]
    for j in occ_same:
        val += eri[i, a, j, j] - eri[i, j, j, a]
    for j in occ_other:
        val += eri[i, a, j, j]
    return val


def fci_ground_energy(h, eri, e_core, n_elec, n_orb, ms2=0, dense_cutoff=4000):
    """Lowest eigenvalue of the FCI Hamiltonian; chemist-notation spatial eri."""
    n_alpha = (n_elec + ms2) // 2
    n_beta = n_elec - n_alpha
    sa = _strings(n_orb, n_alpha)
    sb = _strings(n_orb, n_beta)
    pos_a = {m: k for k, m in enumerate(sa)}
    pos_b = {m: k for k, m in enumerate(sb)}
    na, nb = len(sa), len(sb)
    dim = na * nb

    rows, cols, vals = [], [], []

    def emit(i_row, j_col, v):
        if j_col >= i_row and abs(v) > 1e-14:
            rows.append(i_row)
            cols.append(j_col)
            vals.append(v)

    virt = [(m, [p for p in range(n_orb) if not (m >> p) & 1]) for m in sa]

    for ia, ma in enumerate(sa):
        occ_a = _occ_list(ma)
        vir_a = virt[ia][1]
        for ib, mb in enumerate(sb):
            occ_b = _occ_list(mb)
            vir_b = [p for p in range(n_orb) if not (mb >> p) & 1]
            row = ia * nb + ib

            diag = e_core
            for i in occ_a:
                diag += h[i, i]
            for i in occ_b:
                diag += h[i, i]
            for i in occ_a:
                for j in occ_a:
                    diag += 0.5 * (eri[i, i, j, j] - eri[i, j, j, i])
            for i in occ_b:
                for j in occ_b:
                    diag += 0.5 * (eri[i, i, j, j] - eri[i, j, j, i])
            for i in occ_a:
                for j in occ_b:
                    diag += eri[i, i, j, j]
            emit(row, row, diag)

            # alpha singles + alpha-alpha doubles
            for i in occ_a:
                for a in vir_a:
                    s1 = _single_sign(ma, i, a)
                    ma1 = ma ^ (1 << i) ^ (1 << a)
                    col = pos_a[ma1] * nb + ib
                    emit(row, col, s1 * _single_element(h, eri, occ_a, occ_b, i, a))
                    for j in occ_a:
                        if j <= i:
                            continue
                        for b in vir_a:
                            if b <= a:
                                continue
                            if (ma1 >> j) & 1 and not (ma1 >> b) & 1:
                                s2 = _single_sign(ma1, j, b)
                                ma2 = ma1 ^ (1 << j) ^ (1 << b)
                                col2 = pos_a[ma2] * nb + ib
                                v = s1 * s2 * (eri[i, a, j, b] - eri[i, b, j, a])
                                emit(row, col2, v)

            # beta singles + beta-beta doubles
            for i in occ_b:
                for a in vir_b:
                    s1 = _single_sign(mb, i, a)
                    mb1 = mb ^ (1 << i) ^ (1 << a)
                    col = ia * nb + pos_b[mb1]
                    emit(row, col, s1 * _single_element(h, eri, occ_b, occ_a, i, a))
                    for j in occ_b:
                        if j <= i:
                            continue
                        for b in vir_b:
                            if b <= a:
                                continue
                            if (mb1 >> j) & 1 and not (mb1 >> b) & 1:
                                s2 = _single_sign(mb1, j, b)
                                mb2 = mb1 ^ (1 << j) ^ (1 << b)
                                col2 = ia * nb + pos_b[mb2]
                                v = s1 * s2 * (eri[i, a, j, b] - eri[i, b, j, a])
                                emit(row, col2, v)

            # alpha-beta doubles
            for i in occ_a:
                for a in vir_a:
                    s1 = _single_sign(ma, i, a)
                    ka = pos_a[ma ^ (1 << i) ^ (1 << a)]
                    for j in occ_b:
                        for b in vir_b:
                            s2 = _single_sign(mb, j, b)
                            col = ka * nb + pos_b[mb ^ (1 << j) ^ (1 << b)]
                            emit(row, col, s1 * s2 * eri[i, a, j, b])

    upper = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    full = upper + upper.T - sp.diags(upper.diagonal())
    if dim <= dense_cutoff:
        return float(np.linalg.eigvalsh(full.toarray())[0])
    val = spla.eigsh(full, k=1, which="SA", maxiter=5000)[0][0]
    return float(val)


def freeze_core(h, eri, e_core, frozen: list[int], active: list[int]):
    """Fold doubly-occupied frozen orbitals into effective integrals."""
    e = e_core
    for i in frozen:
        e += 2.0 * h[i, i]
        for j in frozen:
            e += 2.0 * eri[i, i, j, j] - eri[i, j, j, i]
    n_act = len(active)
    h_eff = np.zeros((n_act, n_act))
    for p_idx, p in enumerate(active):
        for q_idx, q in enumerate(active):
            val = h[p, q]
            for i in frozen:
                val += 2.0 * eri[p, q, i, i] - eri[p, i, i, q]
            h_eff[p_idx, q_idx] = val
    eri_act = eri[np.ix_(active, active, active, active)]
    return h_eff, eri_act, e
