"""McMurchie-Davidson molecular integrals over contracted Cartesian Gaussians.

Covers s and p shells (all 3-21G needs for H/O). Conventions: chemist ERI
(pq|rs), all quantities in atomic units.
"""

import numpy as np
from scipy.special import gammainc, gammaln

from fixturegen.basis import ContractedGaussian


def boys(n_max: int, t: float) -> np.ndarray:
    """F_0..F_n_max via downward recursion from the incomplete gamma form."""
    out = np.empty(n_max + 1)
    if t < 1e-13:
        for n in range(n_max + 1):
            out[n] = 1.0 / (2 * n + 1) - t / (2 * n + 3)
        return out
    a = n_max + 0.5
    out[n_max] = 0.5 * np.exp(gammaln(a)) * gammainc(a, t) / t**a
    et = np.exp(-t)
    for n in range(n_max, 0, -1):
        out[n - 1] = (2.0 * t * out[n] + et) / (2 * n - 1)
    return out


def hermite_expansion(la: int, lb: int, q_ab: float, a: float, b: float) -> np.ndarray:
    """E_t^{ij} coefficients for one Cartesian direction; shape [la+1, lb+1, la+lb+2]."""
    p = a + b
    e = np.zeros((la + 1, lb + 1, la + lb + 2))
    e[0, 0, 0] = np.exp(-a * b / p * q_ab * q_ab)
    x_pa = -(b / p) * q_ab
    x_pb = (a / p) * q_ab
    for i in range(1, la + 1):
        for t in range(i + 1):
            e[i, 0, t] = (
                (e[i - 1, 0, t - 1] / (2 * p) if t > 0 else 0.0)
                + x_pa * e[i - 1, 0, t]
                + (t + 1) * e[i - 1, 0, t + 1]
            )
    for j in range(1, lb + 1):
        for i in range(la + 1):
            for t in range(i + j + 1):
                e[i, j, t] = (
                    (e[i, j - 1, t - 1] / (2 * p) if t > 0 else 0.0)
                    + x_pb * e[i, j - 1, t]
                    + (t + 1) * e[i, j - 1, t + 1]
                )
    return e


def _hermite_coulomb(t_max: int, u_max: int, v_max: int, p: float, pc: np.ndarray) -> np.ndarray:
    """R^0_{tuv} table of Hermite Coulomb integrals."""
    n_tot = t_max + u_max + v_max
    f = boys(n_tot, p * float(pc @ pc))
    r = np.zeros((n_tot + 1, t_max + 1, u_max + 1, v_max + 1))
    for n in range(n_tot + 1):
        r[n, 0, 0, 0] = (-2.0 * p) ** n * f[n]
    for n in range(n_tot - 1, -1, -1):
        for t in range(t_max + 1):
            for u in range(u_max + 1):
                for v in range(v_max + 1):
                    if t == u == v == 0:
                        continue
                    if t > 0:
                        val = pc[0] * r[n + 1, t - 1, u, v]
                        if t > 1:
                            val += (t - 1) * r[n + 1, t - 2, u, v]
                    elif u > 0:
                        val = pc[1] * r[n + 1, t, u - 1, v]
                        if u > 1:
                            val += (u - 1) * r[n + 1, t, u - 2, v]
                    else:
                        val = pc[2] * r[n + 1, t, u, v - 1]
                        if v > 1:
                            val += (v - 1) * r[n + 1, t, u, v - 2]
                    r[n, t, u, v] = val
    return r[0]


def _prim_overlap(a, lmn_a, ra, b, lmn_b, rb) -> float:
    p = a + b
    s = (np.pi / p) ** 1.5
    for d in range(3):
        e = hermite_expansion(lmn_a[d], lmn_b[d], ra[d] - rb[d], a, b)
        s *= e[lmn_a[d], lmn_b[d], 0]
    return s


def _prim_kinetic(a, lmn_a, ra, b, lmn_b, rb) -> float:
    l2, m2, n2 = lmn_b

    def s_shift(d: int, shift: int) -> float:
        lmn = list(lmn_b)
        lmn[d] += shift
        if lmn[d] < 0:
            return 0.0
        return _prim_overlap(a, lmn_a, ra, b, tuple(lmn), rb)

    term = b * (2 * (l2 + m2 + n2) + 3) * _prim_overlap(a, lmn_a, ra, b, lmn_b, rb)
    term -= 2.0 * b * b * (s_shift(0, 2) + s_shift(1, 2) + s_shift(2, 2))
    term -= 0.5 * (
        l2 * (l2 - 1) * s_shift(0, -2)
        + m2 * (m2 - 1) * s_shift(1, -2)
        + n2 * (n2 - 1) * s_shift(2, -2)
    )
    return term


def _prim_nuclear(a, lmn_a, ra, b, lmn_b, rb, rc) -> float:
    p = a + b
    pxyz = (a * ra + b * rb) / p
    es = [hermite_expansion(lmn_a[d], lmn_b[d], ra[d] - rb[d], a, b) for d in range(3)]
    tm, um, vm = (lmn_a[d] + lmn_b[d] for d in range(3))
    r = _hermite_coulomb(tm, um, vm, p, pxyz - rc)
    val = 0.0
    for t in range(tm + 1):
        for u in range(um + 1):
            for v in range(vm + 1):
                val += (
                    es[0][lmn_a[0], lmn_b[0], t]
                    * es[1][lmn_a[1], lmn_b[1], u]
                    * es[2][lmn_a[2], lmn_b[2], v]
                    * r[t, u, v]
                )
    return 2.0 * np.pi / p * val


def _prim_eri(a, la, ra, b, lb, rb, c, lc, rc, d, ld, rd) -> float:
    p = a + b
    q = c + d
    omega = p * q / (p + q)
    pp = (a * ra + b * rb) / p
    qq = (c * rc + d * rd) / q
    e1 = [hermite_expansion(la[i], lb[i], ra[i] - rb[i], a, b) for i in range(3)]
    e2 = [hermite_expansion(lc[i], ld[i], rc[i] - rd[i], c, d) for i in range(3)]
    t1, u1, v1 = (la[i] + lb[i] for i in range(3))
    t2, u2, v2 = (lc[i] + ld[i] for i in range(3))
    r = _hermite_coulomb(t1 + t2, u1 + u2, v1 + v2, omega, pp - qq)
    val = 0.0
    for t in range(t1 + 1):
        for u in range(u1 + 1):
            for v in range(v1 + 1):
                e_bra = (
                    e1[0][la[0], lb[0], t] * e1[1][la[1], lb[1], u] * e1[2][la[2], lb[2], v]
                )
                if e_bra == 0.0:
                    continue
                for tt in range(t2 + 1):
                    for uu in range(u2 + 1):
                        for vv in range(v2 + 1):
                            e_ket = (
                                e2[0][lc[0], ld[0], tt]
                                * e2[1][lc[1], ld[1], uu]
                                * e2[2][lc[2], ld[2], vv]
                            )
                            if e_ket == 0.0:
                                continue
                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                            val += e_bra * e_ket * sign * r[t + tt, u + uu, v + vv]
    return 2.0 * np.pi**2.5 / (p * q * np.sqrt(p + q)) * val


def _contract2(g1: ContractedGaussian, g2: ContractedGaussian, prim_fn) -> float:
    val = 0.0
    for a, ca in zip(g1.exps, g1.coefs):
        for b, cb in zip(g2.exps, g2.coefs):
            val += ca * cb * prim_fn(a, g1.lmn, g1.center, b, g2.lmn, g2.center)
    return val


def contracted_overlap(g1: ContractedGaussian, g2: ContractedGaussian) -> float:
    return _contract2(g1, g2, _prim_overlap)


def contracted_kinetic(g1: ContractedGaussian, g2: ContractedGaussian) -> float:
    return _contract2(g1, g2, _prim_kinetic)


def contracted_nuclear(g1: ContractedGaussian, g2: ContractedGaussian, rc: np.ndarray) -> float:
    return _contract2(g1, g2, lambda a, la, ra, b, lb, rb: _prim_nuclear(a, la, ra, b, lb, rb, rc))


def contracted_eri(g1, g2, g3, g4) -> float:
    val = 0.0
    for a, c1 in zip(g1.exps, g1.coefs):
        for b, c2 in zip(g2.exps, g2.coefs):
            for c, c3 in zip(g3.exps, g3.coefs):
                for d, c4 in zip(g4.exps, g4.coefs):
                    val += c1 * c2 * c3 * c4 * _prim_eri(
                        a, g1.lmn, g1.center, b, g2.lmn, g2.center,
                        c, g3.lmn, g3.center, d, g4.lmn, g4.center,
                    )
    return val


def integral_tensors(functions, atoms_bohr):
    """S, T, V matrices and the chemist-notation ERI tensor plus nuclear repulsion."""
    n = len(functions)
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s[i, j] = s[j, i] = contracted_overlap(functions[i], functions[j])
            t[i, j] = t[j, i] = contracted_kinetic(functions[i], functions[j])
            vij = 0.0
            for sym, pos, charge in atoms_bohr:
                vij -= charge * contracted_nuclear(functions[i], functions[j], pos)
            v[i, j] = v[j, i] = vij

    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    val = contracted_eri(functions[i], functions[j], functions[k], functions[l])
                    for p, q in ((i, j), (j, i)):
                        for r, w in ((k, l), (l, k)):
                            eri[p, q, r, w] = val
                            eri[r, w, p, q] = val

    e_nuc = 0.0
    for a in range(len(atoms_bohr)):
        for b in range(a):
            za, zb = atoms_bohr[a][2], atoms_bohr[b][2]
            e_nuc += za * zb / np.linalg.norm(atoms_bohr[a][1] - atoms_bohr[b][1])
    return s, t, v, eri, e_nuc
