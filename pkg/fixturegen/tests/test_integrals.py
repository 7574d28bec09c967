import math

import numpy as np
import pytest
from scipy.special import erf

from fixturegen.basis import build_basis, primitive_norm
from fixturegen.integrals import (
    _prim_eri,
    _prim_kinetic,
    _prim_nuclear,
    _prim_overlap,
    boys,
    contracted_overlap,
    integral_tensors,
)

S = (0, 0, 0)
PX = (1, 0, 0)


def boys0(t: float) -> float:
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * math.sqrt(math.pi / t) * erf(math.sqrt(t))


def test_boys_closed_form_f0():
    for t in (0.0, 1e-8, 0.3, 2.7, 40.0):
        assert boys(0, t)[0] == pytest.approx(boys0(t), abs=1e-13)


def test_boys_recursion_consistency():
    # F_{n-1} = (2 t F_n + exp(-t)) / (2n - 1) must hold internally
    t = 1.37
    f = boys(4, t)
    for n in range(4, 0, -1):
        assert f[n - 1] == pytest.approx((2 * t * f[n] + math.exp(-t)) / (2 * n - 1), rel=1e-12)


# --- independent s-orbital closed forms (unnormalized primitives) ---

def s_overlap(a, ra, b, rb):
    p = a + b
    q2 = float(np.dot(ra - rb, ra - rb))
    return (math.pi / p) ** 1.5 * math.exp(-a * b / p * q2)


def s_kinetic(a, ra, b, rb):
    p = a + b
    mu = a * b / p
    q2 = float(np.dot(ra - rb, ra - rb))
    return mu * (3.0 - 2.0 * mu * q2) * s_overlap(a, ra, b, rb)


def s_nuclear(a, ra, b, rb, rc):
    p = a + b
    pp = (a * ra + b * rb) / p
    q2 = float(np.dot(ra - rb, ra - rb))
    t = p * float(np.dot(pp - rc, pp - rc))
    return -2.0 * math.pi / p * math.exp(-a * b / p * q2) * boys0(t)


def s_eri(a, ra, b, rb, c, rc, d, rd):
    p, q = a + b, c + d
    pp = (a * ra + b * rb) / p
    qq = (c * rc + d * rd) / q
    t = p * q / (p + q) * float(np.dot(pp - qq, pp - qq))
    k1 = math.exp(-a * b / p * float(np.dot(ra - rb, ra - rb)))
    k2 = math.exp(-c * d / q * float(np.dot(rc - rd, rc - rd)))
    return 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q)) * k1 * k2 * boys0(t)


RA = np.array([0.1, -0.2, 0.3])
RB = np.array([0.7, 0.5, -0.4])
RC = np.array([-0.3, 0.8, 0.1])
RD = np.array([0.0, 0.0, 1.1])


def test_s_integrals_match_textbook_formulas():
    a, b = 1.3, 0.41
    assert _prim_overlap(a, S, RA, b, S, RB) == pytest.approx(s_overlap(a, RA, b, RB), rel=1e-12)
    assert _prim_kinetic(a, S, RA, b, S, RB) == pytest.approx(s_kinetic(a, RA, b, RB), rel=1e-12)
    assert _prim_nuclear(a, S, RA, b, S, RB, RC) == pytest.approx(
        -s_nuclear(a, RA, b, RB, RC), rel=1e-11
    )
    got = _prim_eri(1.3, S, RA, 0.41, S, RB, 0.9, S, RC, 2.2, S, RD)
    assert got == pytest.approx(s_eri(1.3, RA, 0.41, RB, 0.9, RC, 2.2, RD), rel=1e-11)


def test_p_function_via_derivative_of_s():
    """x-type Gaussians are center derivatives of s: p_x = (1/2a) d/dAx s."""
    a, b = 0.9, 0.6
    d = 1e-5

    def shifted(delta):
        ra = RA + np.array([delta, 0.0, 0.0])
        return s_overlap(a, ra, b, RB)

    fd = (shifted(d) - shifted(-d)) / (2 * d) / (2 * a)
    assert _prim_overlap(a, PX, RA, b, S, RB) == pytest.approx(fd, rel=1e-8)

    def shifted_eri(delta):
        ra = RA + np.array([delta, 0.0, 0.0])
        return s_eri(a, ra, b, RB, 1.1, RC, 0.5, RD)

    fd_eri = (shifted_eri(d) - shifted_eri(-d)) / (2 * d) / (2 * a)
    got = _prim_eri(a, PX, RA, b, S, RB, 1.1, S, RC, 0.5, S, RD)
    assert got == pytest.approx(fd_eri, rel=1e-7)


def test_overlap_by_grid_quadrature():
    a, b = 0.8, 1.7
    grid = np.linspace(-6.0, 6.0, 161)
    dx = grid[1] - grid[0]
    xs, ys, zs = np.meshgrid(grid, grid, grid, indexing="ij")

    def px_gauss(alpha, center):
        r2 = (xs - center[0]) ** 2 + (ys - center[1]) ** 2 + (zs - center[2]) ** 2
        return (xs - center[0]) * np.exp(-alpha * r2)

    ra, rb = np.array([0.2, 0.0, -0.1]), np.array([-0.4, 0.3, 0.5])
    num = float(np.sum(px_gauss(a, ra) * px_gauss(b, rb))) * dx**3
    assert _prim_overlap(a, PX, ra, b, PX, rb) == pytest.approx(num, rel=1e-5)


def test_primitive_norms():
    # <g|g> = 1 for normalized primitives
    for lmn in (S, PX):
        alpha = 0.73
        n = primitive_norm(alpha, lmn)
        assert n * n * _prim_overlap(alpha, lmn, RA, alpha, lmn, RA) == pytest.approx(1.0, rel=1e-12)


def test_h_atom_321g_energy():
    fns = build_basis([("H", np.zeros(3))])
    s, t, v, eri, e_nuc = integral_tensors(fns, [("H", np.zeros(3), 1)])
    import scipy.linalg as la

    w = la.eigh(t + v, s, eigvals_only=True)
    assert w[0] == pytest.approx(-0.496199, abs=2e-5)  # literature 3-21G H atom


def test_contracted_functions_normalized():
    fns = build_basis([("O", np.zeros(3))])
    for g in fns:
        assert contracted_overlap(g, g) == pytest.approx(1.0, rel=1e-12)
    assert len(fns) == 9  # 3s + 2p shells -> 3 + 6 functions
