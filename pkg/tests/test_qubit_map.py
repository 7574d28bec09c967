import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from adaptforge.io_integrals import IntegralSet, load_fixture, load_sidecar
from adaptforge.qubit_map import (
    FermionOperator,
    QubitOperator,
    apply_exponential,
    build_hamiltonian,
    determinant_state,
    expectation,
    jordan_wigner,
    number_operator,
    sector_basis,
    to_sector_matrix,
    to_sparse,
)
from conftest import dense_ladder, toy_two_orbital


def test_number_operator_identity():
    q = jordan_wigner(FermionOperator.from_term(((0, 1), (0, 0))))
    assert q.terms[(0, 0)] == pytest.approx(0.5)
    assert q.terms[(0, 1)] == pytest.approx(-0.5)
    assert len(q) == 2


def test_hopping_term():
    f = FermionOperator.from_term(((1, 1), (0, 0))) + FermionOperator.from_term(((0, 1), (1, 0)))
    q = jordan_wigner(f)
    m = to_sparse(q, 2).toarray()
    x0x1 = to_sparse(QubitOperator.from_letters([(0, "X"), (1, "X")]), 2).toarray()
    y0y1 = to_sparse(QubitOperator.from_letters([(0, "Y"), (1, "Y")]), 2).toarray()
    np.testing.assert_allclose(m, 0.5 * (x0x1 + y0y1), atol=1e-12)


def test_car_algebra_against_dense_oracle():
    n = 4
    for p in range(n):
        for q in range(n):
            ap = dense_ladder(p, n, False)
            aq_dag = dense_ladder(q, n, True)
            anti = ap @ aq_dag + aq_dag @ ap
            expected = np.eye(2**n) if p == q else np.zeros((2**n, 2**n))
            np.testing.assert_allclose(anti, expected, atol=1e-12)
            ours = to_sparse(jordan_wigner(FermionOperator.from_term(((p, 0),))), n).toarray()
            np.testing.assert_allclose(ours, ap, atol=1e-12)


def test_jw_is_algebra_homomorphism():
    rng = np.random.default_rng(7)
    n = 4
    for _ in range(20):
        def random_op():
            f = FermionOperator()
            for _ in range(rng.integers(1, 4)):
                length = rng.integers(1, 4)
                factors = tuple(
                    (int(rng.integers(0, n)), int(rng.integers(0, 2))) for _ in range(length)
                )
                f = f + FermionOperator.from_term(factors, complex(rng.normal(), rng.normal()))
            return f

        a, b = random_op(), random_op()
        lhs = to_sparse(jordan_wigner(a * b), n).toarray()
        rhs = (to_sparse(jordan_wigner(a), n) @ to_sparse(jordan_wigner(b), n)).toarray()
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_normal_ordering_canonical_equality():
    # a_0 a_1^+ and delta - a_1^+ a_0 are the same operator
    f1 = FermionOperator.from_term(((0, 0), (1, 1)))
    f2 = FermionOperator.from_term(((1, 1), (0, 0)), -1.0)
    assert f1.normal_ordered().terms == f2.normal_ordered().terms
    f3 = FermionOperator.from_term(((0, 0), (0, 1)))
    expected = FermionOperator({(): 1.0}) - FermionOperator.from_term(((0, 1), (0, 0)))
    assert f3.normal_ordered().terms == expected.normal_ordered().terms


def test_single_site_hamiltonian_closed_form():
    h = np.array([[-1.0]])
    eri = np.full((1, 1, 1, 1), 0.5)
    ints = IntegralSet(1, 2, 0, h, eri, 0.0)
    hq = build_hamiltonian(ints)
    m = to_sparse(hq, 2).toarray()
    vals = np.linalg.eigvalsh(m)
    assert vals[0] == pytest.approx(-1.5, abs=1e-12)


def test_hamiltonian_ground_state_matches_sidecar_fci():
    ints = load_fixture("h4_linear_1.5")
    side = load_sidecar("h4_linear_1.5")
    sec = sector_basis(16, 2, 2)
    hm = to_sector_matrix(build_hamiltonian(ints), sec)
    from adaptforge.oracle import fci_ground_state_sector

    energy, _ = fci_ground_state_sector(hm)
    assert energy == pytest.approx(side["fci_energy"], abs=1e-9)


def test_hf_expectation_equals_rhf_energy():
    from adaptforge.scf import freeze_and_select, run_rhf

    cases = [
        ("h4_linear_1.5", [], []),
        ("h4_square_3", [], []),
        ("h2o_1", [0], [11, 12]),
    ]
    for label, frozen, deleted in cases:
        ints = freeze_and_select(load_fixture(label), frozen, deleted)
        sol = run_rhf(ints)
        n_q = 2 * ints.n_orb
        sec = sector_basis(n_q, ints.n_elec // 2, ints.n_elec // 2)
        hm = to_sector_matrix(build_hamiltonian(ints), sec)
        ref = np.zeros(sec.dim, dtype=complex)
        ref[sec.index_of((1 << ints.n_elec) - 1)] = 1.0
        assert expectation(hm, ref) == pytest.approx(sol.energy, abs=1e-10), label


def test_to_sparse_small_cases():
    z0 = to_sparse(QubitOperator.from_letters([(0, "Z")]), 1).toarray()
    np.testing.assert_array_equal(z0, np.diag([1.0, -1.0]))
    xx = to_sparse(QubitOperator.from_letters([(0, "X"), (1, "X")]), 2).toarray()
    np.testing.assert_array_equal(xx, np.fliplr(np.eye(4)))


def test_to_sparse_matches_dense_kron_oracle():
    rng = np.random.default_rng(3)
    paulis = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]], dtype=complex),
              "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1.0, -1.0]).astype(complex)}
    n = 4
    op = QubitOperator()
    dense = np.zeros((2**n, 2**n), dtype=complex)
    for _ in range(6):
        letters = [(q, rng.choice(["I", "X", "Y", "Z"])) for q in range(n)]
        coef = complex(rng.normal(), rng.normal())
        op = op + QubitOperator.from_letters([(q, p) for q, p in letters if p != "I"], coef)
        m = np.array([[1.0]])
        for q in range(n):
            m = np.kron(paulis[letters[q][1]], m)
        dense += coef * m
    np.testing.assert_allclose(to_sparse(op, n).toarray(), dense, atol=1e-12)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    np.testing.assert_allclose(to_sparse(op, n) @ v, dense @ v, atol=1e-12)


def test_to_sparse_register_too_small():
    with pytest.raises(ValueError, match="register"):
        to_sparse(QubitOperator.from_letters([(3, "Z")]), 2)


def test_sector_matrix_is_projection():
    rng = np.random.default_rng(11)
    n = 6
    op = QubitOperator()
    for _ in range(5):
        letters = [(int(q), rng.choice(["X", "Y", "Z"])) for q in rng.choice(n, size=2, replace=False)]
        op = op + QubitOperator.from_letters(letters, complex(rng.normal(), rng.normal()))
    sec = sector_basis(n, 2, 1)
    full = to_sparse(op, n).toarray()
    proj = full[np.ix_(sec.states, sec.states)]
    np.testing.assert_allclose(to_sector_matrix(op, sec).toarray(), proj, atol=1e-12)


def test_apply_exponential_theta_zero_identity():
    rng = np.random.default_rng(5)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    gen = sp.csr_matrix((16, 16), dtype=complex)
    out = apply_exponential(gen, 0.0, psi)
    np.testing.assert_array_equal(out, psi)


def test_apply_exponential_against_dense_expm():
    from adaptforge.pool import build_pool

    pool = build_pool(2, 1)
    gen = to_sparse(pool[0].qubit_form, 4)
    psi = determinant_state([0, 1], 4)
    theta = 0.3
    ours = apply_exponential(gen, theta, psi)
    dense = scipy.linalg.expm(theta * gen.toarray()) @ psi
    np.testing.assert_allclose(ours, dense, atol=1e-12)
    # sin/cos structure on the excitation support
    g2 = (gen @ gen).toarray()
    expected = psi + np.sin(theta) * gen.toarray() @ psi + (1 - np.cos(theta)) * g2 @ psi
    np.testing.assert_allclose(ours, expected, atol=1e-10)


def test_apply_exponential_inverse_pair():
    rng = np.random.default_rng(9)
    from adaptforge.pool import build_pool

    gen = to_sparse(build_pool(2, 1)[1].qubit_form, 4)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    for theta in rng.normal(size=4):
        back = apply_exponential(gen, -theta, apply_exponential(gen, theta, psi))
        assert np.linalg.norm(back - psi) < 1e-10


def test_apply_exponential_rejects_hermitian():
    gen = sp.csr_matrix(np.diag([1.0, -1.0]).astype(complex))
    with pytest.raises(ValueError, match="anti-Hermitian"):
        apply_exponential(gen, 0.1, np.array([1.0, 0.0], dtype=complex))


def test_expectation_basics():
    ident = to_sparse(QubitOperator.identity(), 1)
    psi1 = determinant_state([0], 1)
    assert expectation(ident, psi1) == pytest.approx(1.0)
    z0 = to_sparse(QubitOperator.from_letters([(0, "Z")]), 1)
    assert expectation(z0, psi1) == pytest.approx(-1.0)


def test_expectation_rejects_non_hermitian():
    m = sp.csr_matrix(np.array([[0.0, 1.0j], [0.0, 0.0]], dtype=complex))
    with pytest.raises(ValueError, match="imaginary"):
        expectation(m, np.array([1.0, 1.0], dtype=complex) / np.sqrt(2))


def test_particle_number_commutes_with_hamiltonian():
    ints = toy_two_orbital()
    h = to_sparse(build_hamiltonian(ints), 4)
    n_op = to_sparse(number_operator(4), 4)
    comm = (h @ n_op - n_op @ h).toarray()
    assert np.max(np.abs(comm)) < 1e-10
