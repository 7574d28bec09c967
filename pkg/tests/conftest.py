import numpy as np
import pytest

from adaptforge.io_integrals import IntegralSet, load_fixture, load_sidecar


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks")


@pytest.fixture(scope="session")
def h4_linear_15():
    return load_fixture("h4_linear_1.5")


@pytest.fixture(scope="session")
def h4_linear_30():
    return load_fixture("h4_linear_3")


@pytest.fixture(scope="session")
def h2o_10():
    return load_fixture("h2o_1")


@pytest.fixture(scope="session")
def sidecars():
    from adaptforge.io_integrals import FIXTURE_LABELS

    return {label: load_sidecar(label) for label in FIXTURE_LABELS}


def toy_two_orbital() -> IntegralSet:
    """Tiny closed-shell system with a genuine two-electron interaction."""
    h = np.array([[-1.25, 0.05], [0.05, -0.45]])
    eri = np.zeros((2, 2, 2, 2))
    vals = {
        (0, 0, 0, 0): 0.65,
        (1, 1, 1, 1): 0.62,
        (0, 0, 1, 1): 0.48,
        (0, 1, 0, 1): 0.18,
        (0, 1, 1, 1): 0.02,
        (0, 0, 0, 1): 0.03,
    }
    for (i, j, k, l), v in vals.items():
        for p, q in ((i, j), (j, i)):
            for r, s in ((k, l), (l, k)):
                eri[p, q, r, s] = v
                eri[r, s, p, q] = v
    return IntegralSet(2, 2, 0, h, eri, 0.31)


@pytest.fixture()
def toy_ints() -> IntegralSet:
    return toy_two_orbital()


def dense_ladder(p: int, n_qubits: int, creation: bool) -> np.ndarray:
    """Independent Jordan-Wigner oracle: explicit Kronecker products.

    Qubit k is bit k of the basis index (least significant innermost), matching
    the package's statevector convention.
    """
    z = np.diag([1.0, -1.0])
    a = np.array([[0.0, 1.0], [0.0, 0.0]])  # annihilation on one mode
    out = np.array([[1.0]])
    for k in range(n_qubits):
        if k < p:
            factor = z
        elif k == p:
            factor = a.T if creation else a
        else:
            factor = np.eye(2)
        out = np.kron(factor, out)
    return out
