"""Fermionic operators, Jordan-Wigner mapping, Pauli-string algebra, and sparse realization.

Conventions
-----------
* Spin orbitals are interleaved: spatial orbital p gives alpha = qubit 2p,
  beta = qubit 2p+1.
* A Pauli string is keyed by a packed pair of bitmasks (x, z): qubit q carries
  X if only bit q of x is set, Z if only z, Y if both. The stored coefficient
  multiplies the true Pauli string, i.e. the operator i^{|x&z|} X^x Z^z.
* Basis state index b has bit k equal to the occupation of qubit k
  (spin orbital k).
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from adaptforge.io_integrals import IntegralSet

COEF_EPS = 1e-12

Statevector = np.ndarray
PauliKey = tuple[int, int]


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _mul_keys(k1: PauliKey, k2: PauliKey) -> tuple[PauliKey, complex]:
    """Product of two Pauli strings: new key and accumulated phase."""
    x1, z1 = k1
    x2, z2 = k2
    x3, z3 = x1 ^ x2, z1 ^ z2
    k = (_popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x3 & z3)
         + 2 * _popcount(z1 & x2)) % 4
    return (x3, z3), (1j) ** k


def pauli_letters(key: PauliKey) -> list[tuple[int, str]]:
    """Non-identity letters of a Pauli string as (qubit, letter), ascending."""
    x, z = key
    out = []
    q = 0
    support = x | z
    while support >> q:
        xb, zb = (x >> q) & 1, (z >> q) & 1
        if xb or zb:
            out.append((q, "Y" if xb and zb else ("X" if xb else "Z")))
        q += 1
    return out


def pauli_label(key: PauliKey) -> str:
    letters = pauli_letters(key)
    return " ".join(f"{p}{q}" for q, p in letters) if letters else "I"


class QubitOperator:
    """Weighted sum of Pauli strings with packed-bitmask keys."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[PauliKey, complex] | None = None):
        self.terms: dict[PauliKey, complex] = dict(terms) if terms else {}

    @classmethod
    def identity(cls, coef: complex = 1.0) -> "QubitOperator":
        return cls({(0, 0): coef})

    @classmethod
    def from_letters(cls, letters, coef: complex = 1.0) -> "QubitOperator":
        x = z = 0
        for qubit, letter in letters:
            if letter in ("X", "Y"):
                x |= 1 << qubit
            if letter in ("Z", "Y"):
                z |= 1 << qubit
        return cls({(x, z): coef})

    def copy(self) -> "QubitOperator":
        return QubitOperator(self.terms)

    def __add__(self, other: "QubitOperator") -> "QubitOperator":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0.0) + c
        return QubitOperator(out)

    def __sub__(self, other: "QubitOperator") -> "QubitOperator":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0.0) - c
        return QubitOperator(out)

    def __mul__(self, other):
        if isinstance(other, QubitOperator):
            out: dict[PauliKey, complex] = {}
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    k3, phase = _mul_keys(k1, k2)
                    out[k3] = out.get(k3, 0.0) + c1 * c2 * phase
            return QubitOperator(out)
        return QubitOperator({k: c * other for k, c in self.terms.items()})

    def __rmul__(self, scalar) -> "QubitOperator":
        return QubitOperator({k: c * scalar for k, c in self.terms.items()})

    def dagger(self) -> "QubitOperator":
        return QubitOperator({k: np.conj(c) for k, c in self.terms.items()})

    def simplify(self, eps: float = COEF_EPS) -> "QubitOperator":
        self.terms = {k: c for k, c in self.terms.items() if abs(c) > eps}
        return self

    def is_hermitian(self, eps: float = 1e-10) -> bool:
        return all(abs(c.imag if isinstance(c, complex) else 0.0) < eps
                   for c in self.terms.values())

    def is_anti_hermitian(self, eps: float = 1e-10) -> bool:
        return all(abs(np.real(c)) < eps for c in self.terms.values())

    def n_qubits(self) -> int:
        support = 0
        for x, z in self.terms:
            support |= x | z
        return support.bit_length()

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        parts = [f"({c:+.6g}) [{pauli_label(k)}]" for k, c in sorted(self.terms.items())]
        return " + ".join(parts) if parts else "0"


class FermionOperator:
    """Sum of products of creation/annihilation operators on spin orbitals.

    A factor is (spin_orbital_index, action) with action 1 = creation,
    0 = annihilation.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple, complex] | None = None):
        self.terms: dict[tuple, complex] = dict(terms) if terms else {}

    @classmethod
    def from_term(cls, factors, coef: complex = 1.0) -> "FermionOperator":
        return cls({tuple(factors): coef})

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, 0.0) + c
        return FermionOperator(out)

    def __sub__(self, other: "FermionOperator") -> "FermionOperator":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, 0.0) - c
        return FermionOperator(out)

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            out: dict[tuple, complex] = {}
            for t1, c1 in self.terms.items():
                for t2, c2 in other.terms.items():
                    t3 = t1 + t2
                    out[t3] = out.get(t3, 0.0) + c1 * c2
            return FermionOperator(out)
        return FermionOperator({t: c * other for t, c in self.terms.items()})

    def __rmul__(self, scalar) -> "FermionOperator":
        return FermionOperator({t: c * scalar for t, c in self.terms.items()})

    def dagger(self) -> "FermionOperator":
        out = {}
        for t, c in self.terms.items():
            rev = tuple((idx, 1 - act) for idx, act in reversed(t))
            out[rev] = out.get(rev, 0.0) + np.conj(c)
        return FermionOperator(out)

    def normal_ordered(self, eps: float = COEF_EPS) -> "FermionOperator":
        """Unique canonical form: creations (descending) before annihilations (descending)."""
        result: dict[tuple, complex] = {}
        stack = [(t, c) for t, c in self.terms.items()]
        while stack:
            term, coef = stack.pop()
            if abs(coef) < eps:
                continue
            swapped = False
            for i in range(len(term) - 1):
                (p, ap), (q, aq) = term[i], term[i + 1]
                if ap == 0 and aq == 1:
                    # a_p a_q^+ = delta_pq - a_q^+ a_p
                    rest = term[:i] + term[i + 2:]
                    if p == q:
                        stack.append((rest, coef))
                    stack.append((term[:i] + ((q, 1), (p, 0)) + term[i + 2:], -coef))
                    swapped = True
                    break
                if ap == aq and p < q:
                    stack.append((term[:i] + ((q, aq), (p, ap)) + term[i + 2:], -coef))
                    swapped = True
                    break
                if ap == aq and p == q:
                    swapped = True  # a_p a_p = 0
                    break
            if not swapped:
                result[term] = result.get(term, 0.0) + coef
        return FermionOperator({t: c for t, c in result.items() if abs(c) > eps})

    def coefficient_norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        def fmt(t):
            return " ".join(f"{i}^" if a else f"{i}" for i, a in t) or "1"
        return " + ".join(f"({c:+.6g}) [{fmt(t)}]" for t, c in sorted(self.terms.items())) or "0"


def alpha_orbital(p: int) -> int:
    return 2 * p


def beta_orbital(p: int) -> int:
    return 2 * p + 1


@lru_cache(maxsize=None)
def _jw_ladder(index: int, creation: bool) -> QubitOperator:
    bit = 1 << index
    z_below = bit - 1
    sign = -0.5j if creation else 0.5j
    return QubitOperator({(bit, z_below): 0.5, (bit, z_below | bit): sign})


def jordan_wigner(f: FermionOperator) -> QubitOperator:
    """Map a fermionic operator to qubit space; preserves the *-algebra."""
    total = QubitOperator()
    for term, coef in f.terms.items():
        op = QubitOperator.identity(coef)
        for index, action in term:
            op = op * _jw_ladder(index, bool(action))
        total = total + op
    return total.simplify()


def build_hamiltonian(ints: IntegralSet) -> QubitOperator:
    """Second-quantized molecular Hamiltonian, spin-blocked and JW-mapped."""
    n_so = 2 * ints.n_orb
    h = ints.h_core
    eri = ints.eri

    def spatial(s: int) -> tuple[int, int]:
        return s // 2, s % 2

    total = QubitOperator.identity(ints.e_core)
    for pp in range(n_so):
        p, sp_ = spatial(pp)
        for qq in range(n_so):
            q, sq = spatial(qq)
            if sp_ != sq or abs(h[p, q]) < 1e-14:
                continue
            total = total + jordan_wigner(FermionOperator.from_term(((pp, 1), (qq, 0)), h[p, q]))

    def phys(p_so, q_so, r_so, s_so) -> float:
        # <PQ|RS> = (pr|qs) with spin conservation P~R, Q~S
        p, sp1 = spatial(p_so)
        q, sq1 = spatial(q_so)
        r, sr1 = spatial(r_so)
        s, ss1 = spatial(s_so)
        if sp1 != sr1 or sq1 != ss1:
            return 0.0
        return eri[p, r, q, s]

    pairs = list(combinations(range(n_so), 2))
    for (pp, qq) in pairs:
        for (rr, ss) in pairs:
            w = phys(pp, qq, rr, ss) - phys(pp, qq, ss, rr)
            if abs(w) < 1e-14:
                continue
            term = FermionOperator.from_term(((pp, 1), (qq, 1), (ss, 0), (rr, 0)), w)
            total = total + jordan_wigner(term)
    return total.simplify()


@dataclass
class SectorBasis:
    """Fixed particle-number (per spin) slice of the 2^n computational basis."""

    n_qubits: int
    n_alpha: int
    n_beta: int
    states: np.ndarray  # int64, ascending full-space indices
    position: np.ndarray  # int64 full index -> sector position, -1 outside

    @property
    def dim(self) -> int:
        return len(self.states)

    def compress(self, full: Statevector) -> np.ndarray:
        return np.asarray(full)[self.states]

    def expand(self, coords: np.ndarray) -> Statevector:
        full = np.zeros(1 << self.n_qubits, dtype=complex)
        full[self.states] = coords
        return full

    def index_of(self, basis_state: int) -> int:
        pos = int(self.position[basis_state])
        if pos < 0:
            raise ValueError("basis state outside the sector")
        return pos


def sector_basis(n_qubits: int, n_alpha: int, n_beta: int) -> SectorBasis:
    """All basis states with n_alpha set even qubits and n_beta set odd qubits."""
    n_orb = n_qubits // 2
    alpha_masks = [sum(1 << (2 * p) for p in occ) for occ in combinations(range(n_orb), n_alpha)]
    beta_masks = [sum(1 << (2 * p + 1) for p in occ) for occ in combinations(range(n_orb), n_beta)]
    states = np.sort(np.array([a | b for a in alpha_masks for b in beta_masks], dtype=np.int64))
    position = np.full(1 << n_qubits, -1, dtype=np.int64)
    position[states] = np.arange(len(states), dtype=np.int64)
    return SectorBasis(n_qubits, n_alpha, n_beta, states, position)


def _parity_signs(values: np.ndarray) -> np.ndarray:
    """(-1)**popcount for an int64 array."""
    counts = np.bitwise_count(values.astype(np.uint64))
    return 1.0 - 2.0 * (counts.astype(np.float64) % 2.0)


def _realize(op: QubitOperator, states: np.ndarray, position: np.ndarray | None,
             dim_out: int) -> sp.csr_matrix:
    """Matrix of `op` restricted to `states` (full space when position is None)."""
    by_x: dict[int, list[tuple[int, complex]]] = {}
    for (x, z), c in op.terms.items():
        by_x.setdefault(x, []).append((z, c * (1j) ** (_popcount(x & z) % 4)))

    rows_acc, cols_acc, vals_acc = [], [], []
    cols = np.arange(len(states), dtype=np.int64)
    for x, zs in by_x.items():
        values = np.zeros(len(states), dtype=complex)
        for z, c in zs:
            values += c * _parity_signs(states & z)
        targets = states ^ x
        if position is None:
            rows = targets
            keep = np.abs(values) > 1e-14
        else:
            rows = position[targets]
            keep = (rows >= 0) & (np.abs(values) > 1e-14)
        rows_acc.append(rows[keep])
        cols_acc.append(cols[keep])
        vals_acc.append(values[keep])

    if not rows_acc:
        return sp.csr_matrix((dim_out, len(states)), dtype=complex)
    rows = np.concatenate(rows_acc)
    cols = np.concatenate(cols_acc)
    vals = np.concatenate(vals_acc)
    out = sp.coo_matrix((vals, (rows, cols)), shape=(dim_out, len(states))).tocsr()
    out.sum_duplicates()
    return out


def to_sparse(q: QubitOperator, n_qubits: int) -> sp.csr_matrix:
    """Full 2^n sparse matrix. Intended for small registers; use sector matrices at scale."""
    if q.n_qubits() > n_qubits:
        raise ValueError(f"operator touches qubit {q.n_qubits() - 1} >= register size {n_qubits}")
    states = np.arange(1 << n_qubits, dtype=np.int64)
    return _realize(q, states, None, 1 << n_qubits)


def to_sector_matrix(q: QubitOperator, sector: SectorBasis) -> sp.csr_matrix:
    """Matrix of the sector projection P q P in the sector's own coordinates."""
    if q.n_qubits() > sector.n_qubits:
        raise ValueError("operator support exceeds the sector register")
    return _realize(q, sector.states, sector.position, sector.dim)


def determinant_state(occupied, n_qubits: int) -> Statevector:
    """Occupation-number basis state with the listed spin orbitals filled."""
    index = 0
    for q in occupied:
        if q < 0 or q >= n_qubits:
            raise ValueError(f"orbital {q} outside register of {n_qubits}")
        index |= 1 << q
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def _norm_estimate(matrix: sp.spmatrix) -> float:
    a = abs(matrix)
    one = a.sum(axis=0).max()
    inf = a.sum(axis=1).max()
    return float(np.sqrt(float(one) * float(inf))) if matrix.nnz else 0.0


def apply_exponential(generator: sp.spmatrix, theta: float, psi: Statevector,
                      check: bool = True, tol: float = 1e-12) -> Statevector:
    """exp(theta * G) |psi> by scaled Taylor-series action; deterministic."""
    if check:
        residual = abs(generator + generator.conj().T)
        if residual.nnz and residual.max() > 1e-10:
            raise ValueError("generator is not anti-Hermitian")
    if theta == 0.0:
        return psi.copy()
    steps = max(1, int(np.ceil(abs(theta) * _norm_estimate(generator))))
    dt = theta / steps
    out = np.asarray(psi, dtype=complex)
    for _ in range(steps):
        term = out
        acc = out.copy()
        for k in range(1, 120):
            term = generator.dot(term) * (dt / k)
            acc = acc + term
            if np.linalg.norm(term) < tol:
                break
        else:
            raise RuntimeError("Taylor series for the exponential failed to converge")
        out = acc
    return out


def expectation(op: sp.spmatrix, psi: Statevector) -> float:
    """Real expectation value; large imaginary residue signals a non-Hermitian operator."""
    value = np.vdot(psi, op.dot(psi))
    if abs(value.imag) >= 1e-10:
        raise ValueError(f"expectation has imaginary residual {value.imag:.3e}")
    return float(value.real)


@lru_cache(maxsize=None)
def number_operator(n_qubits: int) -> QubitOperator:
    f = FermionOperator()
    for q in range(n_qubits):
        f = f + FermionOperator.from_term(((q, 1), (q, 0)))
    return jordan_wigner(f)


@lru_cache(maxsize=None)
def s_squared_operator(n_orb: int) -> QubitOperator:
    """Total-spin S^2 on 2*n_orb interleaved spin orbitals: S-S+ + Sz(Sz+1)."""
    s_plus = FermionOperator()
    s_z = FermionOperator()
    for p in range(n_orb):
        a, b = alpha_orbital(p), beta_orbital(p)
        s_plus = s_plus + FermionOperator.from_term(((a, 1), (b, 0)))
        s_z = s_z + FermionOperator.from_term(((a, 1), (a, 0)), 0.5)
        s_z = s_z - FermionOperator.from_term(((b, 1), (b, 0)), 0.5)
    s_minus = s_plus.dagger()
    total = s_minus * s_plus + s_z * s_z + s_z
    return jordan_wigner(total.normal_ordered())
