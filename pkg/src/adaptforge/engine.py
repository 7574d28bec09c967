"""ADAPT-VQE outer loop: screening, selection, optimization, and accounting.

Heavy linear algebra runs in the particle-number sector of the register, which
keeps the 20-qubit water runs inside desk-scale memory; statevectors cross the
public boundary in full 2^n form.
"""

from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from adaptforge.io_integrals import IntegralSet, load_fixture
from adaptforge.oracle import (
    fci_ground_state_sector,
    fidelity,
    one_rdm_sector,
    OneParticleDensity,
)
from adaptforge.pool import (
    PoolOperator,
    SubspaceMap,
    build_pool,
    embed_ansatz,
    restrict_pool,
    select_subspace,
)
from adaptforge.qubit_map import (
    SectorBasis,
    Statevector,
    apply_exponential,
    build_hamiltonian,
    expectation,
    number_operator,
    s_squared_operator,
    sector_basis,
    to_sector_matrix,
)
from adaptforge.resources import ansatz_resources
from adaptforge.scf import (
    freeze_and_select,
    natural_orbitals,
    rotate_integrals,
    run_rhf,
    run_uhf,
)

SCREEN_FLOOR = 1e-9
ENERGY_RISE_TOL = 1e-9


@dataclass
class AdaptConfig:
    fixture: str | None = None
    basis: str = "canonical"  # "canonical" | "uhf-no"
    phase_mode: str = "direct"  # "direct" | "subspace"
    n_s: int | None = None
    frozen: tuple[int, ...] = ()
    deleted: tuple[int, ...] = ()
    tol: float = 1e-4
    max_iters: int = 120
    no_selection: str = "occupancy"  # subspace criterion in the NO basis
    reoptimize_at_embedding: bool = True
    track_fidelity: bool = True
    stop_at_error: float | None = None  # halt once |E - E_FCI| drops below this

    @classmethod
    def from_dict(cls, d: dict) -> "AdaptConfig":
        d = dict(d)
        plan = d.pop("phase_plan", None)
        if plan:
            d["phase_mode"] = plan.get("mode", "direct")
            d["n_s"] = plan.get("n_s")
        d["frozen"] = tuple(d.get("frozen", ()))
        d["deleted"] = tuple(d.get("deleted", ()))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["frozen"] = list(self.frozen)
        d["deleted"] = list(self.deleted)
        d["phase_plan"] = {"mode": d.pop("phase_mode"), "n_s": d.pop("n_s")}
        return d


@dataclass
class TraceRow:
    iteration: int
    phase: str  # "subspace" | "full"
    event: str  # "operator" | "projection"
    selected_operator_id: int
    selected_operator_label: str
    max_abs_gradient: float
    energy: float
    energy_error_vs_fci: float
    cumulative_energy_evaluations: int
    cumulative_gradient_evaluations: int
    cumulative_optimizer_gradient_evaluations: int
    fidelity: float | None
    s_squared: float
    particle_number: float
    gate_total: int
    gate_cnot: int
    gate_depth: int
    n_parameters: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class AnsatzState:
    """Ordered exponentials applied to the reference; element 0 acts first."""

    elements: list[tuple[PoolOperator, float]]
    sector: SectorBasis
    reference_coords: np.ndarray
    cached_coords: np.ndarray

    @property
    def reference(self) -> Statevector:
        return self.sector.expand(self.reference_coords)

    @property
    def cached_state(self) -> Statevector:
        return self.sector.expand(self.cached_coords)

    def thetas(self) -> np.ndarray:
        return np.array([t for _, t in self.elements], dtype=float)

    def element_ids(self) -> list[int]:
        return [op.id for op, _ in self.elements]

    def recompute(self) -> None:
        self.cached_coords = _propagate(
            [op.matrix(self.sector) for op, _ in self.elements],
            self.thetas(),
            self.reference_coords,
        )

    def verify(self, tol: float = 1e-10) -> None:
        fresh = _propagate(
            [op.matrix(self.sector) for op, _ in self.elements],
            self.thetas(),
            self.reference_coords,
        )
        if np.linalg.norm(fresh - self.cached_coords) > tol:
            raise AssertionError("cached ansatz state is stale")


def _propagate(matrices, thetas, ref: np.ndarray) -> np.ndarray:
    psi = ref.copy()
    for mat, theta in zip(matrices, thetas):
        psi = apply_exponential(mat, float(theta), psi, check=False)
    norm = np.linalg.norm(psi)
    return psi / norm


def pool_gradients(h: sp.spmatrix, pool_matrices, psi: np.ndarray) -> np.ndarray:
    """<[H, A_j]> for every pool operator at the current state."""
    hpsi = h.dot(psi)
    e = np.vdot(psi, hpsi)
    if abs(e.imag) >= 1e-9:
        raise RuntimeError(f"non-real energy ({e.imag:.2e}) during screening")
    out = np.empty(len(pool_matrices))
    for j, mat in enumerate(pool_matrices):
        z = np.vdot(hpsi, mat.dot(psi))
        out[j] = 2.0 * z.real
    return out


def select_operator(gradients: np.ndarray) -> int | None:
    """Argmax of |gradient|; ties take the lowest id; None signals termination."""
    if len(gradients) == 0:
        raise ValueError("empty gradient list")
    magnitudes = np.abs(gradients)
    best = int(np.argmax(magnitudes))
    if magnitudes[best] < SCREEN_FLOOR:
        return None
    return best


def _energy_only(h, matrices, thetas, ref) -> float:
    psi = _propagate(matrices, thetas, ref)
    return float(np.vdot(psi, h.dot(psi)).real)


def _energy_and_gradient(h, matrices, thetas, ref) -> tuple[float, np.ndarray]:
    """Adjoint-style sweep: one forward propagation, one backward unwind."""
    k = len(matrices)
    psi = _propagate(matrices, thetas, ref)
    hpsi = h.dot(psi)
    energy = float(np.vdot(psi, hpsi).real)
    grads = np.zeros(k)
    lam = hpsi
    cur = psi
    for i in range(k - 1, -1, -1):
        grads[i] = 2.0 * np.vdot(lam, matrices[i].dot(cur)).real
        if i > 0:
            cur = apply_exponential(matrices[i], -float(thetas[i]), cur, check=False)
            lam = apply_exponential(matrices[i], -float(thetas[i]), lam, check=False)
    return energy, grads


@dataclass
class OptimizeOutcome:
    ansatz: AnsatzState
    energy: float
    n_energy_evaluations: int
    n_gradient_evaluations: int
    degraded: bool


def optimize(h: sp.spmatrix, ansatz: AnsatzState, tol: float,
             max_opt_iter: int = 500) -> OptimizeOutcome:
    """BFGS over all amplitudes with analytic gradients, warm-started."""
    matrices = [op.matrix(ansatz.sector) for op, _ in ansatz.elements]
    ref = ansatz.reference_coords
    if not ansatz.elements:
        energy = float(np.vdot(ref, h.dot(ref)).real)
        return OptimizeOutcome(ansatz, energy, 0, 0, False)

    counters = {"nfev": 0, "njev": 0}

    def objective(thetas):
        counters["nfev"] += 1
        counters["njev"] += 1
        return _energy_and_gradient(h, matrices, thetas, ref)

    result = scipy.optimize.minimize(
        objective, ansatz.thetas(), jac=True, method="BFGS",
        options={"gtol": tol, "xrtol": 1e-6, "maxiter": max_opt_iter},
    )
    thetas = result.x
    new_elements = [(op, float(t)) for (op, _), t in zip(ansatz.elements, thetas)]
    new_state = AnsatzState(new_elements, ansatz.sector, ref,
                            _propagate(matrices, thetas, ref))
    energy = float(np.vdot(new_state.cached_coords, h.dot(new_state.cached_coords)).real)
    degraded = not result.success
    return OptimizeOutcome(new_state, energy, counters["nfev"], counters["njev"], degraded)


@dataclass
class PhaseContext:
    name: str
    ints: IntegralSet
    sector: SectorBasis
    h_matrix: sp.spmatrix
    pool: list[PoolOperator]
    pool_matrices: list
    s2_matrix: sp.spmatrix
    n_matrix: sp.spmatrix
    e_fci: float
    fci_coords: np.ndarray
    smap: SubspaceMap | None = None


def _real_if_close(m: sp.spmatrix) -> sp.spmatrix:
    if np.iscomplexobj(m.dtype.type(0)) and m.nnz:
        if np.max(np.abs(m.data.imag)) < 1e-12:
            return m.real
    return m


def _build_phase(name: str, ints: IntegralSet, pool: list[PoolOperator],
                 smap: SubspaceMap | None = None) -> PhaseContext:
    n_occ = ints.n_elec // 2
    sector = sector_basis(2 * ints.n_orb, n_occ, n_occ)
    h_q = build_hamiltonian(ints)
    h_matrix = _real_if_close(to_sector_matrix(h_q, sector))
    pool_matrices = [op.matrix(sector) for op in pool]
    for op, mat in zip(pool, pool_matrices):
        residual = abs(mat + mat.conj().T)
        if residual.nnz and residual.max() > 1e-10:
            raise RuntimeError(f"pool operator {op.label} is not anti-Hermitian")
    s2 = to_sector_matrix(s_squared_operator(ints.n_orb), sector)
    nop = to_sector_matrix(number_operator(2 * ints.n_orb), sector)
    e_fci, fci_coords = fci_ground_state_sector(h_matrix)
    return PhaseContext(name, ints, sector, h_matrix, pool, pool_matrices,
                        s2, nop, e_fci, fci_coords, smap)


def _reference_coords(sector: SectorBasis, n_elec: int) -> np.ndarray:
    index = (1 << n_elec) - 1  # first n_elec interleaved spin orbitals
    coords = np.zeros(sector.dim, dtype=complex)
    coords[sector.index_of(index)] = 1.0
    return coords


def _check_symmetries(ctx: PhaseContext, coords: np.ndarray) -> tuple[float, float]:
    s2 = expectation(ctx.s2_matrix, coords)
    n = expectation(ctx.n_matrix, coords)
    if s2 > 1e-8:
        raise RuntimeError(f"spin contamination <S^2>={s2:.3e}")
    if abs(n - ctx.ints.n_elec) > 1e-8:
        raise RuntimeError(f"particle number drifted to {n}")
    return s2, n


def _full_space_rdm(ctx: PhaseContext, coords: np.ndarray, run_n_orb: int,
                    smap: SubspaceMap | None, n_occ_full: int) -> OneParticleDensity:
    rho_local = one_rdm_sector(coords, ctx.sector, ctx.ints.n_orb).rho
    if smap is None:
        return OneParticleDensity(rho_local)
    rho = np.zeros((run_n_orb, run_n_orb))
    for p in range(n_occ_full):
        if p not in smap.active_spatial:
            rho[p, p] = 2.0
    for a, pa in enumerate(smap.active_spatial):
        for b, pb in enumerate(smap.active_spatial):
            rho[pa, pb] = rho_local[a, b]
    return OneParticleDensity(rho)


@dataclass
class AdaptResult:
    config: AdaptConfig
    rows: list[TraceRow]
    final_energy: float
    e_fci: float
    stop_reason: str
    operator_labels: list[str]
    thetas: list[float]
    pool_size_by_phase: dict[str, int]
    degraded_steps: int = 0

    def operators_to_accuracy(self, threshold: float = 1.6e-3) -> int | None:
        """Ansatz size when the error first drops to the threshold (None if never)."""
        for row in self.rows:
            if row.energy_error_vs_fci <= threshold:
                return row.n_parameters
        return None


def prepare_integrals(config: AdaptConfig, ints: IntegralSet | None = None):
    """Active-space reduction and basis rotation; returns (run_ints, selector_source)."""
    raw = ints if ints is not None else load_fixture(config.fixture)
    active = freeze_and_select(raw, list(config.frozen), list(config.deleted))
    if config.basis == "canonical":
        sol = run_rhf(active)
        return active, sol
    if config.basis == "uhf-no":
        rhf_sol = run_rhf(active)
        uhf_sol = run_uhf(active)
        rot = natural_orbitals(uhf_sol, rhf_fock=rhf_sol.fock_alpha)
        return rotate_integrals(active, rot), rot
    raise ValueError(f"unknown basis {config.basis!r}")


def run_adapt(config: AdaptConfig, ints: IntegralSet | None = None) -> AdaptResult:
    run_ints, selector = prepare_integrals(config, ints)
    n_orb = run_ints.n_orb
    n_occ = run_ints.n_elec // 2
    full_pool = build_pool(n_orb, n_occ)

    phases: list[PhaseContext] = []
    if config.phase_mode == "subspace":
        if not config.n_s:
            raise ValueError("subspace mode requires n_s")
        smap = select_subspace(selector, config.n_s, criterion=config.no_selection)
        if smap.n_s == n_orb:
            phases.append(_build_phase("full", run_ints, full_pool))
        else:
            frozen_occ = [p for p in range(n_occ) if p not in smap.active_spatial]
            deleted_virt = [p for p in range(n_occ, n_orb) if p not in smap.active_spatial]
            sub_ints = freeze_and_select(run_ints, frozen_occ, deleted_virt)
            sub_pool = restrict_pool(full_pool, smap)
            phases.append(_build_phase("subspace", sub_ints, sub_pool, smap))
            phases.append(_build_phase("full", run_ints, full_pool))
    else:
        phases.append(_build_phase("full", run_ints, full_pool))

    run_ctx = phases[-1]
    rho_fci = one_rdm_sector(run_ctx.fci_coords, run_ctx.sector, n_orb)

    rows: list[TraceRow] = []
    energy_evals = 0
    screen_grad_evals = 0
    opt_grad_evals = 0
    degraded_steps = 0
    iteration = 0
    stop_reason = "max_iterations"
    state: AnsatzState | None = None
    energy = 0.0

    for phase_idx, ctx in enumerate(phases):
        if state is None:
            ref = _reference_coords(ctx.sector, ctx.ints.n_elec)
            state = AnsatzState([], ctx.sector, ref, ref.copy())
            energy = float(np.vdot(ref, ctx.h_matrix.dot(ref)).real)
        else:
            # project the subspace ansatz onto the complete orbital space
            prev_energy = energy
            embedded = embed_ansatz(state.elements, phases[0].smap, ctx.pool)
            ref = _reference_coords(ctx.sector, ctx.ints.n_elec)
            state = AnsatzState(embedded, ctx.sector, ref, ref.copy())
            state.recompute()
            energy = float(np.vdot(state.cached_coords,
                                   ctx.h_matrix.dot(state.cached_coords)).real)
            if abs(energy - prev_energy) > 1e-9:
                raise RuntimeError(
                    f"embedding broke the energy identity: {energy} vs {prev_energy}"
                )
            if config.reoptimize_at_embedding and state.elements:
                outcome = optimize(ctx.h_matrix, state, config.tol)
                energy_evals += outcome.n_energy_evaluations
                opt_grad_evals += outcome.n_gradient_evaluations
                degraded_steps += outcome.degraded
                state, energy = outcome.ansatz, outcome.energy
            sym = _check_symmetries(ctx, state.cached_coords)
            rows.append(_make_row(
                iteration, ctx, "projection", -1, "[projection]", 0.0, energy,
                energy - run_ctx.e_fci, energy_evals, screen_grad_evals,
                opt_grad_evals, config, state, rho_fci, run_ctx, n_occ, sym,
            ))

        while iteration < config.max_iters:
            grads = pool_gradients(ctx.h_matrix, ctx.pool_matrices, state.cached_coords)
            screen_grad_evals += len(ctx.pool)
            chosen = select_operator(grads)
            if chosen is None:
                stop_reason = "gradients_converged"
                break
            trial = AnsatzState(
                state.elements + [(ctx.pool[chosen], 0.0)],
                ctx.sector, state.reference_coords, state.cached_coords.copy(),
            )
            outcome = optimize(ctx.h_matrix, trial, config.tol)
            energy_evals += outcome.n_energy_evaluations
            opt_grad_evals += outcome.n_gradient_evaluations
            if outcome.energy > energy - ENERGY_RISE_TOL:
                stop_reason = "energy_non_decreasing"
                break
            degraded_steps += outcome.degraded
            state, energy = outcome.ansatz, outcome.energy
            iteration += 1
            sym = _check_symmetries(ctx, state.cached_coords)
            rows.append(_make_row(
                iteration, ctx, "operator", ctx.pool[chosen].id, ctx.pool[chosen].label,
                float(np.max(np.abs(grads))), energy, energy - run_ctx.e_fci,
                energy_evals, screen_grad_evals, opt_grad_evals, config, state,
                rho_fci, run_ctx, n_occ, sym,
            ))
            if (config.stop_at_error is not None
                    and energy - run_ctx.e_fci <= config.stop_at_error):
                stop_reason = "target_error_reached"
                break
        else:
            stop_reason = "max_iterations"
        if phase_idx == len(phases) - 1:
            break
        if stop_reason == "target_error_reached":
            break
        if stop_reason == "max_iterations" and iteration >= config.max_iters:
            break

    return AdaptResult(
        config=config,
        rows=rows,
        final_energy=energy,
        e_fci=run_ctx.e_fci,
        stop_reason=stop_reason,
        operator_labels=[op.label for op, _ in state.elements],
        thetas=[t for _, t in state.elements],
        pool_size_by_phase={ctx.name: len(ctx.pool) for ctx in phases},
        degraded_steps=degraded_steps,
    )


def _make_row(iteration, ctx, event, op_id, label, max_grad, energy, error,
              energy_evals, screen_grad_evals, opt_grad_evals, config, state,
              rho_fci, run_ctx, n_occ_full, symmetries) -> TraceRow:
    fid = None
    if config.track_fidelity:
        rho = _full_space_rdm(ctx, state.cached_coords, run_ctx.ints.n_orb,
                              ctx.smap, n_occ_full)
        fid = fidelity(rho_fci, rho)
    counts = ansatz_resources(
        [(op.qubit_form, theta) for op, theta in state.elements],
        n_qubits=ctx.sector.n_qubits,
        reference_occupied=ctx.ints.n_elec,
    )
    return TraceRow(
        iteration=iteration,
        phase=ctx.name,
        event=event,
        selected_operator_id=op_id,
        selected_operator_label=label,
        max_abs_gradient=max_grad,
        energy=energy,
        energy_error_vs_fci=error,
        cumulative_energy_evaluations=energy_evals,
        cumulative_gradient_evaluations=screen_grad_evals,
        cumulative_optimizer_gradient_evaluations=opt_grad_evals,
        fidelity=fid,
        s_squared=symmetries[0],
        particle_number=symmetries[1],
        gate_total=counts.total_gates,
        gate_cnot=counts.cnot_gates,
        gate_depth=counts.depth,
        n_parameters=len(state.elements),
    )
