import numpy as np
import pytest

from adaptforge.engine import (
    AdaptConfig,
    AnsatzState,
    _energy_and_gradient,
    optimize,
    pool_gradients,
    run_adapt,
    select_operator,
)
from adaptforge.io_integrals import load_fixture
from adaptforge.oracle import fci_ground_state_sector
from adaptforge.pool import build_pool
from adaptforge.qubit_map import (
    apply_exponential,
    build_hamiltonian,
    sector_basis,
    to_sector_matrix,
)
from conftest import toy_two_orbital


@pytest.fixture(scope="module")
def toy_workspace():
    ints = toy_two_orbital()
    sector = sector_basis(4, 1, 1)
    h = to_sector_matrix(build_hamiltonian(ints), sector)
    pool = build_pool(2, 1)
    mats = [op.matrix(sector) for op in pool]
    ref = np.zeros(sector.dim, dtype=complex)
    ref[sector.index_of(0b11)] = 1.0
    return ints, sector, h, pool, mats, ref


def test_pool_gradients_vanish_on_eigenstate(toy_workspace):
    _, sector, h, pool, mats, _ = toy_workspace
    _, ground = fci_ground_state_sector(h)
    grads = pool_gradients(h, mats, ground)
    assert np.max(np.abs(grads)) < 1e-9


def test_pool_gradients_match_finite_differences():
    ints = load_fixture("h4_linear_3")
    from adaptforge.scf import freeze_and_select

    small = freeze_and_select(ints, [], [4, 5, 6, 7])  # 8-qubit case
    sector = sector_basis(8, 2, 2)
    h = to_sector_matrix(build_hamiltonian(small), sector)
    pool = build_pool(4, 2)
    mats = [op.matrix(sector) for op in pool]
    psi = np.zeros(sector.dim, dtype=complex)
    psi[sector.index_of(0b1111)] = 1.0
    # move off the reference so gradients are generic
    psi = apply_exponential(mats[0], 0.21, psi)
    psi = apply_exponential(mats[7], -0.13, psi)

    grads = pool_gradients(h, mats, psi)
    d = 1e-5
    for k in (0, 3, 7, len(pool) - 1):
        e_plus = np.vdot(
            apply_exponential(mats[k], d, psi), h.dot(apply_exponential(mats[k], d, psi))
        ).real
        e_minus = np.vdot(
            apply_exponential(mats[k], -d, psi), h.dot(apply_exponential(mats[k], -d, psi))
        ).real
        fd = (e_plus - e_minus) / (2 * d)
        assert grads[k] == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_first_selected_operator_is_a_double():
    ints = load_fixture("h4_linear_3")
    sector = sector_basis(16, 2, 2)
    h = to_sector_matrix(build_hamiltonian(ints), sector)
    pool = build_pool(8, 2)
    mats = [op.matrix(sector) for op in pool]
    ref = np.zeros(sector.dim, dtype=complex)
    ref[sector.index_of(0b1111)] = 1.0
    grads = pool_gradients(h, mats, ref)
    chosen = select_operator(grads)
    assert pool[chosen].excitation[0] == "d"
    # singles have exactly zero gradient at the closed-shell reference (Brillouin)
    for op, g in zip(pool, grads):
        if op.excitation[0] == "s":
            assert abs(g) < 1e-10


def test_select_operator_rules():
    assert select_operator(np.array([0.1, -0.5, 0.2])) == 1
    assert select_operator(np.array([0.5, -0.5])) == 0  # exact tie -> lowest id
    assert select_operator(np.array([1e-10, -1e-11])) is None
    with pytest.raises(ValueError):
        select_operator(np.array([]))


def test_optimize_zero_operator_ansatz(toy_workspace):
    _, sector, h, pool, mats, ref = toy_workspace
    state = AnsatzState([], sector, ref, ref.copy())
    out = optimize(h, state, 1e-4)
    assert out.n_energy_evaluations == 0
    assert out.energy == pytest.approx(np.vdot(ref, h.dot(ref)).real, abs=1e-12)


def test_optimize_descends_single_operator(toy_workspace):
    _, sector, h, pool, mats, ref = toy_workspace
    e_ref = float(np.vdot(ref, h.dot(ref)).real)
    state = AnsatzState([(pool[1], 0.0)], sector, ref, ref.copy())
    out = optimize(h, state, 1e-6)
    assert out.energy <= e_ref + 1e-12
    assert out.n_energy_evaluations > 0


def test_analytic_gradient_matches_finite_differences(toy_workspace):
    ints, sector, h, pool, mats, ref = toy_workspace
    rng = np.random.default_rng(12)
    for _ in range(10):
        thetas = rng.uniform(-0.5, 0.5, size=3)
        ops = [mats[0], mats[1], mats[0]]
        e0, grads = _energy_and_gradient(h, ops, thetas, ref)
        for k in range(3):
            d = 1e-5
            tp, tm = thetas.copy(), thetas.copy()
            tp[k] += d
            tm[k] -= d
            ep, _ = _energy_and_gradient(h, ops, tp, ref)
            em, _ = _energy_and_gradient(h, ops, tm, ref)
            fd = (ep - em) / (2 * d)
            assert grads[k] == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_run_adapt_toy_reaches_fci():
    cfg = AdaptConfig(fixture="h4_linear_3", frozen=(1,), deleted=(3, 4, 5, 6, 7),
                      max_iters=6)
    res = run_adapt(cfg)
    assert res.final_energy == pytest.approx(res.e_fci, abs=1e-9)
    assert len(res.rows) <= 2


def test_run_adapt_monotone_energy_and_counters():
    cfg = AdaptConfig(fixture="h4_linear_3", max_iters=8)
    res = run_adapt(cfg)
    energies = [r.energy for r in res.rows]
    assert all(e2 <= e1 + 1e-9 for e1, e2 in zip(energies, energies[1:]))
    for r in res.rows:
        assert r.energy >= res.e_fci - 1e-9
    evals = [r.cumulative_energy_evaluations for r in res.rows]
    gevals = [r.cumulative_gradient_evaluations for r in res.rows]
    assert all(b >= a for a, b in zip(evals, evals[1:]))
    # one gradient evaluation per pool operator per screening
    pool_size = res.pool_size_by_phase["full"]
    assert gevals == [pool_size * (k + 1) for k in range(len(gevals))]


def test_run_adapt_deterministic():
    cfg = AdaptConfig(fixture="h4_linear_3", max_iters=5)
    r1 = run_adapt(cfg)
    r2 = run_adapt(cfg)
    assert [row.as_dict() for row in r1.rows] == [row.as_dict() for row in r2.rows]


def test_two_phase_full_subspace_equals_direct():
    direct = run_adapt(AdaptConfig(fixture="h4_linear_3", max_iters=5))
    degenerate = run_adapt(AdaptConfig(
        fixture="h4_linear_3", phase_mode="subspace", n_s=8, max_iters=5))
    assert [r.as_dict() for r in direct.rows] == [r.as_dict() for r in degenerate.rows]


def test_two_phase_projection_continuity():
    cfg = AdaptConfig(fixture="h4_linear_3", phase_mode="subspace", n_s=4,
                      max_iters=24, reoptimize_at_embedding=False)
    res = run_adapt(cfg)
    phases = [r.phase for r in res.rows]
    assert "subspace" in phases and "full" in phases
    proj = [r for r in res.rows if r.event == "projection"]
    assert len(proj) == 1
    # projecting the converged subspace state must not change the energy
    last_sub = [r for r in res.rows if r.phase == "subspace"][-1]
    assert proj[0].energy == pytest.approx(last_sub.energy, abs=1e-9)
    # subspace screenings are cheaper: restricted pool is smaller
    assert res.pool_size_by_phase["subspace"] < res.pool_size_by_phase["full"]


def test_two_phase_stops_at_target_error():
    cfg = AdaptConfig(fixture="h4_linear_3", basis="uhf-no", max_iters=40,
                      stop_at_error=1.6e-3)
    res = run_adapt(cfg)
    assert res.stop_reason == "target_error_reached"
    assert res.rows[-1].energy_error_vs_fci <= 1.6e-3
    assert res.rows[-2].energy_error_vs_fci > 1.6e-3


def test_optimize_degraded_flag(toy_workspace):
    _, sector, h, pool, mats, ref = toy_workspace
    state = AnsatzState([(pool[1], 0.0)], sector, ref, ref.copy())
    out = optimize(h, state, 1e-6, max_opt_iter=0)  # forced line-search cutoff
    assert out.degraded
    assert out.energy <= np.vdot(ref, h.dot(ref)).real + 1e-12


def test_invalid_config():
    with pytest.raises(ValueError, match="unknown config keys"):
        AdaptConfig.from_dict({"fixture": "x", "bogus": 1})
    with pytest.raises(ValueError, match="n_s"):
        run_adapt(AdaptConfig(fixture="h4_linear_3", phase_mode="subspace"))
    with pytest.raises(ValueError, match="basis"):
        run_adapt(AdaptConfig(fixture="h4_linear_3", basis="unknown"))


def test_config_round_trip():
    cfg = AdaptConfig(fixture="h2o_1", basis="uhf-no", phase_mode="subspace",
                      n_s=6, frozen=(0,), deleted=(11, 12))
    again = AdaptConfig.from_dict(cfg.to_dict())
    assert again == cfg
