"""Scheduling, ideal trajectories, ensemble averaging, and r-c sweeps."""

import numpy as np
import pytest

from corrnoise.circuits import CANONICAL_TARGETS, Circuit, GateOp, canonical_circuits
from corrnoise.core import StateVector, basis_state
from corrnoise.measures import pair_dfs
from corrnoise.noise import NoiseModel, two_qubit_model, variance_of_sum
from corrnoise.simulate import (
    EnsembleConfig,
    build_schedule,
    infer_pair_dfs,
    run_ensemble,
    run_ideal,
    sweep_rc,
)

BELL_MINUS = StateVector(2, np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2))


def wait_circuit(duration: float, n_qubits: int = 2) -> Circuit:
    return Circuit(n_qubits, (GateOp("WAIT", (), None, duration),), label="idle")


# ── schedule ─────────────────────────────────────────────────────────────


def test_build_schedule_slice_layout():
    circ = Circuit(2, (GateOp("X", (1,), None, 1.0), GateOp("RZ", (2,), 0.3, 0.0)))
    sched = build_schedule(circ, 4)
    # 4 slices for the timed gate, 1 for the zero-duration gate
    assert sched.slice_dts.tolist() == [0.25, 0.25, 0.25, 0.25, 0.0]
    assert sched.times.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0, 1.0]
    # the gate fires on the last slice of its window
    assert sched.gate_idx.tolist() == [-1, -1, -1, 0, 1]
    assert sched.gates.shape == (2, 4, 4)


def test_build_schedule_skips_identity_gates():
    sched = build_schedule(wait_circuit(2.0), 8)
    assert sched.gates.shape[0] == 0
    assert np.all(sched.gate_idx == -1)
    assert sched.slice_dts.sum() == pytest.approx(2.0)


def test_ensemble_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(n_realizations_initial=0)
    with pytest.raises(ValueError):
        EnsembleConfig(n_realizations_initial=100, max_realizations=50)
    with pytest.raises(ValueError):
        EnsembleConfig(convergence_tol=0.0)
    with pytest.raises(ValueError):
        EnsembleConfig(time_samples_per_gate=0)


# ── noise-free trajectories ──────────────────────────────────────────────


def test_run_ideal_reaches_canonical_targets():
    for label, circ in canonical_circuits().items():
        times, states = run_ideal(circ)
        assert times[-1] == pytest.approx(circ.total_duration)
        fid = abs(np.vdot(CANONICAL_TARGETS[label], states[-1].amps)) ** 2
        assert fid == pytest.approx(1.0, abs=1e-12), label


def test_run_ideal_static_field_phases():
    b = 0.85
    plus = StateVector(1, np.array([1.0, 1.0]) / np.sqrt(2))
    times, states = run_ideal(wait_circuit(3.0, n_qubits=1), initial=plus, static_fields=[b])
    for t, s in zip(times, states):
        want = np.array([np.exp(-1j * b * t), np.exp(1j * b * t)]) / np.sqrt(2)
        assert np.allclose(s.amps, want, atol=1e-12)


def test_run_ideal_rejects_mismatched_initial():
    with pytest.raises(ValueError):
        run_ideal(wait_circuit(1.0), initial=basis_state(3, 0))


# ── ensemble averaging ───────────────────────────────────────────────────


def test_run_ensemble_requires_model():
    with pytest.raises(ValueError, match="NoiseModel"):
        run_ensemble(wait_circuit(1.0))
    with pytest.raises(ValueError, match="qubit counts"):
        run_ensemble(wait_circuit(1.0, n_qubits=3), model=two_qubit_model(1, 1, 0))


def test_wait_decay_matches_gaussian_law():
    # Bell pair under uncorrelated noise: the |01><10| coherence sits across
    # a generator gap of 2(db1 - db2), so it decays as E = exp(-2 v t^2)
    # with v = Var(db1 - db2); F = (1+E)/2 and purity = (1+E^2)/2
    model = two_qubit_model(1.0, 0.8, 0.0)
    v = variance_of_sum(model, [1.0, -1.0])
    t_end = 1.0
    cfg = EnsembleConfig(
        n_realizations_initial=20000, max_realizations=20000, time_samples_per_gate=8, rng_seed=21
    )
    rep = run_ensemble(wait_circuit(t_end), initial=BELL_MINUS, model=model, cfg=cfg)
    for t, f, g in zip(rep.times, rep.fidelity, rep.purity):
        e = np.exp(-2 * v * t * t)
        assert f == pytest.approx((1 + e) / 2, abs=0.01)
        assert g == pytest.approx((1 + e * e) / 2, abs=0.01)
    assert rep.final_fidelity == rep.fidelity[-1]
    assert rep.final_infidelity == pytest.approx(1 - rep.fidelity[-1])
    assert rep.final_purity == rep.purity[-1]


def test_convergence_doubles_until_tolerance():
    cfg = EnsembleConfig(n_realizations_initial=500, convergence_tol=0.02, rng_seed=2)
    rep = run_ensemble(
        canonical_circuits()["bell_cz"], model=two_qubit_model(0.3, 0.3, 0.5), cfg=cfg
    )
    assert rep.converged
    assert 1000 <= rep.n_realizations_used < cfg.max_realizations
    # doubling schedule: used count is initial * 2^k
    assert rep.n_realizations_used % 500 == 0


def test_capped_run_reports_unconverged():
    cfg = EnsembleConfig(n_realizations_initial=256, max_realizations=256, rng_seed=3)
    rep = run_ensemble(wait_circuit(1.0), initial=BELL_MINUS, model=two_qubit_model(1, 1, 0), cfg=cfg)
    assert not rep.converged
    assert rep.n_realizations_used == 256


def test_threaded_run_is_bitwise_deterministic():
    model = two_qubit_model(1.0, 0.6, 0.3)
    cfg = EnsembleConfig(n_realizations_initial=4096, max_realizations=4096, rng_seed=9)
    reps = [
        run_ensemble(canonical_circuits()["bell_sqrtswap"], model=model, cfg=cfg, threads=th)
        for th in (1, 4)
    ]
    assert np.array_equal(reps[0].fidelity, reps[1].fidelity)
    assert np.array_equal(reps[0].purity, reps[1].purity)
    assert np.array_equal(reps[0].avg_rho[-1].elems, reps[1].avg_rho[-1].elems)


def test_repeat_run_is_reproducible():
    model = two_qubit_model(0.7, 0.7, -0.2)
    cfg = EnsembleConfig(n_realizations_initial=512, max_realizations=512, rng_seed=31)
    a = run_ensemble(wait_circuit(0.5), initial=BELL_MINUS, model=model, cfg=cfg)
    b = run_ensemble(wait_circuit(0.5), initial=BELL_MINUS, model=model, cfg=cfg)
    assert np.array_equal(a.fidelity, b.fidelity)


def test_dfs_inference_and_metadata():
    cfg = EnsembleConfig(n_realizations_initial=64, max_realizations=64)
    rep = run_ensemble(wait_circuit(0.2), model=two_qubit_model(1, 1, 0.5), cfg=cfg)
    assert rep.metadata["dfs"] == "-"  # positive correlation protects the odd pair
    rep = run_ensemble(wait_circuit(0.2), model=two_qubit_model(1, 1, -0.5), cfg=cfg)
    assert rep.metadata["dfs"] == "+"
    rep = run_ensemble(
        wait_circuit(0.2), model=two_qubit_model(1, 1, 0.5), cfg=cfg, dfs=pair_dfs("+")
    )
    assert rep.metadata["dfs"] == "+"
    assert rep.metadata["seed"] == 0
    assert rep.metadata["circuit"] == "idle"
    assert rep.metadata["backend"] in ("python", "cython")


def test_infer_pair_dfs_rules():
    assert infer_pair_dfs(two_qubit_model(1, 1, 0.7)).sign_label == "-"
    assert infer_pair_dfs(two_qubit_model(1, 1, -0.7)).sign_label == "+"
    # exact tie prefers the odd pair
    assert infer_pair_dfs(two_qubit_model(1, 1, 0.0)).sign_label == "-"
    assert infer_pair_dfs(NoiseModel(np.ones(3), np.eye(3))) is None


def test_wider_register_has_no_pair_dfs():
    n = 3
    model = NoiseModel(np.full(n, 0.5), np.eye(n))
    cfg = EnsembleConfig(n_realizations_initial=64, max_realizations=64)
    rep = run_ensemble(wait_circuit(0.3, n_qubits=3), model=model, cfg=cfg)
    assert np.all(np.isnan(rep.d_g))
    assert not np.any(np.isnan(rep.d_c))
    assert rep.metadata["dfs"] == ""


def test_d_measures_on_trajectory_start():
    # from |00>: d_g = 1 against the odd pair and d_c = 0 exactly
    cfg = EnsembleConfig(n_realizations_initial=64, max_realizations=64)
    rep = run_ensemble(wait_circuit(0.5), model=two_qubit_model(1, 1, 1.0), cfg=cfg)
    assert rep.d_g[0] == pytest.approx(1.0)
    assert rep.d_c[0] == pytest.approx(0.0, abs=1e-14)


# ── sweeps ───────────────────────────────────────────────────────────────


def test_sweep_rc_grid_and_protected_corner():
    cfg = EnsembleConfig(n_realizations_initial=800, max_realizations=800, rng_seed=5)
    res = sweep_rc(
        wait_circuit(1.0),
        r_values=[1.0, 2.0],
        c_values=[0.0, 1.0],
        base_sigma=1.0,
        cfg=cfg,
        initial=BELL_MINUS,
    )
    assert len(res.cells) == 4
    grid = res.grid("final_infidelity")
    assert grid.shape == (2, 2)
    # r=1, c=1 locks the offsets together; the odd-parity pair freezes
    assert grid[0, 1] == pytest.approx(0.0, abs=1e-10)
    assert grid[0, 0] > 0.05
    # all cells ran with the same draws
    assert all(cell.error == "" for cell in res.cells)
    assert {cell.n_realizations_used for cell in res.cells} == {800}


def test_sweep_rc_isolates_cell_failures():
    cfg = EnsembleConfig(n_realizations_initial=32, max_realizations=32)
    res = sweep_rc(
        wait_circuit(0.5), r_values=[1.0], c_values=[0.5, 1.5], base_sigma=0.5, cfg=cfg
    )
    ok, bad = res.cells
    assert ok.error == ""
    assert bad.error != ""
    assert np.isnan(bad.final_infidelity)
    assert np.isnan(res.grid("final_infidelity")[0, 1])


def test_sweep_rc_rejects_bad_sigma():
    with pytest.raises(ValueError):
        sweep_rc(wait_circuit(1.0), [1.0], [0.0], base_sigma=0.0)


def test_sweep_cell_integrated_dc_matches_trapezoid():
    cfg = EnsembleConfig(n_realizations_initial=64, max_realizations=64, rng_seed=1)
    model_sigma = 0.9
    res = sweep_rc(
        wait_circuit(1.0), [1.0], [0.3], base_sigma=model_sigma, cfg=cfg, initial=BELL_MINUS
    )
    rep = run_ensemble(
        wait_circuit(1.0),
        initial=BELL_MINUS,
        model=two_qubit_model(model_sigma, model_sigma, 0.3),
        cfg=cfg,
    )
    assert res.cells[0].integrated_dc == pytest.approx(np.trapezoid(rep.d_c, rep.times))
