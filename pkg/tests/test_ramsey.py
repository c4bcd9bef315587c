"""Cross-correlation Ramsey experiments: simulation, fitting, inversion."""

import math

import numpy as np
import pytest

from corrnoise.noise import two_qubit_model, variance_of_sum
from corrnoise.ramsey import (
    VARIANTS,
    classify_dfs,
    extract_correlation,
    fit_envelope,
    ramsey_closed_form,
    run_qubit_ramsey,
    run_ramsey,
)
from corrnoise.simulate import EnsembleConfig


def fixed_cfg(n: int, seed: int = 0, tsg: int = 2) -> EnsembleConfig:
    return EnsembleConfig(
        n_realizations_initial=n, max_realizations=n, time_samples_per_gate=tsg, rng_seed=seed
    )


def fringe_grid(rate: float, periods: float = 4.0, n_pts: int = 28):
    """Window sized to the expected decay, with a field that puts the
    requested number of fringe periods inside it."""
    t_max = 1.5 / math.sqrt(2.0 * rate)
    freq = 2.0 * math.pi * periods / t_max
    return np.linspace(0.0, t_max, n_pts), freq


# ── closed form ──────────────────────────────────────────────────────────


def test_closed_form_values():
    m = two_qubit_model(1.0, 0.8, 0.5)
    t = np.linspace(0.0, 1.0, 9)
    b = (1.1, 0.4)
    for variant, signs in (("plus", (1, 1)), ("minus", (1, -1)), ("q1", (1, 0)), ("q2", (0, 1))):
        v = variance_of_sum(m, signs)
        freq = 2.0 * (signs[0] * b[0] + signs[1] * b[1])
        want = 0.5 + 0.5 * np.exp(-2 * v * t**2) * np.cos(freq * t)
        assert ramsey_closed_form(variant, t, b, m) == pytest.approx(want)
    # every variant starts at probability one
    for variant in VARIANTS:
        assert ramsey_closed_form(variant, [0.0] , b, m)[0] == pytest.approx(1.0)


# ── envelope fitting ─────────────────────────────────────────────────────


def test_fit_recovers_noiseless_curve():
    rate, freq, amp = 0.25, 2 * math.pi, 0.5
    t = np.linspace(0.0, 1.4, 40)
    p = 0.5 + amp * np.exp(-2 * rate * t**2) * np.cos(freq * t)
    fit = fit_envelope(t, p)
    assert fit.envelope_rate == pytest.approx(rate, rel=1e-6)
    assert fit.frequency == pytest.approx(freq, rel=1e-6)
    assert fit.amplitude == pytest.approx(amp, rel=1e-6)
    assert fit.decay_resolved
    assert fit.residual_rms < 1e-9
    assert fit.t2_effective == pytest.approx(1.0 / math.sqrt(2 * rate))
    assert fit.n_oscillations == pytest.approx(freq * fit.t2_effective / (2 * math.pi))


def test_fit_recovers_monotone_envelope():
    # no fringes at all: the hardest identifiability case
    rate = 0.8
    t = np.linspace(0.0, 1.2, 32)
    p = 0.5 + 0.5 * np.exp(-2 * rate * t**2)
    fit = fit_envelope(t, p)
    assert fit.envelope_rate == pytest.approx(rate, rel=1e-3)
    assert fit.decay_resolved


def test_fit_flags_flat_envelope():
    t = np.linspace(0.0, 3.0, 40)
    p = 0.5 + 0.5 * np.cos(1.5 * t)
    fit = fit_envelope(t, p)
    assert fit.envelope_rate == 0.0
    assert not fit.decay_resolved
    assert math.isinf(fit.t2_effective)
    assert math.isinf(fit.n_oscillations)
    assert fit.frequency == pytest.approx(1.5, rel=1e-6)


def test_fit_survives_measurement_noise():
    rng = np.random.default_rng(14)
    rate, freq = 2.0, 24.0
    t = np.linspace(0.0, 0.55, 36)
    p = 0.5 + 0.5 * np.exp(-2 * rate * t**2) * np.cos(freq * t)
    noisy = p + rng.normal(scale=0.01, size=t.size)
    fit = fit_envelope(t, noisy)
    assert fit.envelope_rate == pytest.approx(rate, rel=0.1)
    assert fit.frequency == pytest.approx(freq, rel=0.02)
    assert np.isfinite(fit.rate_stderr)


def test_fit_input_validation():
    t8 = np.linspace(0, 1, 8)
    with pytest.raises(ValueError):
        fit_envelope(np.linspace(0, 1, 7), np.full(7, 0.5))
    with pytest.raises(ValueError):
        fit_envelope(t8[::-1], np.full(8, 0.5))
    with pytest.raises(ValueError):
        fit_envelope(t8, np.full(9, 0.5))


# ── Monte-Carlo experiments ──────────────────────────────────────────────


def test_run_ramsey_matches_closed_form():
    m = two_qubit_model(1.0, 0.8, 0.5)
    b = [1.1, 0.4]
    v = variance_of_sum(m, [1, 1])
    t = np.linspace(0.0, 1.5 / math.sqrt(2 * v), 12)
    res = run_ramsey("plus", t, b, m, cfg=fixed_cfg(3000, seed=6))
    want = ramsey_closed_form("plus", t, b, m)
    assert np.max(np.abs(res.probabilities - want)) < 0.05
    assert res.target_index == 3
    assert res.n_realizations == (3000,) * t.size
    assert res.converged == (False,) * t.size  # capped runs report honestly
    assert np.all((res.probabilities >= 0) & (res.probabilities <= 1))


def test_run_ramsey_fitted_rate_accuracy():
    # the documented operating point: 2000 realizations per point keeps the
    # fitted envelope rate within ten percent
    m = two_qubit_model(1.0, 1.0, 0.5)
    v = variance_of_sum(m, [1, 1])
    t, freq = fringe_grid(v)
    b = [freq / 4.0, freq / 4.0]
    res = run_ramsey("plus", t, b, m, cfg=fixed_cfg(2000, seed=12))
    assert res.fitted_envelope_rate == pytest.approx(v, rel=0.10)
    assert res.oscillation_freq == pytest.approx(freq, rel=0.02)


def test_run_ramsey_is_reproducible():
    m = two_qubit_model(1.0, 0.9, -0.3)
    t = np.linspace(0.0, 0.8, 10)
    a = run_ramsey("minus", t, None, m, cfg=fixed_cfg(300, seed=8))
    b = run_ramsey("minus", t, None, m, cfg=fixed_cfg(300, seed=8))
    assert np.array_equal(a.probabilities, b.probabilities)
    c = run_ramsey("minus", t, None, m, cfg=fixed_cfg(300, seed=9))
    assert not np.array_equal(a.probabilities, c.probabilities)


def test_locked_pair_never_decays():
    # c = 1 with equal widths freezes the differenced variant exactly
    m = two_qubit_model(1.0, 1.0, 1.0)
    t = np.linspace(0.0, 4.0, 16)
    res = run_ramsey("minus", t, [0.3, 0.1], m, cfg=fixed_cfg(200, seed=4))
    want = ramsey_closed_form("minus", t, [0.3, 0.1], m)
    assert np.max(np.abs(res.probabilities - want)) < 1e-10
    assert res.fit.envelope_rate == 0.0
    assert math.isinf(res.t2_effective)


def test_qubit_ramsey_measures_single_qubit_rate():
    m = two_qubit_model(1.2, 0.5, 0.7)
    t, freq = fringe_grid(1.2**2)
    res = run_qubit_ramsey(1, t, [freq / 2.0, 0.0], m, cfg=fixed_cfg(2000, seed=3))
    assert res.variant == "q1"
    assert res.target_index == 2
    assert res.fitted_envelope_rate == pytest.approx(1.2**2, rel=0.12)
    with pytest.raises(ValueError):
        run_qubit_ramsey(3, t, None, m)


def test_shot_sampling_quantizes_probabilities():
    m = two_qubit_model(0.8, 0.8, 0.0)
    t = np.linspace(0.0, 1.0, 10)
    res = run_ramsey("plus", t, None, m, cfg=fixed_cfg(400, seed=2), shots=200)
    counts = res.probabilities * 200
    assert np.allclose(counts, np.round(counts), atol=1e-9)
    again = run_ramsey("plus", t, None, m, cfg=fixed_cfg(400, seed=2), shots=200)
    assert np.array_equal(res.probabilities, again.probabilities)
    with pytest.raises(ValueError):
        run_ramsey("plus", t, None, m, shots=0)


def test_run_ramsey_argument_validation():
    m = two_qubit_model(1, 1, 0)
    good = np.linspace(0, 1, 8)
    with pytest.raises(ValueError):
        run_ramsey("sideways", good, None, m)
    with pytest.raises(ValueError):
        run_ramsey("plus", np.linspace(0, 1, 5), None, m)
    with pytest.raises(ValueError):
        run_ramsey("plus", good[::-1], None, m)
    with pytest.raises(ValueError):
        run_ramsey("plus", good - 0.5, None, m)


# ── rate inversion ───────────────────────────────────────────────────────


def test_extract_correlation_round_trip():
    for c in (-1.0, -0.4, 0.0, 0.6, 1.0):
        s1, s2 = 1.3, 0.7
        m = two_qubit_model(s1, s2, c)
        est = extract_correlation(
            variance_of_sum(m, [1, 1]),
            variance_of_sum(m, [1, -1]),
            variance_of_sum(m, [1, 0]),
            variance_of_sum(m, [0, 1]),
        )
        assert est.correlation == pytest.approx(c, abs=1e-12)
        assert est.cross_rate == pytest.approx(c * s1 * s2, abs=1e-12)
        assert est.sum_rule_ok
        assert est.sum_rule_residual == pytest.approx(0.0, abs=1e-12)


def test_extract_correlation_flags_inconsistent_rates():
    est = extract_correlation(4.0, 0.0, 0.5, 0.5)  # residual 2, far off
    assert not est.sum_rule_ok
    assert est.sum_rule_residual == pytest.approx(2.0)
    # the same rates pass once uncertainties explain the residual
    loose = extract_correlation(4.0, 0.0, 0.5, 0.5, rate_uncertainties=(0.5, 0.5, 0.2, 0.2))
    assert loose.sum_rule_ok


def test_extract_correlation_edge_cases():
    with pytest.raises(ValueError):
        extract_correlation(-0.1, 1.0, 0.5, 0.5)
    est = extract_correlation(1.0, 1.0, 0.0, 0.5)
    assert math.isnan(est.correlation)  # geometric mean vanishes
    assert est.cross_rate == 0.0


def test_classify_dfs_rules():
    assert classify_dfs(math.inf, 1.0) == "+"
    assert classify_dfs(1.0, math.inf) == "-"
    assert classify_dfs(math.inf, math.inf) == "none"
    assert classify_dfs(10.0, 1.0) == "+"
    assert classify_dfs(1.0, 10.0) == "-"
    assert classify_dfs(2.0, 1.0) == "none"  # inside the default threshold
    assert classify_dfs(2.0, 1.0, ratio_threshold=1.5) == "+"
    with pytest.raises(ValueError):
        classify_dfs(0.0, 1.0)
    with pytest.raises(ValueError):
        classify_dfs(1.0, 1.0, ratio_threshold=1.0)
