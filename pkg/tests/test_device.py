"""CBRAM switching model checks.

The half-switching pulse width and the density value at t = 0 are frozen
from direct analytic evaluation of the switching law with the published
fit constants (tau = 0.38 ms, delta_t = 0.5, V0 = 0.4 V, V = 4.5 V).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from memsc.device import (
    DeviceParams,
    pulse_width_for,
    sample_switch,
    sample_switching_time,
    switch_probability,
    switching_time_density,
)
from memsc.rng import RngState


def test_default_tau_eff_matches_measured_constant():
    params = DeviceParams()
    assert params.tau_eff() == pytest.approx(0.38e-3, rel=1e-12)


def test_switch_probability_boundaries():
    params = DeviceParams()
    assert switch_probability(0.0, params.v_prog, params) == 0.0
    t_sat = 100 * params.tau_eff()
    assert switch_probability(t_sat, params.v_prog, params) >= 1 - math.exp(-100) - 1e-15


def test_switch_probability_half_at_ln2():
    # tau0 = 0.38 ms * e^(4.5/0.4) makes tau_eff(4.5 V) = 0.38 ms, so the
    # half-switching pulse is 0.38 ms * ln 2
    params = DeviceParams()
    t_half = 0.38e-3 * math.log(2)
    assert switch_probability(t_half, 4.5, params) == pytest.approx(0.5, rel=1e-12)


def test_switch_probability_negative_t_rejected():
    with pytest.raises(ValueError):
        switch_probability(-1e-9, 4.5, DeviceParams())


def test_pulse_width_trivials():
    params = DeviceParams()
    assert pulse_width_for(0.0, 4.5, params) == 0.0
    assert pulse_width_for(0.5, 4.5, params) == pytest.approx(
        params.tau_eff() * math.log(2), rel=1e-12
    )
    with pytest.raises(ValueError):
        pulse_width_for(1.0, 4.5, params)
    with pytest.raises(ValueError):
        pulse_width_for(-0.1, 4.5, params)


def test_round_trip_identity():
    params = DeviceParams()
    for p in (0.01, 0.5, 0.99):
        t = pulse_width_for(p, 4.5, params)
        assert switch_probability(t, 4.5, params) == pytest.approx(p, rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(
    p=st.floats(min_value=0.0, max_value=1 - 1e-9),
    v=st.floats(min_value=0.1, max_value=10.0),
)
def test_round_trip_identity_property(p, v):
    params = DeviceParams()
    back = switch_probability(pulse_width_for(p, v, params), v, params)
    assert back == pytest.approx(p, rel=1e-9, abs=1e-12)


def test_monotonicity_grid():
    params = DeviceParams()
    gen = np.random.default_rng(7)
    ts = np.sort(gen.uniform(0, 5 * params.tau_eff(0.5), 50))
    for v in gen.uniform(0.1, 10.0, 8):
        ps = switch_probability(ts, v, params)
        assert np.all(np.diff(ps) >= 0)
    # strict in voltage while the law is unsaturated (it reaches 1.0 exactly
    # in floating point once t >> tau_eff, where strictness cannot hold)
    t = 1e-3 * params.tau_eff(10.0)
    vs = np.sort(gen.uniform(0.1, 10.0, 50))
    ps = np.array([switch_probability(t, v, params) for v in vs])
    assert np.all(np.diff(ps) > 0)


def test_sample_switch_statistics():
    params = DeviceParams()
    rng = RngState(42).split("switch")
    t = pulse_width_for(0.3, params.v_prog, params)
    n = 10**5
    draws = sum(sample_switch(t, params.v_prog, params, rng) for _ in range(n))
    # 4-sigma Bernoulli bound: 4*sqrt(0.3*0.7/1e5) ~ 0.0058
    assert abs(draws / n - 0.3) <= 0.006


def test_sample_switch_boundaries():
    params = DeviceParams()
    rng = RngState(1).split("b")
    assert sample_switch(0.0, 4.5, params, rng) == 0
    assert sample_switch(100 * params.tau_eff(), 4.5, params, rng) == 1


def test_density_values():
    params = DeviceParams()
    # (delta_t / tau) at t = 0: 0.5 / 0.38 ms ~ 1315.8 per second
    assert switching_time_density(0.0, params) == pytest.approx(0.5 / 0.38e-3, rel=1e-12)
    d0 = switching_time_density(0.0, params)
    assert switching_time_density(params.tau, params) == pytest.approx(d0 * math.exp(-1))
    ratio = switching_time_density(2 * params.tau, params) / switching_time_density(
        params.tau, params
    )
    assert ratio == pytest.approx(math.exp(-1), rel=1e-12)
    with pytest.raises(ValueError):
        switching_time_density(-1.0, params)


def test_switching_time_sample_moments():
    params = DeviceParams()
    samples = sample_switching_time(params, RngState(2024).split("times"), size=10**5)
    assert np.all(samples >= 0)
    assert abs(np.mean(samples) / params.tau - 1) <= 0.02
    assert abs(np.median(samples) / (params.tau * math.log(2)) - 1) <= 0.02


def test_switching_time_chi_square_vs_exponential():
    # 20 equal-probability bins under the exponential law, 1% level
    params = DeviceParams()
    n, bins = 10**5, 20
    samples = sample_switching_time(params, RngState(99).split("chi2"), size=n)
    edges = -params.tau * np.log1p(-np.arange(bins + 1) / bins)
    edges[-1] = np.inf
    observed, _ = np.histogram(samples, edges)
    expected = n / bins
    chi2 = np.sum((observed - expected) ** 2 / expected)
    assert chi2 < stats.chi2.ppf(0.99, bins - 1)


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        DeviceParams(v0=0.0)
    with pytest.raises(ValueError):
        DeviceParams(tau=-1.0)
