from __future__ import annotations

import numpy as np
import pytest

import hyperlattice as hl
from hyperlattice.errors import ConfigurationError
from hyperlattice.fdsolver import FrequencyResponse
from hyperlattice.tdtransform import SweepConfig, hermitian_spectrum, pulse_value

SMALL = SweepConfig(delta_omega=2 * np.pi / 10, bins=512)
RECT = SweepConfig(delta_omega=2 * np.pi / 10, bins=512, window="rectangular")


def _response(config: SweepConfig, values: np.ndarray) -> FrequencyResponse:
    return FrequencyResponse(omegas=config.omega_grid(), values=values)


def test_config_derived_quantities():
    cfg = SweepConfig(delta_omega=2 * np.pi / 10, bins=4096)
    assert cfg.period == pytest.approx(10.0)
    assert cfg.dt == pytest.approx(10.0 / 8192)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SweepConfig(delta_omega=0.0)
    with pytest.raises(ConfigurationError):
        SweepConfig(bins=1)
    with pytest.raises(ConfigurationError):
        SweepConfig(window="hann")


def test_flat_spectrum_rectangular_gives_unit_area_pulse_at_zero():
    values = np.ones(RECT.bins, dtype=complex)
    tr = hl.to_time(_response(RECT, values), RECT)
    assert np.argmax(np.abs(tr.values)) == 0
    assert np.sum(tr.values) * RECT.dt == pytest.approx(1.0)


def test_shift_theorem_moves_the_pulse():
    tau = 0.5
    values = np.exp(-1j * RECT.omega_grid() * tau)
    tr = hl.to_time(_response(RECT, values), RECT)
    peak = np.argmax(np.abs(tr.values)) * RECT.dt
    assert peak == pytest.approx(tau, abs=RECT.dt / 2)


def test_matched_edge_spectrum_gives_half_area_pulse():
    # amplitude 1/2 with delay 0.5: one pulse at t=0.5, integrated area 1/2
    values = 0.5 * np.exp(-1j * RECT.omega_grid() * 0.5)
    tr = hl.to_time(_response(RECT, values), RECT)
    peak = np.argmax(np.abs(tr.values)) * RECT.dt
    assert peak == pytest.approx(0.5, abs=RECT.dt / 2)
    assert np.sum(tr.values) * RECT.dt == pytest.approx(0.5)


def test_hermitian_construction_keeps_imaginary_residue_tiny():
    rng = np.random.default_rng(3)
    values = rng.normal(size=SMALL.bins) + 1j * rng.normal(size=SMALL.bins)
    spectrum = hermitian_spectrum(values, SMALL)
    series = np.fft.ifft(spectrum)
    assert np.abs(series.imag).max() <= 1e-12 * np.abs(series.real).max()


def test_grid_mismatch_is_rejected():
    other = SweepConfig(delta_omega=1.0, bins=512)
    values = np.ones(512, dtype=complex)
    with pytest.raises(ConfigurationError):
        hl.to_time(_response(other, values), SMALL)


def test_round_trip_peaks_at_tau():
    rng = np.random.default_rng(11)
    for tau in rng.uniform(0.05, SMALL.period - 0.2, size=20):
        values = np.exp(-1j * SMALL.omega_grid() * tau)
        tr = hl.to_time(_response(SMALL, values), SMALL)
        peak = np.argmax(np.abs(hl.envelope(tr))) * SMALL.dt
        assert abs(peak - tau) <= SMALL.dt / 2 + 1e-12


def test_envelope_of_zeros_is_zero():
    tr = hl.to_time(_response(SMALL, np.zeros(SMALL.bins, complex)), SMALL)
    assert np.all(hl.envelope(tr) == 0.0)


def test_envelope_hugs_a_cosine_burst():
    t = np.arange(1024) * 0.01
    burst = np.where((t > 4) & (t < 6), np.cos(2 * np.pi * 12 * t), 0.0)
    tr = hl.TimeResponse(t_grid=t, values=burst)
    env = hl.envelope(tr)
    mid = (t > 4.5) & (t < 5.5)
    assert env[mid].min() >= 0.7  # smooth hump over the oscillation
    assert np.argmax(env) > np.argmax(t > 4)


def test_envelope_peak_near_band_limited_pulse():
    values = np.exp(-1j * SMALL.omega_grid() * 0.5)
    tr = hl.to_time(_response(SMALL, values), SMALL)
    env_peak = np.argmax(hl.envelope(tr)) * SMALL.dt
    assert abs(env_peak - 0.5) <= SMALL.dt


def _two_pulse_response(a1: float, t1: float, a2: float, t2: float):
    grid = SMALL.omega_grid()
    values = a1 * np.exp(-1j * grid * t1) + a2 * np.exp(-1j * grid * t2)
    return _response(SMALL, values)


def test_find_arrivals_single_pulse():
    values = np.exp(-1j * SMALL.omega_grid() * 0.5)
    tr = hl.to_time(_response(SMALL, values), SMALL)
    arrivals = hl.find_arrivals(tr, 0.5)
    assert len(arrivals) == 1
    assert arrivals[0].time == pytest.approx(0.5, abs=SMALL.dt / 2)


def test_find_arrivals_high_threshold_keeps_only_global_max():
    tr = hl.to_time(_two_pulse_response(1.0, 2.0, 0.4, 5.0), SMALL)
    arrivals = hl.find_arrivals(tr, 0.999)
    assert len(arrivals) == 1
    assert arrivals[0].time == pytest.approx(2.0, abs=SMALL.dt)


def test_find_arrivals_threshold_monotonicity():
    tr = hl.to_time(_two_pulse_response(1.0, 2.0, 0.2, 5.0), SMALL)
    strict = {round(a.time, 6) for a in hl.find_arrivals(tr, 0.5)}
    loose = {round(a.time, 6) for a in hl.find_arrivals(tr, 0.05)}
    assert strict <= loose


def test_find_arrivals_signed_amplitudes():
    tr = hl.to_time(_two_pulse_response(0.5, 2.0, -0.5, 5.0), SMALL)
    arrivals = sorted(hl.find_arrivals(tr, 0.5), key=lambda a: a.time)
    assert arrivals[0].amplitude > 0
    assert arrivals[1].amplitude < 0


def test_find_arrivals_rejects_bad_threshold():
    tr = hl.to_time(_response(SMALL, np.ones(SMALL.bins, complex)), SMALL)
    for bad in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ConfigurationError):
            hl.find_arrivals(tr, bad)


def test_pulse_value_matches_synthesized_samples():
    tau_loss = 0.004
    arrival = 300 * SMALL.dt  # on-grid pulse center
    grid = SMALL.omega_grid()
    values = 0.5 * np.exp(-1j * grid * arrival) * np.exp(-grid * tau_loss)
    values[0] = 0.0
    tr = hl.to_time(_response(SMALL, values), SMALL)
    for i in (300, 301, 305):
        offset = i * SMALL.dt - arrival
        predicted = 0.5 * pulse_value(SMALL, np.array([offset]), np.array([tau_loss]))[0]
        assert tr.values[i] == pytest.approx(predicted, rel=1e-9)
