from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hyperlattice as hl
from hyperlattice.errors import ConfigurationError
from hyperlattice.lattice import Node


def _node(degree: int, admittance: float = 0.0) -> Node:
    ports = tuple((eid + 1, "low") for eid in range(degree))
    return Node(id=0, ports=ports, termination_admittance=admittance)


def test_wavenumber_lossless():
    assert hl.wavenumber(2 * np.pi, 1.0, 0.0) == pytest.approx(2 * np.pi)


def test_wavenumber_with_loss():
    k = hl.wavenumber(2 * np.pi, 1.0, 0.003)
    assert k == pytest.approx(2 * np.pi * (1 - 0.003j))
    assert k.imag < 0


def test_wavenumber_zero_frequency():
    assert hl.wavenumber(0.0, 1.0, 0.003) == 0.0


def test_wavenumber_rejects_bad_speed():
    with pytest.raises(ConfigurationError):
        hl.wavenumber(1.0, 0.0, 0.0)


def test_propagator_identity_at_zero_distance():
    assert hl.propagator(hl.wavenumber(3.3, 1.0, 0.01), 0.0) == 1.0


def test_propagator_half_wavelength():
    assert hl.propagator(2 * np.pi + 0j, 0.5) == pytest.approx(-1.0)


def test_propagator_decay_magnitude():
    k = hl.wavenumber(2 * np.pi, 1.0, 0.003)
    assert abs(hl.propagator(k, 1.0)) == pytest.approx(math.exp(-0.006 * math.pi))
    assert abs(hl.propagator(k, 1.0)) == pytest.approx(0.98133, abs=1e-5)


def test_propagator_rejects_negative_distance():
    with pytest.raises(ConfigurationError):
        hl.propagator(1.0 + 0j, -0.1)


@settings(max_examples=100, deadline=None)
@given(
    omega=st.floats(0.1, 100.0),
    eta=st.floats(0.0, 0.1),
    d1=st.floats(0.0, 5.0),
    d2=st.floats(0.0, 5.0),
)
def test_propagator_semigroup(omega, eta, d1, d2):
    # identity up to rounding; sin/cos of large arguments carry an
    # absolute error of order phase * eps, so the bound scales with it
    k = hl.wavenumber(omega, 1.0, eta)
    combined = hl.propagator(k, d1) * hl.propagator(k, d2)
    direct = hl.propagator(k, d1 + d2)
    phase = omega * (d1 + d2)
    tolerance = (1e-14 + 1e-15 * phase) * max(1.0, abs(direct))
    assert abs(combined - direct) <= tolerance


def test_load_impedance_pressure_release_end():
    node = _node(1, admittance=math.inf)
    assert hl.load_impedance(node, 0, [1.0]) == 0.0


def test_load_impedance_rigid_end():
    node = _node(1, admittance=0.0)
    assert math.isinf(hl.load_impedance(node, 0, [1.0]))


def test_load_impedance_two_port():
    node = _node(2)
    assert hl.load_impedance(node, 0, [1.0, 1.7]) == pytest.approx(1.7)


def test_load_impedance_three_port_parallel():
    node = _node(3)
    assert hl.load_impedance(node, 0, [1.0, 1.0, 1.0]) == pytest.approx(0.5)


def test_junction_pressure_release():
    s = hl.junction_matrix(_node(1, admittance=math.inf), [1.0]).matrix
    assert s.shape == (1, 1)
    assert s[0, 0] == pytest.approx(-1.0)


def test_junction_two_media_coefficients():
    s = hl.junction_matrix(_node(2), [1.0, 1.7]).matrix
    assert s[0, 0] == pytest.approx(0.7 / 2.7)
    assert s[1, 0] == pytest.approx(1.0 + 0.7 / 2.7)
    assert s[0, 0] == pytest.approx(0.259259, abs=1e-6)
    assert s[1, 0] == pytest.approx(1.259259, abs=1e-6)


def test_junction_threeway_equal_impedances():
    s = hl.junction_matrix(_node(3), [1.0, 1.0, 1.0]).matrix
    for q in range(3):
        assert s[q, q] == pytest.approx(-1.0 / 3.0)
        for p in range(3):
            if p != q:
                assert s[p, q] == pytest.approx(2.0 / 3.0)


def test_junction_matched_two_port_is_transparent():
    s = hl.junction_matrix(_node(2), [1.3, 1.3]).matrix
    assert s[0, 0] == pytest.approx(0.0, abs=1e-15)
    assert s[1, 0] == pytest.approx(1.0)


def test_junction_zero_impedance_branch_blocks_everything():
    s = hl.junction_matrix(_node(3), [1.0, 0.0, 2.0])
    # incident on port 0: load is shorted by the zero branch
    assert s.matrix[0, 0] == pytest.approx(-1.0)
    assert s.matrix[1, 0] == pytest.approx(0.0, abs=1e-15)
    assert s.matrix[2, 0] == pytest.approx(0.0, abs=1e-15)


def test_junction_pressure_continuity_structure():
    s = hl.junction_matrix(_node(4), [0.8, 1.1, 2.0, 0.5]).matrix
    for q in range(4):
        for p in range(4):
            if p != q:
                assert s[p, q] == pytest.approx(1.0 + s[q, q], abs=1e-15)


def _power_balance(s: np.ndarray, impedances: list[float]) -> float:
    worst = 0.0
    for q in range(len(impedances)):
        total = s[q, q] ** 2 / impedances[q]
        for p in range(len(impedances)):
            if p != q:
                total += s[p, q] ** 2 / impedances[p]
        worst = max(worst, abs(total - 1.0 / impedances[q]))
    return worst


@settings(max_examples=150, deadline=None)
@given(
    impedances=st.lists(st.floats(0.1, 10.0), min_size=1, max_size=6),
    release=st.booleans(),
)
def test_junction_power_conservation(impedances, release):
    # a pressure-release termination absorbs nothing; no termination is lossless
    admittance = math.inf if release else 0.0
    node = _node(len(impedances), admittance=admittance)
    s = hl.junction_matrix(node, impedances).matrix
    assert _power_balance(s, impedances) <= 1e-12


@settings(max_examples=150, deadline=None)
@given(
    impedances=st.lists(st.floats(0.05, 20.0), min_size=1, max_size=6),
    index=st.integers(0, 5),
)
def test_reflection_magnitude_bounded(impedances, index):
    node = _node(len(impedances))
    q = index % len(impedances)
    load = hl.load_impedance(node, q, impedances)
    r = hl.junction_matrix(node, impedances).matrix[q, q]
    assert abs(r) <= 1.0 + 1e-15
    assert load >= 0.0 or math.isinf(load)
