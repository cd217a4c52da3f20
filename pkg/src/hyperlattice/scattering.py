"""Complex propagation along edges and junction scattering at nodes.

A harmonic plane wave of frequency ``omega`` on an edge with speed
``c`` and loss factor ``eta`` has wavenumber ``k = (omega/c)(1 - i eta)``
and propagates over a distance ``d`` with the factor ``exp(-i k d)``,
so its magnitude only ever decays.

At a junction the incident branch sees the remaining branches and any
lumped termination as a parallel load: admittances add.  Pressure
continuity and flow conservation then give the classic coefficients

    R = (Z_L - z) / (Z_L + z),        T = 1 + R

where ``z`` is the incident branch impedance and ``Z_L`` the load.  For
two branches and no termination this is the familiar two-media formula;
a zero-impedance load gives R = -1 (pressure-release), an unloaded
single-port end gives R = +1 (rigid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .lattice import Node


def wavenumber(omega: float, speed: float, loss_factor: float) -> complex:
    """Complex wavenumber k = (omega/speed) * (1 - i * loss_factor)."""
    if speed <= 0:
        raise ConfigurationError(f"speed must be positive, got {speed}")
    if omega < 0:
        raise ConfigurationError(f"omega must be >= 0, got {omega}")
    if loss_factor < 0:
        raise ConfigurationError(f"loss_factor must be >= 0, got {loss_factor}")
    return (omega / speed) * (1.0 - 1j * loss_factor)


def propagator(k: complex, distance: float) -> complex:
    """Spatial propagator exp(-i k d); |propagator| <= 1 for decaying k."""
    if distance < 0:
        raise ConfigurationError(f"distance must be >= 0, got {distance}")
    return complex(np.exp(-1j * k * distance))


def load_impedance(
    node: Node,
    incident_port: int,
    branch_impedances: list[float],
) -> float:
    """Load seen by a wave incident on one port: all else in parallel.

    Returns ``math.inf`` for an unloaded single-port end (rigid
    termination) and 0.0 when the termination admittance is infinite
    (pressure-release) or any other branch has zero impedance.
    """
    if not 0 <= incident_port < len(node.ports):
        raise ConfigurationError(
            f"incident port {incident_port} out of range for node {node.id}"
        )
    if len(branch_impedances) != len(node.ports):
        raise ConfigurationError(
            f"node {node.id}: got {len(branch_impedances)} impedances "
            f"for {len(node.ports)} ports"
        )
    admittance = node.termination_admittance
    if math.isinf(admittance):
        return 0.0
    for j, z in enumerate(branch_impedances):
        if j == incident_port:
            continue
        if z < 0:
            raise ConfigurationError(f"node {node.id}: negative impedance {z}")
        if z == 0:
            return 0.0
        admittance += 1.0 / z
    if admittance == 0.0:
        return math.inf
    return 1.0 / admittance


def reflection_coefficient(load: float, impedance: float) -> float:
    """R = (Z_L - z)/(Z_L + z), with the rigid-end limit R(inf) = +1."""
    if math.isinf(load):
        return 1.0
    return (load - impedance) / (load + impedance)


@dataclass(frozen=True)
class JunctionScattering:
    """Scattering matrix of one node.

    Column q is the response to a unit incoming pressure wave on port q:
    the diagonal holds reflections, off-diagonal entries the common
    transmitted amplitude 1 + R(q).  For real branch impedances the
    matrix is real and frequency independent.
    """

    node_id: int
    matrix: np.ndarray


def junction_matrix(node: Node, branch_impedances: list[float]) -> JunctionScattering:
    """Scattering matrix from branch impedances and the node termination.

    A zero-impedance branch is legal: waves incident on the other
    branches see a shorted load (R = -1, no transmission), and the
    zero branch itself carries no energy (its column uses the limiting
    R = +1 against any positive load).
    """
    size = len(node.ports)
    s = np.empty((size, size), dtype=float)
    for q in range(size):
        z_q = branch_impedances[q]
        if z_q < 0:
            raise ConfigurationError(
                f"node {node.id}: impedance must be >= 0, got {z_q}"
            )
        load = load_impedance(node, q, branch_impedances)
        if z_q == 0.0:
            r = -1.0 if load == 0.0 else 1.0
        else:
            r = reflection_coefficient(load, z_q)
        s[:, q] = 1.0 + r
        s[q, q] = r
    return JunctionScattering(node_id=node.id, matrix=s)
