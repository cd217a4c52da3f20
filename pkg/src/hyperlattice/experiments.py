"""Canonical scenarios and the dimensional-differencing experiments.

Every canonical run drives edge 1 at position 0.2 with a unit harmonic
force and assesses at position 0.7 on the same edge, then converts the
sweep to a pulse train.  Two derived structures isolate what the top
dimension contributes:

* in vivo: the top-level connectors are made so long that nothing
  returns from them within the analysis window, while their impedances
  (hence every junction scattering matrix, hence every reverberant
  amplitude inside the generator) stay exactly as they were.
* in vitro: the connector impedances are shorted to zero, decoupling
  the generator entirely; its ends then reflect with R = -1.

Subtracting the in-vivo from the total response leaves only the
arrivals that traveled through the added dimension (the excess).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .fdsolver import AssessSpec, DriveSpec, FrequencyResponse, frequency_response
from .lattice import (
    DEFAULT_LOSS_FACTOR,
    Lattice,
    UniformSampler,
    branch_impedances,
    generate,
    override_parameters,
)
from .oracle import first_connector_arrival
from .scattering import junction_matrix
from .tdtransform import Arrival, SweepConfig, TimeResponse, find_arrivals, to_time

DRIVE_POSITION = 0.2
ASSESS_POSITION = 0.7

#: Loss factor applied to stretched in-vivo connectors: large enough
#: that even the lowest sweep frequency is extinguished over one
#: traversal, realizing "no returns within the window" exactly.
VIVO_CONNECTOR_LOSS = 2.5

VARIANT_TOTAL = "total"
VARIANT_IN_VIVO = "in_vivo"
VARIANT_IN_VITRO = "in_vitro"
VARIANT_EXCESS = "excess"
VARIANTS = (VARIANT_TOTAL, VARIANT_IN_VIVO, VARIANT_IN_VITRO, VARIANT_EXCESS)

DEFAULT_PEAK_THRESHOLD = 1e-3


@dataclass(frozen=True)
class Scenario:
    """Fully resolved inputs for one run."""

    lattice: Lattice
    drive: DriveSpec
    assess: AssessSpec
    sweep: SweepConfig
    peak_threshold: float = DEFAULT_PEAK_THRESHOLD


@dataclass(frozen=True)
class ScenarioResult:
    """Outputs of one variant run over a scenario's grid."""

    variant: str
    lattice: Lattice
    response: FrequencyResponse
    time_response: TimeResponse
    arrivals: tuple[Arrival, ...]


def canonical_scenario(
    dimension: int,
    seed: int,
    overrides: dict[int, dict[str, float]] | None = None,
    *,
    sweep: SweepConfig | None = None,
    length_sampler: UniformSampler | None = None,
    impedance_sampler: UniformSampler | None = None,
    loss_factor: float = DEFAULT_LOSS_FACTOR,
    peak_threshold: float = DEFAULT_PEAK_THRESHOLD,
) -> Scenario:
    """The standard drive/assess configuration on a seeded lattice.

    Edge 1 keeps unit length, speed and density with loss factor 0.003;
    parameter overrides are applied last, so published values (for
    example the square's connector impedances 1.7 and 1.8) can be
    installed over any seed.
    """
    lattice = generate(
        dimension,
        length_sampler,
        impedance_sampler,
        seed,
        loss_factor=loss_factor,
    )
    if overrides:
        lattice = override_parameters(lattice, overrides)
    return Scenario(
        lattice=lattice,
        drive=DriveSpec(edge=1, position=DRIVE_POSITION, amplitude=1.0),
        assess=AssessSpec(edge=1, position=ASSESS_POSITION),
        sweep=sweep or SweepConfig(),
        peak_threshold=peak_threshold,
    )


def _top_connectors(lattice: Lattice, level: int) -> list[int]:
    ids = [e.id for e in lattice.edges_at_level(level, role="connector")]
    if not ids:
        raise ConfigurationError(f"no connector edges at level {level}")
    return ids


def in_vivo_variant(lattice: Lattice, level: int, time_window: float) -> Lattice:
    """Stretch the level's connectors beyond the observation window.

    Lengths become at least speed * time_window (one-way travel alone
    outlasts the window) and the connector loss factor is raised so the
    stretched legs are fully absorbing; impedances are untouched, so
    every junction scattering matrix is bit-identical to the original.
    """
    if time_window <= 0:
        raise ConfigurationError("time_window must be positive")
    assignments = {}
    for eid in _top_connectors(lattice, level):
        edge = lattice.edge(eid)
        assignments[eid] = {
            "length": max(edge.length, edge.speed * time_window),
            "loss_factor": max(edge.loss_factor, VIVO_CONNECTOR_LOSS),
        }
    return override_parameters(lattice, assignments)


def in_vitro_variant(lattice: Lattice, level: int) -> Lattice:
    """Short the level's connectors: zero impedance at their junctions.

    A zero-impedance branch pins the junction pressure to zero, which
    is identical to an infinite termination admittance at the node:
    every incident wave there reflects with R = -1 and transmits
    nothing.  The node form keeps all edge parameters positive.
    """
    touched: set[int] = set()
    for eid in _top_connectors(lattice, level):
        for node in lattice.nodes:
            if any(pid == eid for pid, _ in node.ports):
                touched.add(node.id)
    new_nodes = tuple(
        replace(n, termination_admittance=math.inf) if n.id in touched else n
        for n in lattice.nodes
    )
    return replace(lattice, nodes=new_nodes)


def excess_response(total: TimeResponse, in_vivo: TimeResponse) -> TimeResponse:
    """Pointwise difference total - in_vivo on identical grids."""
    if len(total.t_grid) != len(in_vivo.t_grid) or not np.allclose(
        total.t_grid, in_vivo.t_grid, rtol=1e-12, atol=1e-12
    ):
        raise ConfigurationError("time responses are on different grids")
    return TimeResponse(t_grid=total.t_grid, values=total.values - in_vivo.values)


def _run_variant(
    variant: str,
    lattice: Lattice,
    scenario: Scenario,
    jobs: int,
) -> ScenarioResult:
    sweep = scenario.sweep
    response = frequency_response(
        lattice, scenario.drive, scenario.assess, sweep.omega_grid(), jobs=jobs
    )
    time_response = to_time(response, sweep)
    arrivals = find_arrivals(time_response, scenario.peak_threshold)
    return ScenarioResult(
        variant=variant,
        lattice=lattice,
        response=response,
        time_response=time_response,
        arrivals=tuple(arrivals),
    )


def run_scenario(
    scenario: Scenario,
    variants: tuple[str, ...] = (VARIANT_TOTAL,),
    *,
    jobs: int = 1,
) -> dict[str, ScenarioResult]:
    """Run the requested variants over one scenario.

    ``excess`` implies both the total and in-vivo runs; the in-vivo and
    in-vitro structures modify the top level of the scenario's lattice.
    All variants share the drive, assess point and grid by construction.
    """
    unknown = set(variants) - set(VARIANTS)
    if unknown:
        raise ConfigurationError(f"unknown variants: {sorted(unknown)}")

    wanted = set(variants)
    if VARIANT_EXCESS in wanted:
        wanted.update((VARIANT_TOTAL, VARIANT_IN_VIVO))

    level = scenario.lattice.dimension
    results: dict[str, ScenarioResult] = {}
    if VARIANT_TOTAL in wanted:
        results[VARIANT_TOTAL] = _run_variant(
            VARIANT_TOTAL, scenario.lattice, scenario, jobs
        )
    if VARIANT_IN_VIVO in wanted:
        vivo = in_vivo_variant(scenario.lattice, level, scenario.sweep.period)
        results[VARIANT_IN_VIVO] = _run_variant(VARIANT_IN_VIVO, vivo, scenario, jobs)
    if VARIANT_IN_VITRO in wanted:
        vitro = in_vitro_variant(scenario.lattice, level)
        results[VARIANT_IN_VITRO] = _run_variant(VARIANT_IN_VITRO, vitro, scenario, jobs)
    if VARIANT_EXCESS in wanted:
        excess = excess_response(
            results[VARIANT_TOTAL].time_response,
            results[VARIANT_IN_VIVO].time_response,
        )
        # Excess peaks are thresholded against the total's scale: the
        # interesting question is where the runs differ, not where the
        # (often tiny) difference has its own internal maxima.
        env_scale = np.abs(results[VARIANT_TOTAL].time_response.values).max()
        arrivals = _excess_arrivals(excess, scenario.peak_threshold, env_scale)
        results[VARIANT_EXCESS] = ScenarioResult(
            variant=VARIANT_EXCESS,
            lattice=scenario.lattice,
            response=FrequencyResponse(
                omegas=results[VARIANT_TOTAL].response.omegas,
                values=results[VARIANT_TOTAL].response.values
                - results[VARIANT_IN_VIVO].response.values,
            ),
            time_response=excess,
            arrivals=tuple(arrivals),
        )
    return {name: results[name] for name in VARIANTS if name in results}


def _excess_arrivals(
    excess: TimeResponse, threshold: float, scale: float
) -> list[Arrival]:
    if scale <= 0:
        return []
    peak = np.abs(excess.values).max()
    if peak <= 0:
        return []
    effective = threshold * scale / peak
    if effective >= 1.0:
        return []
    return find_arrivals(excess, effective)


def connector_horizon(scenario: Scenario) -> float:
    """Earliest arrival using a top-level connector (t*), or inf."""
    return first_connector_arrival(
        scenario.lattice,
        scenario.drive,
        scenario.assess,
        scenario.lattice.dimension,
        horizon=scenario.sweep.period,
    )


def junction_matrices(lattice: Lattice) -> dict[int, np.ndarray]:
    """Scattering matrix per node id (for structural assertions)."""
    return {
        n.id: junction_matrix(n, branch_impedances(lattice, n)).matrix
        for n in lattice.nodes
    }
