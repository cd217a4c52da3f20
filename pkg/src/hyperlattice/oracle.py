"""Path-enumeration predictor of pulse arrival times and amplitudes.

Independent of the frequency-domain solver: a depth-first walk launches
the drive's two half-amplitude waves and follows every reflection and
transmission through the junction coefficients, emitting an arrival
each time a walk crosses the assess position.  Branches are pruned once
their cumulative time exceeds the horizon or their amplitude falls
below the floor.  Walks may revisit edges arbitrarily often; physical
decay (junction products and propagation loss) plus the horizon bound
the search.

Arrival amplitudes are the launch half-amplitude times the product of
junction coefficients, optionally reduced by a propagation-loss model.
Because the loss in the wave equation is frequency dependent, a single
per-path loss number must represent the whole synthesis band; the
``band_attenuation`` factor averages ``exp(-omega * tau)`` over the
windowed band (``tau`` is the path's accumulated loss time), which is
exactly the peak reduction a band-limited pulse experiences.

``predicted_arrivals`` goes one step further and synthesizes the full
truncated-path waveform through the same window and transform the
measurement chain uses, so predicted peaks are directly comparable to
solver peaks.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .fdsolver import AssessSpec, DriveSpec, FrequencyResponse
from .lattice import END_HIGH, END_LOW, Lattice, branch_impedances, opposite_end
from .scattering import junction_matrix
from .tdtransform import Arrival, SweepConfig, TimeResponse, find_arrivals, to_time

#: Arrivals closer than this are coalesced (a quarter of the default
#: time step, well below solver resolution).
DEFAULT_MERGE_TOLERANCE = 0.25 * SweepConfig().dt

_ATT_TABLE_SIZE = 1024


@dataclass(frozen=True)
class RayPath:
    """One reverberation path from drive to assess.

    ``junction_factor`` is the product of junction coefficients alone;
    ``amplitude`` additionally carries the half-amplitude launch factor
    and any propagation-loss reduction.  ``tau`` is the accumulated
    loss time (sum of loss_factor * traversal time per edge), ``time``
    the total travel time.
    """

    edge_sequence: tuple[int, ...]
    launch: str
    n_reflections: int
    junction_factor: float
    time: float
    tau: float
    amplitude: float


@dataclass(frozen=True)
class OracleArrival:
    """One (possibly coalesced) arrival: summed amplitude and its paths."""

    time: float
    amplitude: float
    paths: tuple[RayPath, ...]


def band_attenuation(config: SweepConfig) -> Callable[[np.ndarray], np.ndarray]:
    """Window-weighted average of exp(-omega * tau) over the band.

    Monotone nonincreasing in tau; equals 1 at tau = 0.  This is the
    factor by which a band-limited pulse's peak shrinks after
    accumulating loss time tau.
    """
    omegas = config.omega_grid()[1:]
    weights = config.window_weights()[1:]
    total = weights.sum()

    def attenuation(tau: np.ndarray) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        with np.errstate(under="ignore"):
            return (weights[None, :] * np.exp(-np.outer(tau, omegas))).sum(axis=1) / total

    return attenuation


class _Tables:
    """Directed-edge transition tables for the walk.

    Directed index d = 2 * rank + (0 if entering at the low end else 1);
    a walk on d travels toward the opposite end and scatters there.
    """

    def __init__(self, lattice: Lattice, drive: DriveSpec, assess: AssessSpec):
        self.edges = sorted(lattice.edges, key=lambda e: e.id)
        self.rank = {e.id: i for i, e in enumerate(self.edges)}
        self.edge_ids = [e.id for e in self.edges]
        n = len(self.edges)

        self.full_time = [0.0] * (2 * n)
        self.full_tau = [0.0] * (2 * n)
        self.cross_time = [-1.0] * (2 * n)
        self.cross_tau = [0.0] * (2 * n)
        for e in self.edges:
            r = self.rank[e.id]
            for entry in (0, 1):
                d = 2 * r + entry
                self.full_time[d] = e.travel_time
                self.full_tau[d] = e.loss_factor * e.travel_time
            if e.id == assess.edge:
                dist_low = assess.position
                dist_high = e.length - assess.position
                self.cross_time[2 * r] = dist_low / e.speed
                self.cross_tau[2 * r] = e.loss_factor * dist_low / e.speed
                self.cross_time[2 * r + 1] = dist_high / e.speed
                self.cross_tau[2 * r + 1] = e.loss_factor * dist_high / e.speed

        attachment: dict[tuple[int, str], tuple] = {}
        for node in lattice.nodes:
            s = junction_matrix(node, branch_impedances(lattice, node)).matrix
            for q, (eid, end) in enumerate(node.ports):
                attachment[(eid, end)] = (node, s, q)

        self.transitions: list[tuple[tuple[float, int, int], ...]] = [()] * (2 * n)
        for e in self.edges:
            r = self.rank[e.id]
            for entry_idx, entry_end in ((0, END_LOW), (1, END_HIGH)):
                arrive_end = opposite_end(entry_end)
                node, s, q = attachment[(e.id, arrive_end)]
                outs = []
                for p, (fid, fend) in enumerate(node.ports):
                    coeff = s[p, q]
                    if coeff == 0.0:
                        continue
                    d_next = 2 * self.rank[fid] + (0 if fend == END_LOW else 1)
                    is_reflection = 1 if (fid, fend) == (e.id, arrive_end) else 0
                    outs.append((float(coeff), d_next, is_reflection))
                self.transitions[2 * r + entry_idx] = tuple(outs)

    def launch_states(self, drive: DriveSpec) -> list[tuple[float, float, int]]:
        """Virtual entry (time, tau, d) for the two launch directions.

        A wave heading toward the high end behaves like one that entered
        the low end at a negative virtual time, and vice versa; crossing
        times before t = 0 are discarded by the walk.
        """
        e = self.edges[self.rank[drive.edge]]
        r = self.rank[drive.edge]
        to_high = (e.length - drive.position) / e.speed
        to_low = drive.position / e.speed
        return [
            (-to_low, -e.loss_factor * to_low, 2 * r),        # heading high
            (-to_high, -e.loss_factor * to_high, 2 * r + 1),  # heading low
        ]


def _check_specs(lattice: Lattice, drive: DriveSpec, assess: AssessSpec) -> None:
    try:
        de = lattice.edge(drive.edge)
        ae = lattice.edge(assess.edge)
    except KeyError as exc:
        raise ConfigurationError(str(exc)) from exc
    if not 0.0 < drive.position < de.length:
        raise ConfigurationError("drive position must be strictly inside its edge")
    if not 0.0 < assess.position < ae.length:
        raise ConfigurationError("assess position must be strictly inside its edge")
    if drive.amplitude == 0.0:
        raise ConfigurationError("drive amplitude must be nonzero")


def _unwind(cons: tuple | None) -> tuple[int, ...]:
    out: list[int] = []
    while cons is not None:
        out.append(cons[0])
        cons = cons[1]
    out.reverse()
    return tuple(out)


def enumerate_arrivals(
    lattice: Lattice,
    drive: DriveSpec,
    assess: AssessSpec,
    t_max: float,
    amplitude_floor: float,
    *,
    attenuation: Callable[[np.ndarray], np.ndarray] | None = None,
    merge_tolerance: float = DEFAULT_MERGE_TOLERANCE,
) -> list[OracleArrival]:
    """Exhaustive arrival enumeration up to a time horizon.

    Without an attenuation model, amplitudes are the bare half-amplitude
    times the junction products and the floor applies to those; with
    one, emitted and floor-checked amplitudes include the loss factor.
    Lowering the floor only ever appends arrivals.  Arrivals closer
    than ``merge_tolerance`` are coalesced with summed amplitudes
    (degenerate paths).
    """
    if t_max <= 0:
        raise ConfigurationError("t_max must be positive")
    if amplitude_floor <= 0:
        raise ConfigurationError("amplitude_floor must be positive")
    _check_specs(lattice, drive, assess)

    tables = _Tables(lattice, drive, assess)
    full_time = tables.full_time
    full_tau = tables.full_tau
    cross_time = tables.cross_time
    cross_tau = tables.cross_tau
    transitions = tables.transitions
    edge_of = [tables.edge_ids[d // 2] for d in range(2 * len(tables.edges))]

    if attenuation is None:
        att_table = None
        inv_step = 0.0
    else:
        tau_hi = max(1e-12, t_max * max(e.loss_factor for e in lattice.edges))
        knots = np.linspace(0.0, tau_hi, _ATT_TABLE_SIZE)
        att_table = attenuation(knots).tolist()
        inv_step = (_ATT_TABLE_SIZE - 1) / tau_hi
    last_knot = _ATT_TABLE_SIZE - 1

    half = 0.5 * drive.amplitude
    emissions: list[tuple[float, float, float, int, str, tuple | None]] = []
    for launch_label, (t0, tau0, d0) in zip(
        (END_HIGH, END_LOW), tables.launch_states(drive)
    ):
        stack: list[tuple[float, float, float, int, int, tuple | None]] = [
            (t0, tau0, half, d0, 0, (drive.edge, None))
        ]
        while stack:
            t, tau, amp, d, nrefl, path = stack.pop()
            ct = cross_time[d]
            if ct >= 0.0:
                tc = t + ct
                if 0.0 < tc <= t_max:
                    emissions.append((tc, amp, tau + cross_tau[d], nrefl, launch_label, path))
            te = t + full_time[d]
            if te > t_max:
                continue
            taue = tau + full_tau[d]
            if att_table is None:
                bound = 1.0
            else:
                idx = int(taue * inv_step)
                bound = att_table[idx if idx < last_knot else last_knot]
            for coeff, d_next, refl in transitions[d]:
                a_next = amp * coeff
                if (a_next if a_next > 0.0 else -a_next) * bound >= amplitude_floor:
                    stack.append(
                        (te, taue, a_next, d_next, nrefl + refl, (edge_of[d_next], path))
                    )

    if not emissions:
        return []

    taus = np.array([em[2] for em in emissions])
    if attenuation is None:
        factors = np.ones(len(emissions))
    else:
        factors = attenuation(taus)

    paths = []
    for (tc, amp, tau, nrefl, launch_label, cons), factor in zip(emissions, factors):
        amplitude = amp * float(factor)
        if abs(amplitude) < amplitude_floor:
            continue
        paths.append(
            RayPath(
                edge_sequence=_unwind(cons),
                launch=launch_label,
                n_reflections=nrefl,
                junction_factor=amp / half,
                time=tc,
                tau=tau,
                amplitude=amplitude,
            )
        )
    paths.sort(key=lambda p: p.time)

    arrivals: list[OracleArrival] = []
    group: list[RayPath] = []
    for path in paths:
        if group and path.time - group[-1].time > merge_tolerance:
            arrivals.append(_coalesce(group))
            group = []
        group.append(path)
    if group:
        arrivals.append(_coalesce(group))
    return arrivals


def _coalesce(group: list[RayPath]) -> OracleArrival:
    total = sum(p.amplitude for p in group)
    weights = sum(abs(p.amplitude) for p in group)
    if weights > 0:
        time = sum(p.time * abs(p.amplitude) for p in group) / weights
    else:
        time = group[0].time
    return OracleArrival(time=time, amplitude=total, paths=tuple(group))


def flatten_paths(arrivals: list[OracleArrival]) -> list[RayPath]:
    return [p for arrival in arrivals for p in arrival.paths]


def first_connector_arrival(
    lattice: Lattice,
    drive: DriveSpec,
    assess: AssessSpec,
    level: int,
    *,
    horizon: float = math.inf,
) -> float:
    """Earliest arrival whose path traverses a level-``level`` connector.

    Solved exactly as a shortest-time search over directed edges with a
    touched-a-connector flag, so no amplitude floor or time horizon can
    bias it; transitions with a zero junction coefficient carry no
    signal and are excluded.  Returns ``math.inf`` when the earliest
    such arrival lies beyond ``horizon`` (or no path exists).
    """
    connectors = {
        e.id for e in lattice.edges_at_level(level, role="connector")
    }
    if not connectors:
        raise ConfigurationError(f"lattice has no connector edges at level {level}")
    _check_specs(lattice, drive, assess)

    tables = _Tables(lattice, drive, assess)
    edge_of = [tables.edge_ids[d // 2] for d in range(2 * len(tables.edges))]

    best = math.inf
    dist: dict[tuple[int, bool], float] = {}
    heap: list[tuple[float, int, bool]] = []
    start_flag = drive.edge in connectors
    for t0, _, d0 in tables.launch_states(drive):
        key = (d0, start_flag)
        if t0 < dist.get(key, math.inf):
            dist[key] = t0
            heapq.heappush(heap, (t0, d0, start_flag))

    while heap:
        t, d, flag = heapq.heappop(heap)
        if t > dist.get((d, flag), math.inf) or t >= best:
            continue
        ct = tables.cross_time[d]
        if flag and ct >= 0.0:
            tc = t + ct
            if 0.0 < tc < best:
                best = tc
        te = t + tables.full_time[d]
        for _, d_next, _ in tables.transitions[d]:
            next_flag = flag or (edge_of[d_next] in connectors)
            key = (d_next, next_flag)
            if te < dist.get(key, math.inf):
                dist[key] = te
                heapq.heappush(heap, (te, d_next, next_flag))

    return best if best <= horizon else math.inf


def synthesize_response(
    paths: list[RayPath],
    config: SweepConfig,
    *,
    drive_amplitude: float = 1.0,
    chunk: int = 512,
) -> FrequencyResponse:
    """Frequency response of the truncated path sum.

    Each path contributes ``a * exp(-i omega time) * exp(-omega tau)``
    with ``a = drive_amplitude / 2 * junction_factor`` its loss-free
    emitted amplitude; the DC bin is pinned to 0 like a solver sweep.
    """
    omegas = config.omega_grid()
    values = np.zeros(config.bins, dtype=complex)
    if paths:
        raw = 0.5 * drive_amplitude * np.array([p.junction_factor for p in paths])
        exponents = np.array([-1j * p.time - p.tau for p in paths])
        for i in range(0, len(paths), chunk):
            block = slice(i, i + chunk)
            with np.errstate(under="ignore"):
                values += raw[block] @ np.exp(np.outer(exponents[block], omegas))
    values[0] = 0.0
    return FrequencyResponse(omegas=omegas, values=values)


def predicted_arrivals(
    lattice: Lattice,
    drive: DriveSpec,
    assess: AssessSpec,
    config: SweepConfig,
    *,
    t_max: float | None = None,
    floor_rel: float = 1e-4,
    threshold_rel: float = 5e-4,
) -> tuple[list[Arrival], list[OracleArrival], TimeResponse]:
    """Measurement-chain prediction of the solver's arrival list.

    Enumerates paths, synthesizes their exact response through the same
    window and transform the solver output passes through, and extracts
    peaks, so times and amplitudes compare like for like.  Returns the
    predicted arrivals, the enumerated (coalesced) oracle arrivals with
    per-path records, and the synthesized time response.
    """
    _check_specs(lattice, drive, assess)
    horizon = config.period if t_max is None else t_max
    attenuation = band_attenuation(config)
    drive_edge = lattice.edge(drive.edge)
    direct_tau = (
        drive_edge.loss_factor
        * abs(assess.position - drive.position)
        / drive_edge.speed
        if drive.edge == assess.edge
        else 0.0
    )
    direct_scale = 0.5 * abs(drive.amplitude) * float(attenuation(direct_tau)[0])
    floor = max(floor_rel * direct_scale, 1e-300)

    merged = enumerate_arrivals(
        lattice,
        drive,
        assess,
        horizon,
        floor,
        attenuation=attenuation,
        merge_tolerance=0.25 * config.dt,
    )
    paths = flatten_paths(merged)
    synthetic = synthesize_response(paths, config, drive_amplitude=drive.amplitude)
    waveform = to_time(synthetic, config)
    peaks = find_arrivals(waveform, threshold_rel) if paths else []
    return peaks, merged, waveform
