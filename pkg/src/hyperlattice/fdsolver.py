"""Per-frequency assembly and solution of the network wave amplitudes.

Unknowns are the outgoing wave amplitudes ``a[e, end]`` departing each
node into edge ``e`` (measured at that end), ordered low then high for
every edge in id order.  A wave departing one end arrives at the far
end multiplied by the edge propagator; each node scatters the full set
of incoming amplitudes (reverberant arrivals plus the drive's direct
arrivals) into its outgoing ones.  Collecting terms:

    (I - S P) a = S s_arr

with ``P`` the propagate-to-far-end map, ``S`` the block-diagonal
junction scattering, and ``s_arr`` the two drive waves (half the drive
amplitude launched toward each end) propagated to their edge ends.

The field anywhere is the sum of the two counter-propagating outgoing
waves on that edge plus, on the drive edge, the direct source term.
Systems are small (2 x edge count), so a dense direct solve per
frequency is used, batched across frequency chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError
from .lattice import END_HIGH, END_LOW, Lattice, branch_impedances, opposite_end
from .scattering import junction_matrix

#: Maximum acceptable relative residual of a frequency solve.
RESIDUAL_LIMIT = 1e-10

_CHUNK = 256


@dataclass(frozen=True)
class DriveSpec:
    """Harmonic point drive strictly inside an edge, split half per direction."""

    edge: int
    position: float
    amplitude: float = 1.0


@dataclass(frozen=True)
class AssessSpec:
    """Observation point strictly inside an edge."""

    edge: int
    position: float


@dataclass(frozen=True)
class WaveState:
    """Solved outgoing amplitudes for one frequency.

    ``ordering[i]`` names the directed edge end of ``amplitudes[i]``.
    """

    omega: float
    amplitudes: np.ndarray
    ordering: tuple[tuple[int, str], ...]
    lattice: Lattice


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex field at the assess point on a uniform frequency grid."""

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.omegas) != len(self.values):
            raise ConfigurationError("omega grid and values differ in length")
        if len(self.omegas) < 2:
            raise ConfigurationError("frequency grid needs at least 2 bins")
        steps = np.diff(self.omegas)
        if steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ConfigurationError("frequency grid must be uniform and increasing")

    @property
    def delta_omega(self) -> float:
        return float(self.omegas[1] - self.omegas[0])


def _check_interior(lattice: Lattice, edge_id: int, position: float, what: str) -> None:
    try:
        edge = lattice.edge(edge_id)
    except KeyError as exc:
        raise ConfigurationError(f"{what} references unknown edge {edge_id}") from exc
    if not 0.0 < position < edge.length:
        raise ConfigurationError(
            f"{what} position {position} is not strictly inside edge "
            f"{edge_id} of length {edge.length}"
        )


class _Assembly:
    """Frequency-independent structure of the linear system for one lattice."""

    def __init__(self, lattice: Lattice):
        self.lattice = lattice
        self.edges = sorted(lattice.edges, key=lambda e: e.id)
        self.rank = {e.id: i for i, e in enumerate(self.edges)}
        self.lengths = np.array([e.length for e in self.edges])
        self.speeds = np.array([e.speed for e in self.edges])
        self.losses = np.array([e.loss_factor for e in self.edges])
        self.size = 2 * len(self.edges)

        self.ordering: tuple[tuple[int, str], ...] = tuple(
            (e.id, end) for e in self.edges for end in (END_LOW, END_HIGH)
        )
        self.index = {key: i for i, key in enumerate(self.ordering)}

        rows: list[int] = []
        cols: list[int] = []
        svals: list[float] = []
        col_edge: list[int] = []
        # Scattering response to a unit arrival at each directed edge end,
        # reused for the drive's direct arrivals.
        self.response: dict[tuple[int, str], tuple[np.ndarray, np.ndarray]] = {}

        for node in lattice.nodes:
            s = junction_matrix(node, branch_impedances(lattice, node)).matrix
            out_rows = np.array([self.index[port] for port in node.ports])
            for q, (eid, end) in enumerate(node.ports):
                self.response[(eid, end)] = (out_rows, s[:, q].copy())
                col = self.index[(eid, opposite_end(end))]
                for p in range(len(node.ports)):
                    rows.append(out_rows[p])
                    cols.append(col)
                    svals.append(s[p, q])
                    col_edge.append(self.rank[eid])

        self.rows = np.array(rows)
        self.cols = np.array(cols)
        self.svals = np.array(svals)
        self.col_edge = np.array(col_edge)

    def wavenumbers(self, omegas: np.ndarray) -> np.ndarray:
        """k per (frequency, edge)."""
        return (omegas[:, None] / self.speeds[None, :]) * (1.0 - 1j * self.losses[None, :])

    def matrices(self, omegas: np.ndarray) -> np.ndarray:
        """Stack of system matrices I - S P for each frequency."""
        k = self.wavenumbers(omegas)
        props = np.exp(-1j * k * self.lengths[None, :])
        a = np.zeros((len(omegas), self.size, self.size), dtype=complex)
        a[:, np.arange(self.size), np.arange(self.size)] = 1.0
        np.subtract.at(
            a,
            (
                np.arange(len(omegas))[:, None],
                self.rows[None, :],
                self.cols[None, :],
            ),
            self.svals[None, :] * props[:, self.col_edge],
        )
        return a

    def sources(self, omegas: np.ndarray, drive: DriveSpec) -> np.ndarray:
        """Right-hand sides S s_arr for each frequency."""
        edge = self.lattice.edge(drive.edge)
        k = omegas / edge.speed * (1.0 - 1j * edge.loss_factor)
        s = np.zeros((len(omegas), self.size), dtype=complex)
        for end, dist in (
            (END_LOW, drive.position),
            (END_HIGH, edge.length - drive.position),
        ):
            arrival = 0.5 * drive.amplitude * np.exp(-1j * k * dist)
            out_rows, svals = self.response[(drive.edge, end)]
            s[:, out_rows] += svals[None, :] * arrival[:, None]
        return s

    def solve(self, omegas: np.ndarray, drive: DriveSpec) -> np.ndarray:
        a = self.matrices(omegas)
        s = self.sources(omegas, drive)
        try:
            x = np.linalg.solve(a, s[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            bad = self._find_singular(a, omegas)
            raise NumericalError(
                f"singular system at omega={bad}; an exact resonance with zero "
                "loss cannot be solved, set loss_factor > 0"
            ) from exc
        residual = np.abs(np.einsum("wij,wj->wi", a, x) - s).max(axis=1)
        scale = np.maximum(np.abs(s).max(axis=1), 1e-300)
        worst = int(np.argmax(residual / scale))
        if residual[worst] / scale[worst] > RESIDUAL_LIMIT:
            hint = (
                "; an exact resonance with zero loss cannot be solved, set "
                "loss_factor > 0"
                if any(loss == 0.0 for loss in self.losses)
                else ""
            )
            raise NumericalError(
                f"solve residual {residual[worst] / scale[worst]:.3e} exceeds "
                f"{RESIDUAL_LIMIT} at omega={omegas[worst]}{hint}"
            )
        return x

    @staticmethod
    def _find_singular(a: np.ndarray, omegas: np.ndarray) -> float:
        for i in range(len(omegas)):
            if abs(np.linalg.det(a[i])) == 0.0:
                return float(omegas[i])
        return float(omegas[0])

    def field(
        self,
        omegas: np.ndarray,
        amplitudes: np.ndarray,
        drive: DriveSpec,
        assess: AssessSpec,
    ) -> np.ndarray:
        edge = self.lattice.edge(assess.edge)
        k = omegas / edge.speed * (1.0 - 1j * edge.loss_factor)
        u = assess.position
        low = self.index[(assess.edge, END_LOW)]
        high = self.index[(assess.edge, END_HIGH)]
        psi = amplitudes[:, low] * np.exp(-1j * k * u)
        psi += amplitudes[:, high] * np.exp(-1j * k * (edge.length - u))
        if assess.edge == drive.edge:
            psi += 0.5 * drive.amplitude * np.exp(-1j * k * abs(u - drive.position))
        return psi


def assemble(lattice: Lattice, omega: float) -> tuple[np.ndarray, tuple[tuple[int, str], ...]]:
    """System matrix I - S P at one frequency plus the unknown ordering."""
    if omega <= 0:
        raise NumericalError(
            f"omega={omega}: the zero-frequency system is singular; the "
            "response at omega = 0 is defined as 0"
        )
    asm = _Assembly(lattice)
    return asm.matrices(np.array([omega]))[0], asm.ordering


def solve_frequency(lattice: Lattice, drive: DriveSpec, omega: float) -> WaveState:
    """Solve the outgoing-amplitude system for one drive and frequency."""
    if omega <= 0:
        raise NumericalError(f"omega={omega}: must be positive; see assemble")
    _check_interior(lattice, drive.edge, drive.position, "drive")
    asm = _Assembly(lattice)
    x = asm.solve(np.array([omega]), drive)[0]
    return WaveState(omega=omega, amplitudes=x, ordering=asm.ordering, lattice=lattice)


def field_at(
    state: WaveState,
    lattice: Lattice,
    drive: DriveSpec,
    point: AssessSpec,
    omega: float,
) -> complex:
    """Complex field at a point, from a solved state."""
    if state.lattice is not lattice:
        raise ConfigurationError("wave state was solved for a different lattice")
    if state.omega != omega:
        raise ConfigurationError(
            f"wave state was solved at omega={state.omega}, not {omega}"
        )
    _check_interior(lattice, point.edge, point.position, "assess")
    asm = _Assembly(lattice)
    psi = asm.field(np.array([omega]), state.amplitudes[None, :], drive, point)
    return complex(psi[0])


def frequency_response(
    lattice: Lattice,
    drive: DriveSpec,
    assess: AssessSpec,
    omega_grid: np.ndarray,
    *,
    jobs: int = 1,
) -> FrequencyResponse:
    """Sweep the drive over a uniform frequency grid.

    The bin at omega = 0 is defined as 0.  Bins are independent, so the
    sweep is chunked and may be evaluated concurrently; results are
    identical for any chunk schedule or job count.
    """
    omegas = np.asarray(omega_grid, dtype=float)
    if len(omegas) and omegas[0] < 0:
        raise ConfigurationError("frequency grid must be nonnegative")
    _check_interior(lattice, drive.edge, drive.position, "drive")
    _check_interior(lattice, assess.edge, assess.position, "assess")

    values = np.zeros(len(omegas), dtype=complex)
    response = FrequencyResponse(omegas=omegas, values=values)  # validates grid

    asm = _Assembly(lattice)
    live = np.flatnonzero(omegas > 0)

    def run_chunk(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = asm.solve(omegas[idx], drive)
        return idx, asm.field(omegas[idx], x, drive, assess)

    chunks = [live[i : i + _CHUNK] for i in range(0, len(live), _CHUNK)]
    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for idx, psi in pool.map(run_chunk, chunks):
                values[idx] = psi
    else:
        for chunk in chunks:
            idx, psi = run_chunk(chunk)
            values[idx] = psi
    return response
