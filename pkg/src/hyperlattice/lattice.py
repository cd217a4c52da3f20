"""Hypercube-skeleton lattices of connected 1-D waveguides.

A lattice of dimension N+1 is built from the dimension-N lattice by
copying it (the *image*) and joining every original vertex to its copy
with a fresh *connector* edge.  Edge counts follow the recurrence
``n_{N+1} = 2 n_N + 2^N`` with ``n_1 = 1``; vertex counts are ``2^N``.

Edge 1 is the reference system: its length, speed and density are fixed
at 1 and every other edge is drawn from samplers normalized to those
unit values.  All lattice values are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import ConfigurationError

ROLE_GENERATOR = "generator"
ROLE_IMAGE = "image"
ROLE_CONNECTOR = "connector"
ROLES = (ROLE_GENERATOR, ROLE_IMAGE, ROLE_CONNECTOR)

END_LOW = "low"
END_HIGH = "high"
ENDS = (END_LOW, END_HIGH)

#: Default loss factor applied to every generated edge.
DEFAULT_LOSS_FACTOR = 0.003

#: Default minimum separation between edge round-trip times (see generate).
DEFAULT_ROUNDTRIP_SEPARATION = 0.02

_RESAMPLE_ATTEMPTS = 200


def opposite_end(end: str) -> str:
    return END_HIGH if end == END_LOW else END_LOW


@dataclass(frozen=True)
class UniformSampler:
    """Uniform distribution on [low, high], used for lengths and impedances."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not (0.0 < self.low <= self.high):
            raise ConfigurationError(
                f"sampler bounds must satisfy 0 < low <= high, got [{self.low}, {self.high}]"
            )

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))


DEFAULT_LENGTH_SAMPLER = UniformSampler(0.7, 1.3)
DEFAULT_IMPEDANCE_SAMPLER = UniformSampler(0.7, 1.3)


@dataclass(frozen=True)
class WaveguideEdge:
    """One 1-D wave-bearing system.

    The characteristic impedance is always the derived product
    ``density * speed`` and is never stored separately.
    """

    id: int
    length: float
    speed: float
    density: float
    loss_factor: float
    role: str
    level: int

    def __post_init__(self) -> None:
        if self.length <= 0 or self.speed <= 0 or self.density <= 0:
            raise ConfigurationError(
                f"edge {self.id}: length, speed and density must be positive"
            )
        if self.loss_factor < 0:
            raise ConfigurationError(f"edge {self.id}: loss factor must be >= 0")
        if self.role not in ROLES:
            raise ConfigurationError(f"edge {self.id}: unknown role {self.role!r}")

    @property
    def impedance(self) -> float:
        """Characteristic wave impedance z = rho * c."""
        return self.density * self.speed

    @property
    def travel_time(self) -> float:
        return self.length / self.speed


@dataclass(frozen=True)
class Node:
    """A junction: the ordered ports it joins plus an optional lumped load.

    ``termination_admittance`` is stored as an admittance so both a
    pressure-release termination (zero impedance, infinite admittance)
    and the absence of a load (zero admittance) are plain numbers;
    ``math.inf`` encodes the pressure-release case.
    """

    id: int
    ports: tuple[tuple[int, str], ...]
    termination_admittance: float = 0.0

    def __post_init__(self) -> None:
        if not self.ports:
            raise ConfigurationError(f"node {self.id}: ports must be nonempty")
        if self.termination_admittance < 0:
            raise ConfigurationError(f"node {self.id}: admittance must be >= 0")

    @property
    def degree(self) -> int:
        return len(self.ports)


@dataclass(frozen=True)
class Lattice:
    """A full connected-waveguide structure plus its generation provenance."""

    dimension: int
    edges: tuple[WaveguideEdge, ...]
    nodes: tuple[Node, ...]
    seed: int

    def edge(self, edge_id: int) -> WaveguideEdge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(f"no edge with id {edge_id}")

    def node(self, node_id: int) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(f"no node with id {node_id}")

    def node_of(self, edge_id: int, end: str) -> Node:
        """The unique node holding the given edge end."""
        for n in self.nodes:
            if (edge_id, end) in n.ports:
                return n
        raise KeyError(f"edge end ({edge_id}, {end}) is attached to no node")

    def edges_at_level(self, level: int, role: str | None = None) -> list[WaveguideEdge]:
        return [
            e
            for e in self.edges
            if e.level == level and (role is None or e.role == role)
        ]


def edge_count(dimension: int) -> int:
    """Number of 1-D systems in the dimension-N lattice.

    Follows n_{N+1} = 2 n_N + 2^N with n_1 = 1, so 1, 4, 12, 32, 80, ...
    """
    if dimension < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
    n = 1
    for step in range(1, dimension):
        n = 2 * n + 2**step
    return n


def _sample_length(
    rng: np.random.Generator,
    sampler: UniformSampler,
    taken_roundtrips: list[float],
    speed: float,
    separation: float,
) -> float:
    """Draw a length whose round-trip time avoids existing ones.

    Keeps pulse arrival times unambiguous.  If the requested separation
    cannot be met the requirement is relaxed by halving, so generation
    always terminates (dense dimensions exhaust the available slots).
    """
    sep = separation
    while True:
        for _ in range(_RESAMPLE_ATTEMPTS):
            length = sampler.draw(rng)
            rt = 2.0 * length / speed
            if all(abs(rt - other) >= sep for other in taken_roundtrips):
                taken_roundtrips.append(rt)
                return length
        sep *= 0.5
        if sep < 1e-12:
            length = sampler.draw(rng)
            taken_roundtrips.append(2.0 * length / speed)
            return length


def generate(
    dimension: int,
    length_sampler: UniformSampler | None = None,
    impedance_sampler: UniformSampler | None = None,
    seed: int = 0,
    *,
    loss_factor: float = DEFAULT_LOSS_FACTOR,
    roundtrip_separation: float = DEFAULT_ROUNDTRIP_SEPARATION,
) -> Lattice:
    """Generate the dimension-N lattice with randomized lengths and impedances.

    Edge 1 keeps unit length, speed and density.  New edges created by
    the step to dimension d+1 are tagged ``image`` (the translated copy)
    or ``connector`` (vertex-to-image joins) at level d+1.  Identical
    arguments always produce an identical lattice.

    Edge ids follow the conventional drawing of the structures: the
    two-dimensional square is numbered 1 (generator), 2 (connector at
    the high end), 3 (image), 4 (connector at the low end); later steps
    number the image copy next and the connectors last.
    """
    if dimension < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
    length_sampler = length_sampler or DEFAULT_LENGTH_SAMPLER
    impedance_sampler = impedance_sampler or DEFAULT_IMPEDANCE_SAMPLER
    if loss_factor < 0:
        raise ConfigurationError("loss_factor must be >= 0")

    rng = np.random.default_rng(seed)
    speed = 1.0

    # Mutable drafts: edge id -> [length, density, role, level, low_node, high_node]
    edges: dict[int, list] = {
        1: [1.0, 1.0, ROLE_GENERATOR, 1, 0, 1],
    }
    node_count = 2
    roundtrips = [2.0]

    for step in range(1, dimension):
        n_edges = len(edges)
        new_dim = step + 1

        if step == 1:
            image_ids = {1: 3}
            connector_ids = {1: 2, 0: 4}  # figure numbering: 2 right, 4 left
        else:
            image_ids = {eid: eid + n_edges for eid in edges}
            connector_ids = {
                v: 2 * n_edges + 1 + v for v in range(node_count)
            }

        new_edges: dict[int, list] = {}
        for eid in sorted(edges):
            length, density, _, _, low, high = edges[eid]
            new_edges[image_ids[eid]] = [
                None,
                None,
                ROLE_IMAGE,
                new_dim,
                low + node_count,
                high + node_count,
            ]
        for v in range(node_count):
            new_edges[connector_ids[v]] = [
                None,
                None,
                ROLE_CONNECTOR,
                new_dim,
                v,
                v + node_count,
            ]

        for eid in sorted(new_edges):
            draft = new_edges[eid]
            draft[0] = _sample_length(
                rng, length_sampler, roundtrips, speed, roundtrip_separation
            )
            draft[1] = impedance_sampler.draw(rng) / speed

        edges.update(new_edges)
        node_count *= 2

    ports: dict[int, list[tuple[int, str]]] = {v: [] for v in range(node_count)}
    for eid in sorted(edges):
        _, _, _, _, low, high = edges[eid]
        ports[low].append((eid, END_LOW))
        ports[high].append((eid, END_HIGH))

    # A 1-D system terminates in pressure-release ends (zero impedance,
    # infinite admittance); interior hypercube vertices carry no load.
    termination = math.inf if dimension == 1 else 0.0

    edge_objs = tuple(
        WaveguideEdge(
            id=eid,
            length=edges[eid][0],
            speed=speed,
            density=edges[eid][1],
            loss_factor=loss_factor,
            role=edges[eid][2],
            level=edges[eid][3],
        )
        for eid in sorted(edges)
    )
    node_objs = tuple(
        Node(id=v, ports=tuple(ports[v]), termination_admittance=termination)
        for v in range(node_count)
    )
    return Lattice(dimension=dimension, edges=edge_objs, nodes=node_objs, seed=seed)


def override_parameters(
    lattice: Lattice,
    assignments: Mapping[int, Mapping[str, float]],
) -> Lattice:
    """Return a copy of the lattice with per-edge parameter substitutions.

    Allowed keys per edge: length, density, speed, loss_factor.  The
    topology (nodes, ports) is unchanged.
    """
    allowed = {"length", "density", "speed", "loss_factor"}
    by_id = {e.id: e for e in lattice.edges}
    for eid, fields in assignments.items():
        if eid not in by_id:
            raise ConfigurationError(f"override references unknown edge id {eid}")
        for key, value in fields.items():
            if key not in allowed:
                raise ConfigurationError(f"edge {eid}: unknown parameter {key!r}")
            if key == "loss_factor":
                if value < 0:
                    raise ConfigurationError(f"edge {eid}: loss_factor must be >= 0")
            elif value <= 0:
                raise ConfigurationError(f"edge {eid}: {key} must be positive")

    new_edges = tuple(
        replace(e, **dict(assignments[e.id])) if e.id in assignments else e
        for e in lattice.edges
    )
    return replace(lattice, edges=new_edges)


def _connected_and_bipartite(lattice: Lattice) -> tuple[bool, bool]:
    adjacency: dict[int, list[int]] = {n.id: [] for n in lattice.nodes}
    attachment: dict[tuple[int, str], int] = {}
    for n in lattice.nodes:
        for port in n.ports:
            attachment[port] = n.id
    for e in lattice.edges:
        low = attachment.get((e.id, END_LOW))
        high = attachment.get((e.id, END_HIGH))
        if low is None or high is None:
            continue
        adjacency[low].append(high)
        adjacency[high].append(low)

    start = lattice.nodes[0].id
    color = {start: 0}
    queue = [start]
    bipartite = True
    while queue:
        v = queue.pop()
        for w in adjacency[v]:
            if w not in color:
                color[w] = color[v] ^ 1
                queue.append(w)
            elif color[w] == color[v]:
                bipartite = False
    connected = len(color) == len(lattice.nodes)
    return connected, bipartite


def validate(lattice: Lattice) -> list[str]:
    """Check every structural invariant; return one message per violation.

    An empty list means the lattice is a well-formed hypercube skeleton
    of its declared dimension.  Violations are data, not errors.
    """
    violations: list[str] = []
    n = lattice.dimension
    if n < 1:
        return [f"dimension {n} is not >= 1"]

    edge_ids = [e.id for e in lattice.edges]
    if len(set(edge_ids)) != len(edge_ids):
        violations.append("duplicate edge ids")
    node_ids = [v.id for v in lattice.nodes]
    if len(set(node_ids)) != len(node_ids):
        violations.append("duplicate node ids")

    expected_edges = edge_count(n)
    if len(lattice.edges) != expected_edges:
        violations.append(
            f"edge count {len(lattice.edges)} != {expected_edges} required "
            f"for dimension {n} (recurrence n_(N+1) = 2 n_N + 2^N)"
        )
    if len(lattice.nodes) != 2**n:
        violations.append(f"node count {len(lattice.nodes)} != 2^{n}")

    seen: dict[tuple[int, str], int] = {}
    known_edges = set(edge_ids)
    for v in lattice.nodes:
        for port in v.ports:
            eid, end = port
            if eid not in known_edges:
                violations.append(f"node {v.id}: port references unknown edge {eid}")
            if end not in ENDS:
                violations.append(f"node {v.id}: port end {end!r} invalid")
            if port in seen:
                violations.append(
                    f"edge end ({eid}, {end}) attached to nodes {seen[port]} and {v.id}"
                )
            seen[port] = v.id
    for e in lattice.edges:
        for end in ENDS:
            if (e.id, end) not in seen:
                violations.append(f"edge end ({e.id}, {end}) is dangling")

    if n >= 2:
        for v in lattice.nodes:
            if v.degree != n:
                violations.append(f"node {v.id}: degree {v.degree} != {n}")
    else:
        for v in lattice.nodes:
            if v.degree != 1:
                violations.append(f"node {v.id}: degree {v.degree} != 1")
            if not math.isinf(v.termination_admittance):
                violations.append(
                    f"node {v.id}: a 1-D system end must be pressure-release "
                    "(infinite termination admittance)"
                )

    if not violations:
        connected, bipartite = _connected_and_bipartite(lattice)
        if not connected:
            violations.append("lattice graph is not connected")
        if not bipartite:
            violations.append("lattice graph is not bipartite")

    if n >= 2 and not violations:
        top_images = len(lattice.edges_at_level(n, ROLE_IMAGE))
        top_connectors = len(lattice.edges_at_level(n, ROLE_CONNECTOR))
        earlier = sum(1 for e in lattice.edges if e.level < n)
        n_prev = edge_count(n - 1)
        if top_images != n_prev:
            violations.append(f"level-{n} image count {top_images} != {n_prev}")
        if top_connectors != 2 ** (n - 1):
            violations.append(
                f"level-{n} connector count {top_connectors} != {2 ** (n - 1)}"
            )
        if earlier != n_prev:
            violations.append(f"generator edge count {earlier} != {n_prev}")

    return violations


# ---------------------------------------------------------------------------
# Serialization (schema documented in the cli module)


def to_document(lattice: Lattice) -> dict:
    """Plain-dict form of a lattice; round-trips losslessly through JSON."""
    return {
        "dimension": lattice.dimension,
        "seed": lattice.seed,
        "edges": [
            {
                "id": e.id,
                "length": e.length,
                "speed": e.speed,
                "density": e.density,
                "loss_factor": e.loss_factor,
                "role": e.role,
                "level": e.level,
            }
            for e in lattice.edges
        ],
        "nodes": [
            {
                "id": v.id,
                "ports": [[eid, end] for eid, end in v.ports],
                "termination_admittance": (
                    "infinite"
                    if math.isinf(v.termination_admittance)
                    else v.termination_admittance
                ),
            }
            for v in lattice.nodes
        ],
    }


def from_document(document: Mapping) -> Lattice:
    """Rebuild a lattice from its document form.

    Arbitrary connected-waveguide graphs are accepted here even when
    they are not hypercube skeletons; ``validate`` reports how far such
    a structure deviates from the generated family.
    """
    try:
        edges = tuple(
            WaveguideEdge(
                id=int(e["id"]),
                length=float(e["length"]),
                speed=float(e["speed"]),
                density=float(e["density"]),
                loss_factor=float(e["loss_factor"]),
                role=str(e["role"]),
                level=int(e["level"]),
            )
            for e in document["edges"]
        )
        nodes = tuple(
            Node(
                id=int(v["id"]),
                ports=tuple((int(eid), str(end)) for eid, end in v["ports"]),
                termination_admittance=(
                    math.inf
                    if v["termination_admittance"] == "infinite"
                    else float(v["termination_admittance"])
                ),
            )
            for v in document["nodes"]
        )
        return Lattice(
            dimension=int(document["dimension"]),
            edges=edges,
            nodes=nodes,
            seed=int(document["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed lattice document: {exc}") from exc


def branch_impedances(lattice: Lattice, node: Node) -> list[float]:
    """Characteristic impedances of the edges at each of a node's ports."""
    by_id = {e.id: e for e in lattice.edges}
    return [by_id[eid].impedance for eid, _ in node.ports]
