"""Pulse propagation in hypercube lattices of connected 1-D waveguides."""

__version__ = "0.1.0"

from .errors import ConfigurationError, HyperlatticeError, NumericalError
from .fdsolver import (
    AssessSpec,
    DriveSpec,
    FrequencyResponse,
    WaveState,
    assemble,
    field_at,
    frequency_response,
    solve_frequency,
)
from .lattice import (
    Lattice,
    Node,
    UniformSampler,
    WaveguideEdge,
    edge_count,
    from_document,
    generate,
    override_parameters,
    to_document,
    validate,
)
from .oracle import (
    OracleArrival,
    RayPath,
    band_attenuation,
    enumerate_arrivals,
    first_connector_arrival,
    predicted_arrivals,
    synthesize_response,
)
from .scattering import (
    JunctionScattering,
    junction_matrix,
    load_impedance,
    propagator,
    wavenumber,
)
from .tdtransform import (
    Arrival,
    SweepConfig,
    TimeResponse,
    envelope,
    find_arrivals,
    to_time,
)
from .experiments import (
    Scenario,
    ScenarioResult,
    canonical_scenario,
    excess_response,
    in_vitro_variant,
    in_vivo_variant,
    run_scenario,
)
from .compare import MatchReport, match_arrivals

__all__ = [
    "__version__",
    "HyperlatticeError",
    "ConfigurationError",
    "NumericalError",
    "Lattice",
    "Node",
    "WaveguideEdge",
    "UniformSampler",
    "edge_count",
    "generate",
    "override_parameters",
    "validate",
    "to_document",
    "from_document",
    "wavenumber",
    "propagator",
    "load_impedance",
    "junction_matrix",
    "JunctionScattering",
    "DriveSpec",
    "AssessSpec",
    "WaveState",
    "FrequencyResponse",
    "assemble",
    "solve_frequency",
    "field_at",
    "frequency_response",
    "SweepConfig",
    "TimeResponse",
    "Arrival",
    "to_time",
    "envelope",
    "find_arrivals",
    "RayPath",
    "OracleArrival",
    "band_attenuation",
    "enumerate_arrivals",
    "first_connector_arrival",
    "predicted_arrivals",
    "synthesize_response",
    "Scenario",
    "ScenarioResult",
    "canonical_scenario",
    "in_vivo_variant",
    "in_vitro_variant",
    "excess_response",
    "run_scenario",
    "MatchReport",
    "match_arrivals",
]
