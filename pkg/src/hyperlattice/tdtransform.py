"""Pulse-train synthesis from a frequency sweep, and arrival extraction.

The sampled band [0, M*delta_omega) is mirrored into a Hermitian
length-2M spectrum and inverse transformed, giving a real time series
on [0, T) with T = 2 pi / delta_omega and step dt = T / (2M).  Values
are scaled by 1/dt so that a flat unit spectrum under the rectangular
window synthesizes a unit-area pulse at t = 0.

The default raised-cosine window tapers the band at both edges
(W_m = sin^2(pi m / M)).  The high-edge taper suppresses truncation
sidelobes; the low-edge taper removes near-DC content whose decay times
exceed the analysis window and would otherwise fold back as a baseline.

Arrivals are local maxima of the analytic-signal envelope, refined by
three-point parabolic interpolation; the reported amplitude is the
signed response at the peak sample so that reflection-induced sign
flips stay observable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks, hilbert, peak_prominences

from .errors import ConfigurationError

WINDOW_RECTANGULAR = "rectangular"
WINDOW_RAISED_COSINE = "raised_cosine"
WINDOWS = (WINDOW_RECTANGULAR, WINDOW_RAISED_COSINE)

DEFAULT_DELTA_OMEGA = 2.0 * np.pi / 10.0
DEFAULT_BINS = 4096


@dataclass(frozen=True)
class SweepConfig:
    """Frequency grid and window for a sweep and its time-domain partner.

    The time window T = 2 pi / delta_omega must exceed the largest
    arrival of interest and dt = T / (2 bins) must resolve the closest
    expected peak pair.
    """

    delta_omega: float = DEFAULT_DELTA_OMEGA
    bins: int = DEFAULT_BINS
    window: str = WINDOW_RAISED_COSINE

    def __post_init__(self) -> None:
        if self.delta_omega <= 0:
            raise ConfigurationError("delta_omega must be positive")
        if self.bins < 2:
            raise ConfigurationError("bins must be >= 2")
        if self.window not in WINDOWS:
            raise ConfigurationError(f"unknown window {self.window!r}")

    @property
    def period(self) -> float:
        """Time window T = 2 pi / delta_omega."""
        return 2.0 * np.pi / self.delta_omega

    @property
    def dt(self) -> float:
        return self.period / (2 * self.bins)

    def omega_grid(self) -> np.ndarray:
        return np.arange(self.bins) * self.delta_omega

    def window_weights(self) -> np.ndarray:
        if self.window == WINDOW_RECTANGULAR:
            return np.ones(self.bins)
        m = np.arange(self.bins)
        return np.sin(np.pi * m / self.bins) ** 2


@dataclass(frozen=True)
class TimeResponse:
    """Real pulse train on the uniform grid 0 .. T - dt."""

    t_grid: np.ndarray
    values: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])


@dataclass(frozen=True)
class Arrival:
    """One extracted pulse: refined time, signed amplitude, prominence."""

    time: float
    amplitude: float
    prominence: float


def hermitian_spectrum(values: np.ndarray, config: SweepConfig) -> np.ndarray:
    """Windowed length-2M spectrum with conjugate-mirrored negative bins."""
    weighted = config.window_weights() * values
    spectrum = np.zeros(2 * config.bins, dtype=complex)
    spectrum[: config.bins] = weighted
    spectrum[config.bins] = 0.0
    spectrum[config.bins + 1 :] = np.conj(weighted[1:][::-1])
    return spectrum


def to_time(response, config: SweepConfig) -> TimeResponse:
    """Inverse transform of a frequency response onto the time grid.

    The response grid must match the sweep config exactly.  The result
    is real by construction (imaginary residue at rounding level).
    """
    omegas = np.asarray(response.omegas, dtype=float)
    if len(omegas) != config.bins or not np.allclose(
        omegas, config.omega_grid(), rtol=1e-12, atol=1e-12
    ):
        raise ConfigurationError("response grid does not match the sweep config")
    spectrum = hermitian_spectrum(np.asarray(response.values, dtype=complex), config)
    series = np.fft.ifft(spectrum)
    values = series.real / config.dt
    t_grid = np.arange(2 * config.bins) * config.dt
    return TimeResponse(t_grid=t_grid, values=values)


def envelope(tr: TimeResponse) -> np.ndarray:
    """Magnitude of the analytic signal (negative frequencies removed)."""
    return np.abs(hilbert(tr.values))


def _parabolic_offset(left: float, center: float, right: float) -> float:
    denom = left - 2.0 * center + right
    if denom == 0.0:
        return 0.0
    offset = 0.5 * (left - right) / denom
    return float(np.clip(offset, -0.5, 0.5))


def find_arrivals(tr: TimeResponse, relative_threshold: float) -> list[Arrival]:
    """Envelope peaks above a fraction of the global envelope maximum.

    Lowering the threshold never removes an arrival, only appends ones.
    """
    if not 0.0 < relative_threshold < 1.0:
        raise ConfigurationError("relative_threshold must be in (0, 1)")
    env = envelope(tr)
    peak_floor = relative_threshold * env.max()
    if peak_floor <= 0.0:
        return []
    indices, _ = find_peaks(env, height=peak_floor)
    if len(indices) == 0:
        return []
    prominences = peak_prominences(env, indices)[0]
    arrivals = []
    for i, prom in zip(indices, prominences):
        offset = _parabolic_offset(env[i - 1], env[i], env[i + 1])
        time = (i + offset) * tr.dt
        sample = int(round(i + offset))
        arrivals.append(
            Arrival(time=float(time), amplitude=float(tr.values[sample]), prominence=float(prom))
        )
    return arrivals


def pulse_value(
    config: SweepConfig,
    offsets: np.ndarray,
    taus: np.ndarray,
) -> np.ndarray:
    """Synthesized response of unit arrivals at given time offsets.

    Element i is the value, at ``offsets[i]`` away from its arrival
    time, of a unit-amplitude pulse whose per-frequency decay is
    ``exp(-omega * taus[i])`` — the same windowed band-limited shape the
    transform produces.  ``pulse_value(config, 0, tau)`` is the peak a
    unit arrival with loss-time ``tau`` reaches in a time response.

    The zero-frequency bin is excluded, matching a sweep whose DC value
    is pinned to 0.
    """
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    omegas = config.omega_grid()[1:]
    weights = config.window_weights()[1:]
    with np.errstate(under="ignore"):
        terms = weights[None, :] * np.exp(
            omegas[None, :] * (1j * offsets[:, None] - taus[:, None])
        )
    return 2.0 * terms.real.sum(axis=1) / (2 * config.bins * config.dt)
