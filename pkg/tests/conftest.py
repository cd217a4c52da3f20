from __future__ import annotations

import numpy as np
import pytest

import hyperlattice as hl

# Arrival times for the unit 1-D system driven at 0.2 and assessed at
# 0.7 with pressure-release ends, frozen from hand enumeration of the
# bounce sequence: heading right crosses at 0.5, 1.1, 2.5, 3.1, 4.5 ...
# and heading left at 0.9, 1.5, 2.9, 3.5, 4.9 ...; the sign flips once
# per end reflection.
LINE_TIMES = (0.5, 0.9, 1.1, 1.5, 2.5, 2.9, 3.1)
LINE_SIGNS = (+1, -1, -1, +1, +1, -1, -1)

PAPER_2D_OVERRIDES = {2: {"density": 1.7}, 4: {"density": 1.8}}


@pytest.fixture(scope="session")
def paper_1d_scenario() -> hl.Scenario:
    return hl.canonical_scenario(1, seed=11)


@pytest.fixture(scope="session")
def paper_1d_total(paper_1d_scenario) -> hl.ScenarioResult:
    return hl.run_scenario(paper_1d_scenario)["total"]


@pytest.fixture(scope="session")
def paper_2d_scenario() -> hl.Scenario:
    return hl.canonical_scenario(2, seed=22, overrides=PAPER_2D_OVERRIDES)


def nearest_arrival(arrivals, time: float) -> hl.Arrival:
    return min(arrivals, key=lambda a: abs(a.time - time))


def image_series_field(omega: float, *, eta: float = 0.003, xp: float = 0.2,
                       xa: float = 0.7, tol: float = 1e-14) -> complex:
    """Reference field for the unit 1-D system with R = -1 ends.

    Sums the mirror images of the source: copies at xp + 2n arrive with
    an even number of reflections (positive), copies at -xp + 2n with an
    odd number (negative).  Truncated when terms fall below ``tol``.
    """
    k = omega * (1.0 - 1j * eta)
    total = 0j
    for origin, sign in ((xp, +0.5), (-xp, -0.5)):
        for n in range(-2000, 2001):
            d = abs(xa - (origin + 2.0 * n))
            term = sign * np.exp(-1j * k * d)
            if abs(term) > tol:
                total += term
    return complex(total)
