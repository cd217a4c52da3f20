"""Matching of solver arrival lists against oracle predictions.

A solver peak matches when an oracle arrival lies within the time
tolerance and the amplitudes agree within the relative tolerance (with
a small absolute floor, since discrepancies far below the peak-finding
threshold are immaterial).  Oracle arrivals with no solver counterpart
are reported for information but do not fail a comparison: the solver
list is the claim under test.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tdtransform import Arrival

DEFAULT_AMPLITUDE_TOLERANCE = 0.10


@dataclass(frozen=True)
class MatchedPair:
    solver: Arrival
    oracle: Arrival

    @property
    def time_delta(self) -> float:
        return self.solver.time - self.oracle.time

    @property
    def amplitude_delta(self) -> float:
        return self.solver.amplitude - self.oracle.amplitude


@dataclass(frozen=True)
class MatchReport:
    matched: tuple[MatchedPair, ...]
    unmatched_solver: tuple[Arrival, ...]
    amplitude_mismatches: tuple[MatchedPair, ...]
    unmatched_oracle: tuple[Arrival, ...]

    @property
    def ok(self) -> bool:
        return not self.unmatched_solver and not self.amplitude_mismatches

    def lines(self) -> list[str]:
        out = [
            f"matched {len(self.matched)} solver arrivals"
            f" ({len(self.unmatched_oracle)} oracle-only entries)"
        ]
        for a in self.unmatched_solver:
            out.append(
                f"UNMATCHED solver peak t={a.time:.6f} amplitude={a.amplitude:.6g}"
            )
        for pair in self.amplitude_mismatches:
            out.append(
                f"AMPLITUDE mismatch t={pair.solver.time:.6f}: solver "
                f"{pair.solver.amplitude:.6g} vs oracle {pair.oracle.amplitude:.6g}"
            )
        for a in self.unmatched_oracle:
            out.append(
                f"note: oracle-only arrival t={a.time:.6f} amplitude={a.amplitude:.6g}"
            )
        out.append("comparison OK" if self.ok else "comparison FAILED")
        return out


def match_arrivals(
    solver: list[Arrival],
    oracle: list[Arrival],
    time_tolerance: float,
    amplitude_tolerance: float = DEFAULT_AMPLITUDE_TOLERANCE,
    *,
    amplitude_floor: float = 0.0,
) -> MatchReport:
    """Match every solver arrival against the oracle list.

    Of the oracle arrivals inside the time tolerance, the one agreeing
    best in amplitude is taken (interference can split one blob into
    near-coincident peaks whose nearest-in-time pairing is arbitrary).
    """
    matched: list[MatchedPair] = []
    unmatched: list[Arrival] = []
    mismatched: list[MatchedPair] = []
    used: set[int] = set()

    for s in sorted(solver, key=lambda a: a.time):
        candidates = [
            (i, o) for i, o in enumerate(oracle) if abs(o.time - s.time) <= time_tolerance
        ]
        if not candidates:
            unmatched.append(s)
            continue
        best_i, best = min(
            candidates, key=lambda item: abs(s.amplitude - item[1].amplitude)
        )
        used.add(best_i)
        pair = MatchedPair(solver=s, oracle=best)
        limit = max(
            amplitude_tolerance * abs(pair.oracle.amplitude), amplitude_floor
        )
        if abs(pair.amplitude_delta) <= limit:
            matched.append(pair)
        else:
            mismatched.append(pair)

    leftovers = tuple(
        o for i, o in enumerate(oracle) if i not in used
    )
    return MatchReport(
        matched=tuple(matched),
        unmatched_solver=tuple(unmatched),
        amplitude_mismatches=tuple(mismatched),
        unmatched_oracle=leftovers,
    )
