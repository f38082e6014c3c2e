"""Regret, cumulative relative-regret penalty, policy impact and score.

The penalty at ``n`` years after enactment is the running mean

    phi(n) = (1/n) * sum_{k=1..n} clamp(|g[k] - p[k]| / g[k], 0, 1)

where ``g`` is the observed gap and ``p`` the projected gap. The enactment
year itself contributes no term, so ``phi = 0`` there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AlignmentError, DomainError
from .model import (
    GapSeries,
    PolicyIntervention,
    ProjectionTrajectory,
    ScoreReport,
    ScoreRow,
    gap_at,
)


def _check_percent(value: float, label: str) -> None:
    if not (0.0 <= value <= 100.0):
        raise DomainError(f"{label} = {value} outside [0, 100]")


def regret(observed_gap: float, projected_gap: float) -> float:
    _check_percent(observed_gap, "observed_gap")
    _check_percent(projected_gap, "projected_gap")
    return abs(observed_gap - projected_gap)


def relative_regret(observed_gap: float, projected_gap: float) -> float:
    """One penalty term: regret over the observed gap, clamped to [0, 1].

    A closed gap (``observed_gap == 0``) yields 0 if the projection also
    predicted closure, otherwise the maximal term 1.
    """
    r = regret(observed_gap, projected_gap)
    if observed_gap == 0.0:
        return 0.0 if r == 0.0 else 1.0
    return min(1.0, max(0.0, r / observed_gap))


@dataclass(frozen=True)
class PenaltyState:
    """Accumulated relative-regret terms; ``current_penalty`` is their mean."""

    terms: tuple[float, ...] = ()

    @property
    def current_penalty(self) -> float:
        if not self.terms:
            return 0.0
        return math.fsum(self.terms) / len(self.terms)

    def step(self, observed_gap: float, projected_gap: float) -> PenaltyState:
        return PenaltyState(self.terms + (relative_regret(observed_gap, projected_gap),))


def _require_positive_gap(gap: float, year: int) -> None:
    # zero is handled by the closed-gap rule in relative_regret
    if gap < 0.0:
        raise DomainError(f"year {year}: observed gap {gap} is negative; scoring needs a gap to close")


def penalty_state(series: GapSeries, projection: ProjectionTrajectory, upto_year: int) -> PenaltyState:
    start = projection.start_year
    if upto_year < start:
        raise DomainError(f"upto_year {upto_year} precedes enactment year {start}")
    if upto_year > projection.years[-1]:
        raise AlignmentError(
            f"projection covers {start}-{projection.years[-1]} but penalty requested up to {upto_year}")
    state = PenaltyState()
    for year in range(start + 1, upto_year + 1):
        g = gap_at(series, year)
        _require_positive_gap(g, year)
        state = state.step(g, projection.at(year))
    return state


def penalty(series: GapSeries, projection: ProjectionTrajectory, upto_year: int) -> float:
    return penalty_state(series, projection, upto_year).current_penalty


def p_final(reduction_fraction: float, baseline_gap: float) -> float:
    """Projected final reduction in percentage points."""
    if not 0.0 <= reduction_fraction <= 1.0:
        raise DomainError(f"reduction_fraction = {reduction_fraction} outside [0, 1]")
    if not 0.0 < baseline_gap <= 100.0:
        raise DomainError(f"baseline_gap = {baseline_gap} outside (0, 100]")
    return reduction_fraction * baseline_gap


def policy_impact(p_final_value: float, penalty_value: float) -> float:
    if not 0.0 <= penalty_value <= 1.0:
        raise DomainError(f"penalty = {penalty_value} outside [0, 1]")
    if p_final_value < 0.0:
        raise DomainError(f"p_final = {p_final_value} is negative")
    return p_final_value * (1.0 - penalty_value)


def sarafina_score(observed_gap: float, policy_impact_value: float) -> float:
    if policy_impact_value < 0.0:
        raise DomainError(f"policy impact {policy_impact_value} is negative")
    if policy_impact_value > observed_gap:
        raise DomainError(
            f"policy impact {policy_impact_value} exceeds observed gap {observed_gap}; "
            "a score cannot credit more than closing the gap")
    return observed_gap - policy_impact_value


def score_series(
    series: GapSeries,
    policy: PolicyIntervention,
    projection: ProjectionTrajectory,
) -> ScoreReport:
    """Score every year from enactment through the last observation.

    The projection must start at ``policy.enactment_year`` and cover every
    scored year. Missing observation years raise; interpolate first if the
    data is sparse.
    """
    start = policy.enactment_year
    if projection.start_year != start:
        raise AlignmentError(
            f"projection starts at {projection.start_year}, policy enacted in {start}")
    end = series.observations[-1].year
    if end < start:
        raise AlignmentError(f"series ends in {end}, before enactment year {start}")
    if projection.years[-1] < end:
        raise AlignmentError(
            f"projection ends in {projection.years[-1]} but observations run to {end}")

    gaps = {o.year: o.gap for o in series}
    baseline = gaps[start] if start in gaps else gap_at(series, start)
    _require_positive_gap(baseline, start)
    pf = p_final(policy.reduction_fraction, baseline)

    rows = []
    state = PenaltyState()
    for year in range(start, end + 1):
        g = gaps[year] if year in gaps else gap_at(series, year)
        _require_positive_gap(g, year)
        p = projection.at(year)
        if year > start:
            state = state.step(g, p)
        phi = state.current_penalty
        impact = policy_impact(pf, phi)
        rows.append(ScoreRow(
            year=year,
            observed_gap=g,
            projected_gap=p,
            regret=regret(g, p),
            penalty=phi,
            policy_impact=impact,
            sarafina_score=sarafina_score(g, impact),
        ))
    return ScoreReport(rows=rows, policy=policy, p_final=pf)
