"""Monotone non-increasing projected-gap trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, ValidationError
from .model import ProjectionTrajectory

MODELS = ("linear", "exponential")
DEFAULT_HORIZON = 10


@dataclass(frozen=True)
class ProjectionSpec:
    model: str = "linear"
    horizon_years: int = DEFAULT_HORIZON
    rate: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown projection model {self.model!r}; choose from {MODELS}")
        if self.horizon_years < 1:
            raise DomainError(f"horizon_years must be >= 1, got {self.horizon_years}")
        if self.model == "exponential" and (self.rate is None or not self.rate > 0):
            raise DomainError("exponential projection needs rate > 0")


def _check_inputs(baseline_gap: float, p_final_value: float, years: Sequence[int]) -> None:
    if not 0.0 < baseline_gap <= 100.0:
        raise DomainError(f"baseline_gap = {baseline_gap} outside (0, 100]")
    if not 0.0 <= p_final_value <= baseline_gap:
        raise DomainError(f"p_final = {p_final_value} outside [0, baseline_gap={baseline_gap}]")
    if not years:
        raise DomainError("projection needs at least one year")


def linear_projection(
    baseline_gap: float,
    p_final_value: float,
    horizon_years: int,
    years: Sequence[int],
) -> ProjectionTrajectory:
    """Straight-line decline reaching ``baseline - p_final`` at the horizon, flat after."""
    _check_inputs(baseline_gap, p_final_value, years)
    if horizon_years < 1:
        raise DomainError(f"horizon_years must be >= 1, got {horizon_years}")
    floor = baseline_gap - p_final_value
    values = []
    for k in range(len(years)):
        if k >= horizon_years:
            values.append(floor)
        else:
            values.append(baseline_gap - p_final_value * k / horizon_years)
    return ProjectionTrajectory(tuple(years), tuple(values))


def exponential_projection(
    baseline_gap: float,
    p_final_value: float,
    rate: float,
    years: Sequence[int],
) -> ProjectionTrajectory:
    """Asymptotic decay toward ``baseline - p_final`` with per-year constant ``rate``."""
    _check_inputs(baseline_gap, p_final_value, years)
    if not rate > 0:
        raise DomainError(f"rate must be > 0, got {rate}")
    floor = baseline_gap - p_final_value
    # floor + p_final can exceed baseline by one ulp; cap to keep the anchor exact
    values = [min(baseline_gap, floor + p_final_value * math.exp(-rate * k))
              for k in range(len(years))]
    values[0] = baseline_gap
    return ProjectionTrajectory(tuple(years), tuple(values))


def project(
    spec: ProjectionSpec,
    baseline_gap: float,
    p_final_value: float,
    years: Sequence[int],
) -> ProjectionTrajectory:
    if spec.model == "linear":
        return linear_projection(baseline_gap, p_final_value, spec.horizon_years, years)
    return exponential_projection(baseline_gap, p_final_value, spec.rate, years)


def validate_projection(
    trajectory: ProjectionTrajectory,
    baseline_gap: float,
    p_final_value: float,
    tol: float = 1e-9,
) -> ProjectionTrajectory:
    """Check anchoring, monotone decrease and the floor; name the first bad index."""
    values = trajectory.projected_gap
    if abs(values[0] - baseline_gap) > tol:
        raise ValidationError(
            f"index 0: projection starts at {values[0]}, expected baseline {baseline_gap}")
    floor = max(0.0, baseline_gap - p_final_value)
    for i, v in enumerate(values):
        if i > 0 and v > values[i - 1]:
            raise ValidationError(
                f"index {i}: projection rises from {values[i - 1]} to {v} (must be non-increasing)")
        if v < floor - tol:
            raise ValidationError(f"index {i}: value {v} below floor {floor}")
        if v > baseline_gap + tol:
            raise ValidationError(f"index {i}: value {v} above baseline {baseline_gap}")
    return trajectory
