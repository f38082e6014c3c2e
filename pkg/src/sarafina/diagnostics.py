"""Score-quality diagnostics: resiliency, consistency, manipulation, convergence.

Monte Carlo draws use numpy's PCG64 generator. Each replicate gets its own
child stream spawned from ``SeedSequence(seed)``, so replicate ``i`` sees the
same noise regardless of how many replicates run or in what order.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, ValidationError
from .metric import score_series
from .model import Flag, GapSeries, PolicyIntervention, ProjectionTrajectory, ScoreReport

MIN_GAP = 1e-9


@dataclass(frozen=True)
class DiagnosticsConfig:
    perturbation_delta: float = 1.0
    noise_sigma: float = 0.5
    trials: int = 1000
    seed: int = 0
    manipulation_threshold: float = 1.0
    convergence_window: int = 3
    convergence_tol: float = 0.25

    def __post_init__(self):
        if self.perturbation_delta < 0 or self.noise_sigma < 0:
            raise DomainError("perturbation_delta and noise_sigma must be >= 0")
        if self.trials < 100:
            raise DomainError(f"trials must be >= 100, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.manipulation_threshold <= 0 or self.convergence_tol <= 0:
            raise DomainError("manipulation_threshold and convergence_tol must be > 0")
        if self.convergence_window < 1:
            raise DomainError(f"convergence_window must be >= 1, got {self.convergence_window}")


def _clamp_gap(g: float) -> float:
    return min(100.0, max(MIN_GAP, g))


@dataclass(frozen=True)
class ResiliencyResult:
    delta: float
    per_year: dict[int, float]
    max_change: float
    max_year: int | None
    # perturbed year -> per-row max |score change|, for verbose output
    row_changes: dict[int, tuple[float, ...]] = field(default_factory=dict)


def resiliency(
    series: GapSeries,
    policy: PolicyIntervention,
    projection: ProjectionTrajectory,
    delta: float,
) -> ResiliencyResult:
    """Final-year score sensitivity to a +/-delta shift of one observation at a time."""
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    base = score_series(series, policy, projection)
    base_scores = base.scores
    per_year, row_changes = {}, {}
    for obs in series:
        if obs.year < policy.enactment_year:
            continue
        rows = [0.0] * len(base_scores)
        for sign in (1.0, -1.0):
            g = obs.gap if delta == 0 else _clamp_gap(obs.gap + sign * delta)
            run = score_series(series.with_gaps({obs.year: g}), policy, projection)
            rows = [max(m, abs(a - b)) for m, a, b in zip(rows, run.scores, base_scores)]
        per_year[obs.year] = rows[-1]
        row_changes[obs.year] = tuple(rows)
    max_year = max(per_year, key=lambda y: (per_year[y], -y)) if per_year else None
    return ResiliencyResult(delta, per_year, per_year.get(max_year, 0.0), max_year, row_changes)


@dataclass(frozen=True)
class ConsistencyResult:
    mean: float
    std: float
    noiseless: float
    trials: int
    seed: int
    sigma: float


def consistency(
    series: GapSeries,
    policy: PolicyIntervention,
    projection: ProjectionTrajectory,
    config: DiagnosticsConfig,
) -> ConsistencyResult:
    """Monte Carlo spread of the final-year score under Gaussian gap noise."""
    noiseless = score_series(series, policy, projection).scores[-1]
    years = series.years
    children = np.random.SeedSequence(config.seed).spawn(config.trials)
    finals = []
    for child in children:
        noise = np.random.Generator(np.random.PCG64(child)).standard_normal(len(years))
        noisy = {y: _clamp_gap(o.gap + config.noise_sigma * float(e))
                 for y, o, e in zip(years, series, noise)}
        finals.append(score_series(series.with_gaps(noisy), policy, projection).scores[-1])
    # exact rational arithmetic: identical samples give std == 0 exactly
    return ConsistencyResult(
        mean=float(statistics.mean(finals)),
        std=float(statistics.stdev(finals)),
        noiseless=noiseless,
        trials=config.trials,
        seed=config.seed,
        sigma=config.noise_sigma,
    )


def manipulation_flags(report: ScoreReport, threshold: float = 1.0) -> list[Flag]:
    """Flag every year whose score rises by more than ``threshold`` points."""
    rows = report.rows
    if len(rows) < 2:
        raise ValidationError("manipulation check needs at least two report rows")
    flags = []
    for prev, cur in zip(rows, rows[1:]):
        jump = cur.sarafina_score - prev.sarafina_score
        if jump > threshold:
            flags.append(Flag(cur.year, "manipulation",
                              f"score rose {jump:.4g} points from {prev.year} to {cur.year} "
                              f"(threshold {threshold:g}); check the policy impact estimate"))
    return flags


@dataclass(frozen=True)
class ConvergenceResult:
    converged: bool
    limiting_estimate: float
    running_means: tuple[float, ...]
    change: float


def running_means(values) -> list[float]:
    # exact prefix sums, one rounding per mean: a constant series maps to itself
    out, total = [], Fraction(0)
    for i, v in enumerate(values, start=1):
        total += Fraction(v)
        out.append(float(total / i))
    return out


def convergence_check(report: ScoreReport, window: int = 3, tol: float = 0.25) -> ConvergenceResult:
    """Converged iff the running mean moved by less than ``tol`` over the last ``window`` years."""
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    scores = report.scores
    if len(scores) < window + 1:
        raise ValidationError(f"convergence check needs at least {window + 1} rows, got {len(scores)}")
    means = running_means(scores)
    change = abs(means[-1] - means[-1 - window])
    return ConvergenceResult(change < tol, means[-1], tuple(means), change)


def annotate(report: ScoreReport, config: DiagnosticsConfig) -> ScoreReport:
    """Attach manipulation and convergence flags to a report."""
    flags = []
    if len(report.rows) >= 2:
        flags += manipulation_flags(report, config.manipulation_threshold)
    if len(report.rows) >= config.convergence_window + 1:
        conv = convergence_check(report, config.convergence_window, config.convergence_tol)
        if not conv.converged:
            flags.append(Flag(report.rows[-1].year, "non-convergence",
                              f"running mean moved {conv.change:.4g} points over the last "
                              f"{config.convergence_window} years (tolerance {config.convergence_tol:g})"))
    return report.with_flags(flags)
