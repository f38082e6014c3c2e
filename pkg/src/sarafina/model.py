"""Domain types for gap series, policies, projections and score reports.

Every type here is a frozen dataclass. Construction is cheap and does not
enforce cross-field invariants; :func:`validate_series` and the validators in
:mod:`sarafina.projection` do that explicitly so errors can name the
offending year and field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import DomainError, MissingYearError, ValidationError

SHARE_SUM_TOL = 1e-6
GAP_TOL = 1e-9


@dataclass(frozen=True)
class GapObservation:
    """One year of gender asset ownership shares, in percent.

    ``gap`` is the nominal gap ``men_share - women_share`` in percentage
    points. ``synthetic`` marks rows produced by interpolation.
    """

    year: int
    men_share: float
    women_share: float
    gap: float
    synthetic: bool = False
    source: str | None = None
    sample_size: int | None = None

    @classmethod
    def from_shares(cls, year: int, men_share: float, women_share: float, **meta) -> GapObservation:
        return cls(int(year), float(men_share), float(women_share),
                   float(men_share) - float(women_share), **meta)

    @classmethod
    def from_gap(cls, year: int, gap: float, **meta) -> GapObservation:
        """Back-fill symmetric shares from a gap alone."""
        gap = float(gap)
        return cls(int(year), (100.0 + gap) / 2.0, (100.0 - gap) / 2.0, gap, **meta)


@dataclass(frozen=True)
class GapSeries:
    observations: tuple[GapObservation, ...]

    def __init__(self, observations: Iterable[GapObservation]):
        object.__setattr__(self, "observations", tuple(observations))

    def __len__(self) -> int:
        return len(self.observations)

    def __iter__(self):
        return iter(self.observations)

    @property
    def years(self) -> list[int]:
        return [o.year for o in self.observations]

    @property
    def gaps(self) -> list[float]:
        return [o.gap for o in self.observations]

    def span(self) -> tuple[int, int]:
        return self.observations[0].year, self.observations[-1].year

    def with_gaps(self, gaps: Mapping[int, float]) -> GapSeries:
        """Return a copy where the listed years carry new gaps (shares back-filled)."""
        out = []
        for o in self.observations:
            if o.year in gaps:
                g = float(gaps[o.year])
                o = replace(o, gap=g, men_share=(100.0 + g) / 2.0, women_share=(100.0 - g) / 2.0)
            out.append(o)
        return GapSeries(out)


@dataclass(frozen=True)
class PolicyIntervention:
    name: str
    enactment_year: int
    reduction_fraction: float
    horizon_years: int = 10

    def __post_init__(self):
        if not 0.0 <= self.reduction_fraction <= 1.0:
            raise DomainError(f"reduction_fraction must lie in [0, 1], got {self.reduction_fraction}")
        if self.horizon_years < 1:
            raise DomainError(f"horizon_years must be >= 1, got {self.horizon_years}")


@dataclass(frozen=True)
class ProjectionTrajectory:
    """Year-aligned projected nominal gap, starting at the enactment year."""

    years: tuple[int, ...]
    projected_gap: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        object.__setattr__(self, "projected_gap", tuple(float(p) for p in self.projected_gap))
        if len(self.years) != len(self.projected_gap):
            raise ValidationError(
                f"projection has {len(self.years)} years but {len(self.projected_gap)} values")
        if not self.years:
            raise ValidationError("projection is empty")
        if any(b - a != 1 for a, b in zip(self.years, self.years[1:])):
            raise ValidationError("projection years must be consecutive")

    @property
    def start_year(self) -> int:
        return self.years[0]

    def at(self, year: int) -> float:
        k = year - self.years[0]
        if not 0 <= k < len(self.years):
            raise MissingYearError(
                f"projection has no value for {year} (covers {self.years[0]}-{self.years[-1]})")
        return self.projected_gap[k]


@dataclass(frozen=True)
class ImprovementCategorySet:
    """Candidate fractional reductions, stored as fractions (0.02 == 2%)."""

    fractions: tuple[float, ...]

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        object.__setattr__(self, "fractions", fr)
        if not fr:
            raise ValidationError("category set is empty")
        for f in fr:
            if not 0.0 < f <= 1.0:
                raise ValidationError(f"category {f} outside (0, 1]")
        if any(b <= a for a, b in zip(fr, fr[1:])):
            raise ValidationError("categories must be distinct and strictly increasing")

    def __len__(self) -> int:
        return len(self.fractions)

    def __iter__(self):
        return iter(self.fractions)

    def match(self, value: float, tol: float = 1e-9) -> float | None:
        """Return the member equal to ``value`` within ``tol``, else None."""
        for f in self.fractions:
            if abs(f - value) <= tol:
                return f
        return None


@dataclass(frozen=True)
class IndicatorVector:
    values: tuple[tuple[str, float], ...]

    def __init__(self, values: Mapping[str, float] | Iterable[tuple[str, float]]):
        items = list(values.items()) if isinstance(values, Mapping) else list(values)
        names = [k for k, _ in items]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate indicator names in {names}")
        clean = []
        for k, v in items:
            v = float(v)
            if not math.isfinite(v):
                raise ValidationError(f"indicator {k!r} is not finite: {v}")
            clean.append((str(k), v))
        object.__setattr__(self, "values", tuple(clean))

    def names(self) -> list[str]:
        return [k for k, _ in self.values]

    def as_dict(self) -> dict[str, float]:
        return dict(self.values)


@dataclass(frozen=True)
class TrainingRecord:
    indicators: IndicatorVector
    realized_fraction: float

    def __post_init__(self):
        if not 0.0 < self.realized_fraction <= 1.0:
            raise ValidationError(f"realized_fraction {self.realized_fraction} outside (0, 1]")


@dataclass(frozen=True)
class ScoreRow:
    year: int
    observed_gap: float
    projected_gap: float
    regret: float
    penalty: float
    policy_impact: float
    sarafina_score: float


@dataclass(frozen=True)
class Flag:
    year: int
    kind: str
    message: str


@dataclass(frozen=True)
class ScoreReport:
    rows: tuple[ScoreRow, ...]
    flags: tuple[Flag, ...] = ()
    policy: PolicyIntervention | None = None
    p_final: float | None = None
    metadata: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def years(self) -> list[int]:
        return [r.year for r in self.rows]

    @property
    def scores(self) -> list[float]:
        return [r.sarafina_score for r in self.rows]

    def with_flags(self, flags: Iterable[Flag]) -> ScoreReport:
        return replace(self, flags=self.flags + tuple(flags))


def validate_observation(obs: GapObservation) -> GapObservation:
    y = obs.year
    for name in ("men_share", "women_share", "gap"):
        v = getattr(obs, name)
        if not math.isfinite(v):
            raise ValidationError(f"year {y}: {name} is not finite")
    for name in ("men_share", "women_share"):
        v = getattr(obs, name)
        if not 0.0 <= v <= 100.0:
            raise ValidationError(f"year {y}: {name} = {v} outside [0, 100]")
    total = obs.men_share + obs.women_share
    if abs(total - 100.0) > SHARE_SUM_TOL:
        raise ValidationError(f"year {y}: shares sum to {total:g}, expected 100")
    if abs(obs.gap - (obs.men_share - obs.women_share)) > GAP_TOL:
        raise ValidationError(
            f"year {y}: gap {obs.gap:g} != men_share - women_share = {obs.men_share - obs.women_share:g}")
    if not -100.0 <= obs.gap <= 100.0:
        raise ValidationError(f"year {y}: gap {obs.gap} outside [-100, 100]")
    return obs


def validate_series(series: GapSeries) -> GapSeries:
    """Check every observation invariant and strict year ordering.

    Returns the same series object; raises :class:`ValidationError` naming
    the first violation.
    """
    if not series.observations:
        raise ValidationError("series is empty")
    prev = None
    for obs in series.observations:
        validate_observation(obs)
        if prev is not None and obs.year <= prev:
            raise ValidationError(f"year {obs.year}: years must be strictly increasing (after {prev})")
        prev = obs.year
    return series


def gap_at(series: GapSeries, year: int) -> float:
    for obs in series.observations:
        if obs.year == year:
            return obs.gap
    if series.observations:
        lo, hi = series.span()
        avail = f"available years {lo}-{hi}: {series.years}"
    else:
        avail = "series is empty"
    raise MissingYearError(f"no observation for year {year}; {avail}")
