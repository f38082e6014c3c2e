"""Policy-adjusted gender asset gap scoring.

The score subtracts a regret-discounted policy impact from the observed
nominal gap, crediting an enacted policy before the nominal numbers move
and withdrawing that credit as observations diverge from the projection.
"""

__version__ = "0.1.0"

from .errors import (
    AlignmentError,
    ConfigError,
    DomainError,
    MissingYearError,
    SarafinaError,
    ValidationError,
)
from .metric import p_final, penalty, policy_impact, regret, sarafina_score, score_series
from .model import (
    GapObservation,
    GapSeries,
    ImprovementCategorySet,
    IndicatorVector,
    PolicyIntervention,
    ProjectionTrajectory,
    ScoreReport,
    TrainingRecord,
    gap_at,
    validate_series,
)
from .projection import (
    ProjectionSpec,
    exponential_projection,
    linear_projection,
    project,
    validate_projection,
)

__all__ = [
    "AlignmentError", "ConfigError", "DomainError", "MissingYearError", "SarafinaError",
    "ValidationError", "p_final", "penalty", "policy_impact", "regret", "sarafina_score",
    "score_series", "GapObservation", "GapSeries", "ImprovementCategorySet", "IndicatorVector",
    "PolicyIntervention", "ProjectionTrajectory", "ScoreReport", "TrainingRecord", "gap_at",
    "validate_series", "ProjectionSpec", "exponential_projection", "linear_projection", "project",
    "validate_projection",
]
