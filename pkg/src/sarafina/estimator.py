"""Categorical naive Bayes over binned proxy indicators.

Continuous indicators are discretised with per-indicator nearest-rank
quantile cuts, likelihoods are Laplace-smoothed counts, and the posterior
is accumulated in log space. The chosen improvement category is the
posterior argmax, ties resolved toward the smallest fraction.
"""

from __future__ import annotations

import bisect
import math
import random
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .metric import p_final
from .model import ImprovementCategorySet, IndicatorVector, TrainingRecord

DEFAULT_INDICATORS = (
    "gdp",
    "higher_education_gender_ratio",
    "birth_rate",
    "domestic_violence_investigation_ratio",
    "judicial_effectiveness",
)
DEFAULT_CATEGORIES = ImprovementCategorySet((0.02, 0.04, 0.06))
CORRELATION_WARN = 0.95


class CollinearIndicatorWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BinScheme:
    """Sorted cut points per indicator; bin index = number of cuts <= value."""

    cuts: tuple[tuple[str, tuple[float, ...]], ...]

    def __init__(self, cuts: Mapping[str, Sequence[float]]):
        items = []
        for name, cs in cuts.items():
            cs = tuple(float(c) for c in cs)
            if any(b <= a for a, b in zip(cs, cs[1:])):
                raise ValidationError(f"cut points for {name!r} must be strictly increasing")
            items.append((name, cs))
        object.__setattr__(self, "cuts", tuple(items))

    @property
    def indicators(self) -> list[str]:
        return [n for n, _ in self.cuts]

    def cuts_for(self, name: str) -> tuple[float, ...]:
        for n, cs in self.cuts:
            if n == name:
                return cs
        raise ValidationError(f"unknown indicator {name!r}; model knows {self.indicators}")

    def n_bins(self, name: str) -> int:
        return len(self.cuts_for(name)) + 1

    def bin_of(self, name: str, value: float) -> int:
        # values outside the training range land in the end bins
        return bisect.bisect_right(self.cuts_for(name), value)


def _nearest_rank_cuts(values: Sequence[float], n_bins: int) -> tuple[float, ...]:
    xs = sorted(values)
    n = len(xs)
    cuts = sorted({xs[(j * n) // n_bins] for j in range(1, n_bins)})
    # a cut at the minimum separates nothing
    return tuple(c for c in cuts if c > xs[0])


def build_bins(training: Sequence[TrainingRecord], bins_per_indicator: int = 3) -> BinScheme:
    if not training:
        raise ValidationError("cannot build bins from empty training data")
    if bins_per_indicator < 2:
        raise DomainError(f"bins_per_indicator must be >= 2, got {bins_per_indicator}")
    names = training[0].indicators.names()
    columns: dict[str, list[float]] = {n: [] for n in names}
    for i, rec in enumerate(training):
        vals = rec.indicators.as_dict()
        if set(vals) != set(names):
            raise ValidationError(f"record {i} has indicators {sorted(vals)}, expected {sorted(names)}")
        for n in names:
            columns[n].append(vals[n])
    return BinScheme({n: _nearest_rank_cuts(columns[n], bins_per_indicator) for n in names})


@dataclass(frozen=True)
class LikelihoodModel:
    categories: ImprovementCategorySet
    priors: tuple[float, ...]
    # likelihoods[indicator][category_index][bin]
    likelihoods: Mapping[str, tuple[tuple[float, ...], ...]]
    bins: BinScheme
    smoothing: float

    def likelihood(self, name: str, bin_index: int, category_index: int) -> float:
        return self.likelihoods[name][category_index][bin_index]


def _warn_collinear(names: Sequence[str], training: Sequence[TrainingRecord]) -> None:
    if len(names) < 2 or len(training) < 3:
        return
    X = np.array([[r.indicators.as_dict()[n] for n in names] for r in training], dtype=float)
    std = X.std(axis=0)
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            if std[a] == 0 or std[b] == 0:
                continue
            r = float(np.corrcoef(X[:, a], X[:, b])[0, 1])
            if abs(r) > CORRELATION_WARN:
                warnings.warn(
                    f"indicators {names[a]!r} and {names[b]!r} are strongly correlated "
                    f"(r = {r:.3f}); the factorised likelihood assumes independence",
                    CollinearIndicatorWarning, stacklevel=3)


def fit(
    training: Sequence[TrainingRecord],
    categories: ImprovementCategorySet,
    bins: BinScheme,
    smoothing: float = 1.0,
    uniform_priors: bool = False,
) -> LikelihoodModel:
    if not smoothing > 0:
        raise DomainError(f"smoothing must be > 0, got {smoothing}")
    if not training:
        raise ValidationError("cannot fit on empty training data")
    names = bins.indicators
    n_cat = len(categories)
    labels = []
    for i, rec in enumerate(training):
        c = categories.match(rec.realized_fraction)
        if c is None:
            raise ValidationError(
                f"record {i}: realized fraction {rec.realized_fraction} is not one of "
                f"the categories {list(categories)}")
        labels.append(categories.fractions.index(c))

    class_counts = [labels.count(j) for j in range(n_cat)]
    N = len(training)
    if uniform_priors:
        priors = tuple(1.0 / n_cat for _ in range(n_cat))
    else:
        priors = tuple((class_counts[j] + smoothing) / (N + smoothing * n_cat) for j in range(n_cat))

    likelihoods = {}
    for name in names:
        B = bins.n_bins(name)
        counts = [[0] * B for _ in range(n_cat)]
        for rec, j in zip(training, labels):
            vals = rec.indicators.as_dict()
            if name not in vals:
                raise ValidationError(f"training record lacks indicator {name!r}")
            counts[j][bins.bin_of(name, vals[name])] += 1
        likelihoods[name] = tuple(
            tuple((counts[j][b] + smoothing) / (class_counts[j] + smoothing * B) for b in range(B))
            for j in range(n_cat))

    _warn_collinear(names, training)
    return LikelihoodModel(categories, priors, likelihoods, bins, float(smoothing))


def _bin_indices(model: LikelihoodModel, indicators: IndicatorVector) -> dict[str, int]:
    vals = indicators.as_dict()
    known = set(model.bins.indicators)
    for name in vals:
        if name not in known:
            raise ValidationError(f"unknown indicator {name!r}; model knows {model.bins.indicators}")
    missing = known - set(vals)
    if missing:
        raise ValidationError(f"missing indicators {sorted(missing)}")
    return {n: model.bins.bin_of(n, vals[n]) for n in model.bins.indicators}


def log_scores(model: LikelihoodModel, indicators: IndicatorVector) -> list[float]:
    """Unnormalised log posterior per category."""
    idx = _bin_indices(model, indicators)
    out = []
    for j in range(len(model.categories)):
        s = math.log(model.priors[j])
        for name, b in idx.items():
            s += math.log(model.likelihood(name, b, j))
        out.append(s)
    return out


def _normalise_logs(logs: Sequence[float]) -> list[float]:
    m = max(logs)
    w = [math.exp(v - m) for v in logs]
    total = math.fsum(w)
    return [x / total for x in w]


def posterior(model: LikelihoodModel, indicators: IndicatorVector) -> dict[float, float]:
    probs = _normalise_logs(log_scores(model, indicators))
    return dict(zip(model.categories.fractions, probs))


def sequential_posterior(model: LikelihoodModel, indicators: IndicatorVector,
                         order: Sequence[str] | None = None) -> dict[float, float]:
    """Apply one indicator at a time, renormalising after each update."""
    idx = _bin_indices(model, indicators)
    probs = list(model.priors)
    for name in order or list(idx):
        b = idx[name]
        logs = [math.log(p) + math.log(model.likelihood(name, b, j)) for j, p in enumerate(probs)]
        probs = _normalise_logs(logs)
    return dict(zip(model.categories.fractions, probs))


def argmax_category(scores: Mapping[float, float]) -> float:
    """Category with the highest score; exact ties go to the smallest fraction."""
    best = None
    for cat in sorted(scores):
        if best is None or scores[cat] > scores[best]:
            best = cat
    if best is None:
        raise ValidationError("no categories to choose from")
    return best


def estimate_category(model: LikelihoodModel, indicators: IndicatorVector) -> float:
    return argmax_category(posterior(model, indicators))


def estimate_p_final(category: float, baseline_gap: float) -> float:
    if not 0.0 < category <= 1.0:
        raise DomainError(f"category {category} outside (0, 1]")
    return p_final(category, baseline_gap)


def synthetic_training(
    n: int,
    categories: ImprovementCategorySet = DEFAULT_CATEGORIES,
    indicators: Sequence[str] = DEFAULT_INDICATORS,
    seed: int = 0,
) -> list[TrainingRecord]:
    """Synthetic records with a known generating process, for tests and demos.

    Categories are drawn uniformly. For category index ``j`` each indicator
    ``i`` is ``N(mu_ij, 1)`` where ``mu_ij = j * (i + 1) / len(indicators)``
    for even ``i`` and 0 for odd ``i``; odd-indexed indicators therefore
    carry no signal.
    """
    rng = random.Random(seed)
    cats = list(categories)
    m = len(indicators)
    out = []
    for _ in range(n):
        j = rng.randrange(len(cats))
        vals = {}
        for i, name in enumerate(indicators):
            mu = j * (i + 1) / m if i % 2 == 0 else 0.0
            vals[name] = rng.gauss(mu, 1.0)
        out.append(TrainingRecord(IndicatorVector(vals), cats[j]))
    return out


def holdout_accuracy(
    records: Sequence[TrainingRecord],
    categories: ImprovementCategorySet,
    holdout_fraction: float = 0.25,
    bins_per_indicator: int = 3,
    smoothing: float = 1.0,
    seed: int = 0,
) -> float:
    """Fit on a shuffled split and report accuracy on the held-out part."""
    if not 0.0 < holdout_fraction < 1.0:
        raise DomainError(f"holdout_fraction must lie in (0, 1), got {holdout_fraction}")
    recs = list(records)
    random.Random(seed).shuffle(recs)
    n_test = max(1, int(round(len(recs) * holdout_fraction)))
    test, train = recs[:n_test], recs[n_test:]
    if not train:
        raise ValidationError("holdout leaves no training records")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CollinearIndicatorWarning)
        model = fit(train, categories, build_bins(train, bins_per_indicator), smoothing)
    hits = sum(estimate_category(model, r.indicators) == categories.match(r.realized_fraction)
               for r in test)
    return hits / len(test)
