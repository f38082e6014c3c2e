import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import score_oracle
from sarafina.dataio import case_study
from sarafina.diagnostics import (
    DiagnosticsConfig,
    annotate,
    consistency,
    convergence_check,
    manipulation_flags,
    resiliency,
)
from sarafina.errors import DomainError, ValidationError
from sarafina.metric import score_series
from sarafina.model import (
    GapObservation,
    GapSeries,
    PolicyIntervention,
    ProjectionTrajectory,
    ScoreReport,
    ScoreRow,
)
from sarafina.projection import linear_projection

DERIVED_GAPS = [80.0, 78.0, 76.0]
DERIVED_PROJ = [80.0, 77.0, 74.0]


def derived():
    s = GapSeries(GapObservation.from_gap(i, g) for i, g in enumerate(DERIVED_GAPS))
    return s, PolicyIntervention("x", 0, 0.25), ProjectionTrajectory((0, 1, 2), tuple(DERIVED_PROJ))


def brazil():
    cs = case_study("brazil-case-study")
    proj = linear_projection(79.6, 0.25 * 79.6, 10, cs.series.years)
    return cs.series, cs.policy(), proj


def report_of(scores, start=2000):
    return ScoreReport([ScoreRow(start + i, 50.0, 50.0, 0.0, 0.0, 0.0, s) for i, s in enumerate(scores)])


def test_resiliency_zero_delta():
    res = resiliency(*brazil(), 0.0)
    assert set(res.per_year.values()) == {0.0}
    assert res.max_change == 0.0


def test_resiliency_null_policy_final_year():
    s = GapSeries(GapObservation.from_gap(i, 80.0) for i in range(3))
    proj = ProjectionTrajectory((0, 1, 2), (80.0, 80.0, 80.0))
    res = resiliency(s, PolicyIntervention("x", 0, 0.0), proj, 0.5)
    assert res.per_year[2] == 0.5
    assert res.per_year[0] == 0.0


def test_resiliency_matches_oracle_reruns():
    # frozen from tests/oracles.score_oracle with each gap shifted by +/-1
    expected = {0: 0.2451079622132255, 1: 0.1282051282051313, 2: 1.1298245614035096}
    res = resiliency(*derived(), 1.0)
    base = score_oracle(DERIVED_GAPS, DERIVED_PROJ, 0.25)[-1][2]
    for year, value in expected.items():
        reruns = []
        for d in (1.0, -1.0):
            g = list(DERIVED_GAPS)
            g[year] += d
            reruns.append(abs(score_oracle(g, DERIVED_PROJ, 0.25)[-1][2] - base))
        assert abs(max(reruns) - value) <= 1e-12
        assert abs(res.per_year[year] - value) <= 1e-12
    assert res.max_year == 2
    assert len(res.row_changes[1]) == 3


def test_resiliency_negative_delta():
    with pytest.raises(DomainError):
        resiliency(*derived(), -1.0)


def test_consistency_zero_sigma():
    cfg = DiagnosticsConfig(noise_sigma=0.0, trials=100, seed=1)
    out = consistency(*derived(), cfg)
    assert out.std == 0.0
    assert out.mean == out.noiseless


def test_consistency_deterministic():
    cfg = DiagnosticsConfig(trials=300, seed=42)
    a = consistency(*derived(), cfg)
    b = consistency(*derived(), cfg)
    assert a == b
    assert a.std > 0
    c = consistency(*derived(), DiagnosticsConfig(trials=300, seed=43))
    assert c.mean != a.mean


def test_consistency_central_limit_bound():
    cfg = DiagnosticsConfig(noise_sigma=0.5, trials=10_000, seed=2024)
    out = consistency(*derived(), cfg)
    assert abs(out.mean - out.noiseless) < 3 * out.std / math.sqrt(cfg.trials)


def test_config_validation():
    with pytest.raises(DomainError):
        DiagnosticsConfig(trials=50)
    with pytest.raises(DomainError):
        DiagnosticsConfig(seed=-1)
    with pytest.raises(DomainError):
        DiagnosticsConfig(convergence_window=0)


def test_manipulation_brazil_no_flags():
    rep = score_series(*brazil())
    assert manipulation_flags(rep, 1.0) == []


def test_manipulation_small_drift_no_flags():
    assert manipulation_flags(report_of([59.7 + 0.15 * i for i in range(10)]), 1.0) == []


def test_manipulation_constant_and_jump():
    assert manipulation_flags(report_of([60.0] * 5), 1.0) == []
    flags = manipulation_flags(report_of([60, 60.1, 65.1, 65.2]), 1.0)
    assert [(f.year, f.kind) for f in flags] == [(2002, "manipulation")]
    assert "5" in flags[0].message


def test_manipulation_too_few_rows():
    with pytest.raises(ValidationError):
        manipulation_flags(report_of([60.0]), 1.0)


@given(st.lists(st.floats(min_value=0, max_value=100), min_size=2, max_size=15),
       st.floats(min_value=0.01, max_value=10), st.floats(min_value=0, max_value=10))
def test_manipulation_monotone_in_threshold(scores, t, extra):
    lo = {f.year for f in manipulation_flags(report_of(scores), t)}
    hi = {f.year for f in manipulation_flags(report_of(scores), t + extra)}
    assert hi <= lo


def test_convergence_constant():
    out = convergence_check(report_of([61.3] * 6), 3, 0.25)
    assert out.converged and out.limiting_estimate == 61.3


@given(st.floats(min_value=0, max_value=100), st.integers(1, 10), st.integers(0, 10))
def test_convergence_constant_any_window(c, window, extra):
    out = convergence_check(report_of([c] * (window + 1 + extra)), window, 0.25)
    assert out.converged and out.limiting_estimate == c


def test_convergence_linear_increase():
    out = convergence_check(report_of([50 + 1.0 * i for i in range(8)]), 3, 0.25)
    assert not out.converged


def test_convergence_brazil_matches_running_mean_oracle():
    rep = score_series(*brazil())
    scores = rep.scores
    means = [sum(scores[: i + 1]) / (i + 1) for i in range(len(scores))]
    out = convergence_check(rep, 3, 0.25)
    assert out.limiting_estimate == pytest.approx(means[-1], abs=1e-12)
    assert out.converged == (abs(means[-1] - means[-4]) < 0.25)


def test_convergence_too_few_rows():
    with pytest.raises(ValidationError):
        convergence_check(report_of([1.0, 2.0]), 3, 0.25)


def test_annotate_adds_flags():
    rep = annotate(report_of([60, 60.1, 65.1, 65.2]), DiagnosticsConfig(convergence_window=3))
    kinds = [f.kind for f in rep.flags]
    assert kinds.count("manipulation") == 1
    assert "non-convergence" in kinds
