import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import linear_oracle
from sarafina.errors import DomainError, ValidationError
from sarafina.model import ProjectionTrajectory
from sarafina.projection import (
    ProjectionSpec,
    exponential_projection,
    linear_projection,
    project,
    validate_projection,
)


def test_linear_brazil_endpoint():
    t = linear_projection(79.6, 19.9, 10, list(range(2008, 2019)))
    assert t.at(2018) == pytest.approx(59.7, abs=1e-12)
    assert t.projected_gap[0] == 79.6


def test_linear_null_policy():
    t = linear_projection(79.6, 0, 10, list(range(2008, 2013)))
    assert set(t.projected_gap) == {79.6}


def test_linear_piecewise_example():
    t = linear_projection(80, 20, 4, list(range(0, 7)))
    assert list(t.projected_gap) == [80, 75, 70, 65, 60, 60, 60]


def test_exponential_examples():
    years = [0, 1, 2]
    assert exponential_projection(80, 20, 50, years).projected_gap[1] == pytest.approx(60, abs=1e-9)
    assert exponential_projection(80, 20, 0.5, years).projected_gap[0] == 80
    assert exponential_projection(80, 20, 0.5, years).projected_gap[2] == \
        pytest.approx(67.35758882342884, abs=1e-12)


@pytest.mark.parametrize("args", [(0, 0, 10), (80, 90, 10), (80, -1, 10), (80, 10, 0)])
def test_linear_domain(args):
    with pytest.raises(DomainError):
        linear_projection(*args, [0, 1])


def test_exponential_domain():
    with pytest.raises(DomainError):
        exponential_projection(80, 10, 0, [0, 1])


def test_validate_projection():
    ok = ProjectionTrajectory((0, 1, 2), (80, 75, 70))
    assert validate_projection(ok, 80, 20) is ok
    with pytest.raises(ValidationError, match="index 1"):
        validate_projection(ProjectionTrajectory((0, 1, 2), (80, 81, 70)), 80, 20)
    with pytest.raises(ValidationError, match="index 2"):
        validate_projection(ProjectionTrajectory((0, 1, 2), (80, 75, 55)), 80, 20)
    with pytest.raises(ValidationError, match="index 0"):
        validate_projection(ProjectionTrajectory((0, 1), (79, 75)), 80, 20)


def test_spec_validation():
    with pytest.raises(DomainError):
        ProjectionSpec(model="cubic")
    with pytest.raises(DomainError):
        ProjectionSpec(model="exponential")
    with pytest.raises(DomainError):
        ProjectionSpec(horizon_years=0)
    t = project(ProjectionSpec("exponential", rate=0.3), 60, 15, [0, 1, 2])
    assert t.projected_gap[1] == pytest.approx(45 + 15 * math.exp(-0.3))


baseline = st.floats(min_value=1e-3, max_value=100)
fraction = st.floats(min_value=0, max_value=1)


@given(baseline, fraction, st.integers(1, 30), st.integers(1, 40))
def test_linear_round_trip(b, c, h, n):
    pf = b * c
    t = linear_projection(b, pf, h, list(range(n)))
    validate_projection(t, b, pf)
    if n > h:
        assert abs(t.projected_gap[h] - (b - pf)) <= 1e-12
    expected = linear_oracle(b, pf, h, n)
    assert all(abs(x - y) <= 1e-12 for x, y in zip(t.projected_gap, expected))


@given(baseline, fraction, st.floats(min_value=1e-6, max_value=60), st.integers(1, 40))
def test_exponential_round_trip(b, c, rate, n):
    pf = b * c
    t = exponential_projection(b, pf, rate, list(range(n)))
    validate_projection(t, b, pf)
    floor = b - pf
    for k, v in enumerate(t.projected_gap):
        assert v - floor <= pf * math.exp(-rate * k) + 1e-12
