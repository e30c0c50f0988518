import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwlab.mms import (MetricMeasureSpace, ValidationError, ball, ball_volumes, check_ball_comparisons,
                       doubling_estimate, triangle_violation, validate_space)


def line_space(n, spacing=1.0):
    x = np.arange(n) * spacing
    return MetricMeasureSpace(np.ones(n), np.abs(x[:, None] - x[None, :]), label="line")


def test_balls_are_open():
    s = line_space(5)
    b = ball(s, 2, 1.0)
    assert b.members.tolist() == [2]
    assert ball(s, 2, 1.0 + 1e-12).members.tolist() == [1, 2, 3]
    assert b.volume == 1.0


def test_ball_volumes_shape_and_values():
    s = line_space(6)
    v = ball_volumes(s, [0.5, 1.5, 10])
    assert v.shape == (6, 3)
    assert v[:, 0].tolist() == [1] * 6
    assert v[0, 1] == 2 and v[3, 1] == 3
    assert np.all(v[:, 2] == 6)


def test_resolution_and_diameter():
    s = line_space(4, 0.5)
    assert s.diameter == pytest.approx(1.5)
    assert s.min_positive_distance == pytest.approx(0.5)
    assert s.resolution == pytest.approx(0.5)


@pytest.mark.parametrize("bad", [np.array([1.0, 0.0]), np.array([1.0, -2.0]), np.array([1.0, np.nan])])
def test_nonpositive_measure_rejected(bad):
    with pytest.raises(ValidationError):
        MetricMeasureSpace(bad, np.zeros((2, 2)))


def test_validation_names_the_defect():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    with pytest.raises(ValidationError, match="triangle"):
        validate_space(MetricMeasureSpace(np.ones(3), d), full=True)
    d2 = np.array([[0, 1], [2, 0]], dtype=float)
    with pytest.raises(ValidationError, match="asymmetric"):
        validate_space(MetricMeasureSpace(np.ones(2), d2))
    d3 = np.array([[0.1, 1], [1, 0]], dtype=float)
    with pytest.raises(ValidationError, match="not zero"):
        validate_space(MetricMeasureSpace(np.ones(2), d3))


def test_triangle_violation_full_finds_witness():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    i, j, k = triangle_violation(MetricMeasureSpace(np.ones(3), d), full=True)
    assert (i, j, k) in {(0, 1, 2), (2, 1, 0)}


def test_doubling_uniform_line_near_one():
    s = line_space(400, 0.01)
    est = doubling_estimate(s)
    assert 0.9 <= est.D <= 1.6


def test_single_point_space():
    s = MetricMeasureSpace(np.array([2.0]), np.zeros((1, 1)))
    assert s.diameter == 0
    assert doubling_estimate(s).D == 0.0
    assert ball(s, 0, 1.0).volume == 2.0


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10_000))
def test_ball_comparisons_hold_with_measured_D(n, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 1, n))
    s = MetricMeasureSpace(rng.uniform(0.5, 2.0, n), np.abs(x[:, None] - x[None, :]))
    D = doubling_estimate(s, np.geomspace(1e-4, 2, 40)).D
    rep = check_ball_comparisons(s, D, samples=500, radius_range=(1e-4, 1.0), seed=seed)
    assert rep.violations_1a == 0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=30, unique=True))
def test_ball_monotone_in_radius(xs):
    x = np.array(xs)
    s = MetricMeasureSpace(np.ones(x.size), np.abs(x[:, None] - x[None, :]))
    v = ball_volumes(s, np.linspace(0.01, 11, 12))
    assert np.all(np.diff(v, axis=1) >= 0)
    assert np.all(v[:, -1] == x.size)
