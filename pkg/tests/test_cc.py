import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwlab.cc import ball_box_cost, cc_distance_matrix, frame


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def test_frame_is_tangent_and_bracket_direction():
    x = np.array([unit([0.3, -0.5, 0.8])])
    f = frame(x)[0]
    np.testing.assert_allclose(f @ x[0], 0, atol=1e-15)


def test_horizontal_step_costs_its_length():
    # at the north pole Y1 and Y2 span the tangent plane
    a = np.array([[0, 0, 1.0]])
    b = np.array([unit([0.01, 0, 1])])
    c = ball_box_cost(a, b)[0]
    assert c == pytest.approx(np.linalg.norm(b - a), rel=1e-3)


def test_vertical_step_on_equator_costs_square_root():
    a = np.array([[1.0, 0, 0]])
    b = np.array([[np.cos(0.01), np.sin(0.01), 0]])
    assert ball_box_cost(a, b)[0] == pytest.approx(0.1, rel=1e-2)


def test_antipodal_infinite():
    assert np.isinf(ball_box_cost(np.array([[0, 0, 1.0]]), np.array([[0, 0, -1.0]]))[0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_cost_symmetric_and_nonnegative(v):
    a, b = np.array(v[:3]), np.array(v[3:])
    if np.linalg.norm(a) < 1e-3 or np.linalg.norm(b) < 1e-3 or np.linalg.norm(unit(a) + unit(b)) < 1e-3:
        return
    a, b = unit(a)[None], unit(b)[None]
    ab, ba = ball_box_cost(a, b)[0], ball_box_cost(b, a)[0]
    assert ab >= 0 and ab == pytest.approx(ba, rel=1e-6, abs=1e-9)


def test_path_metric_triangle():
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((120, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    d = cc_distance_matrix(pts, edge_radius=0.8)
    assert np.allclose(d, d.T) and np.all(np.diag(d) == 0)
    assert np.all(d[:, :, None] <= d[:, None, :] + d.T[None, :, :] + 1e-9)
