import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwlab.instances import make_circle
from wwlab.lattice import (Lattice, LatticeVerificationError, build_lattice, cardinality_sweep,
                           verify_lattice)
from wwlab.mms import MetricMeasureSpace, doubling_estimate


def random_space(seed, n=60, dim=2):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, (n, dim))
    d = np.linalg.norm(x[:, None] - x[None], axis=-1)
    return MetricMeasureSpace(rng.uniform(0.5, 2, n), d)


@pytest.mark.parametrize("order", ["index_order", "random", "farthest_point"])
def test_circle_lattice_structure(order):
    s = make_circle(200).space
    lat = build_lattice(s, 0.3, order, seed=3)
    rep = verify_lattice(s, lat, doubling_estimate(s).D)
    assert rep.min_center_distance >= 0.3
    assert rep.max_cover_distance < 0.3
    assert rep.multiplicity <= 2


def test_index_order_is_deterministic_and_prefers_low_index():
    s = make_circle(100).space
    a = build_lattice(s, 0.5)
    b = build_lattice(s, 0.5)
    assert np.array_equal(a.centers, b.centers)
    assert a.centers[0] == 0


def test_farthest_point_ties_go_low():
    # four equidistant points: all ties, the first pick after 0 must be index 1
    d = np.ones((4, 4)) - np.eye(4)
    s = MetricMeasureSpace(np.ones(4), d)
    lat = build_lattice(s, 0.5, "farthest_point")
    assert lat.centers.tolist() == [0, 1, 2, 3]


def test_below_resolution_flag():
    s = make_circle(100).space
    assert build_lattice(s, 2 * s.resolution).below_resolution
    assert not build_lattice(s, 10 * s.resolution).below_resolution


def test_verification_names_clause():
    s = make_circle(100).space
    lat = build_lattice(s, 0.5)
    packed = Lattice(0.5, np.array([0, 1]), 2)
    with pytest.raises(LatticeVerificationError) as e:
        verify_lattice(s, packed, 1.0)
    assert e.value.clause == "disjoint half-balls"
    sparse = Lattice(0.5, lat.centers[:2], 1)
    with pytest.raises(LatticeVerificationError) as e:
        verify_lattice(s, sparse, 1.0)
    assert e.value.clause == "cover"
    wrong = Lattice(lat.rho, lat.centers, lat.multiplicity + 1)
    with pytest.raises(LatticeVerificationError) as e:
        verify_lattice(s, wrong, 1.0)
    assert e.value.clause == "multiplicity"
    with pytest.raises(LatticeVerificationError) as e:
        verify_lattice(s, lat, 0.0)
    assert e.value.clause == "multiplicity bound"


def test_sweep_bounds_and_determinism():
    s = make_circle(300).space
    a = cardinality_sweep(s, 0.2, trials=6, seed=1)
    b = cardinality_sweep(s, 0.2, trials=6, seed=1, threads=3)
    assert a.cardinalities == b.cardinalities
    assert a.min_card <= a.max_card
    assert len(a.lattices) == 8


def test_roundtrip_dict():
    s = make_circle(50).space
    lat = build_lattice(s, 0.4, "random", seed=9)
    back = Lattice.from_dict(lat.to_dict())
    assert np.array_equal(back.centers, lat.centers) and back.order == "random"


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.8), st.sampled_from(["index_order", "random", "farthest_point"]))
def test_lattice_always_valid(seed, rho, order):
    s = random_space(seed)
    lat = build_lattice(s, rho, order, seed=seed)
    rep = verify_lattice(s, lat, D=10.0)
    assert rep.cardinality == lat.cardinality


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_cardinality_monotone_in_rho_for_farthest(seed):
    s = random_space(seed, n=40)
    cards = [build_lattice(s, r, "farthest_point").cardinality for r in (0.8, 0.4, 0.2, 0.1)]
    # a 2r-separated set injects into any r-cover (each center has its own covering ball)
    assert all(a <= b for a, b in zip(cards, cards[1:]))
