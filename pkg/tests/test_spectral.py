import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwlab.instances import CircleSpectrum, IntervalSpectrum, TorusSpectrum, make_circle, make_interval
from wwlab.lattice import build_lattice
from wwlab.spectral import (CapabilityError, bernstein_check, counting, counting_many, decompose,
                            frame_bound, from_eigenvalues, operator_hash, pw_project, pw_space,
                            weyl_fit, young_split_holds)


def discrete_circle_oracle(n, length=2 * np.pi):
    h = length / n
    k = np.arange(n)
    return np.sort(4 / h ** 2 * np.sin(np.pi * k / n) ** 2)


def test_circle_spectrum_matches_closed_form(small_circle):
    np.testing.assert_allclose(small_circle.dec.eigenvalues, discrete_circle_oracle(64), atol=1e-9)


def test_interval_low_modes():
    dec = decompose(make_interval(400).operator)
    exact = IntervalSpectrum().eigenvalues(6)
    np.testing.assert_allclose(dec.eigenvalues[:6], exact, rtol=1e-3, atol=1e-9)


def test_eigenvectors_mu_orthonormal(small_circle):
    psi, mu = small_circle.dec.eigenvectors, small_circle.dec.measure
    np.testing.assert_allclose(psi.T @ (psi * mu[:, None]), np.eye(64), atol=1e-10)


def test_cap_enforced(small_circle):
    with pytest.raises(CapabilityError):
        decompose(small_circle.op, cap=10)


def test_counting_with_multiplicity():
    dec = from_eigenvalues([0, 1, 1, 4, 4, 9])
    assert counting(dec, 0.5) == 1
    assert counting(dec, 1) == 3
    assert counting(dec, 100) == 6
    assert counting_many(dec, [-1, 4]).tolist() == [0, 5]


def test_analytic_counting_oracles():
    assert CircleSpectrum().counting(10) == 2 * 3 + 1
    assert TorusSpectrum().counting(1) == 5
    assert TorusSpectrum().counting(2) == 9


def test_pw_projection_idempotent(small_circle, rng):
    f = rng.standard_normal(64)
    p = pw_project(small_circle.dec, 30, f)
    np.testing.assert_allclose(pw_project(small_circle.dec, 30, p), p, atol=1e-12)
    assert pw_space(small_circle.dec, 30).dimension == counting(small_circle.dec, 30)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_bernstein_bound_and_equality(small_circle, k):
    w = float(small_circle.dec.eigenvalues[20])
    b = bernstein_check(small_circle.dec, w, k)
    assert b.max_ratio <= 1 + 1e-10
    assert b.top_mode_ratio == pytest.approx(1.0, abs=1e-10)


def test_bernstein_trivial_space_raises():
    dec = from_eigenvalues([1.0, 2.0])
    with pytest.raises(CapabilityError):
        bernstein_check(dec, 0.5)


def test_frame_lower_bound_positive_for_cover_and_zero_when_undersampled(small_circle):
    s, dec = small_circle.space, small_circle.dec
    lat = build_lattice(s, 0.05)
    lo, hi = frame_bound(dec, 40.0, lat, s)
    assert 0 < lo <= hi
    lo2, _ = frame_bound(dec, 40.0, None, s, centers=[0, 10], rho=0.05)
    assert lo2 == 0.0


def test_weyl_fit_exact_power():
    om = np.geomspace(1, 1e4, 12)

    class Power:
        def counting(self, w):
            return w ** 0.75

    fit = weyl_fit(Power(), om)
    assert fit.slope == pytest.approx(0.75, abs=1e-12)
    with pytest.raises(ValueError):
        weyl_fit(Power(), [5.0, 5.0])


def test_operator_hash_stable_and_sensitive():
    a, b = make_circle(32).operator, make_circle(32).operator
    assert operator_hash(a) == operator_hash(b)
    assert operator_hash(a) != operator_hash(make_circle(33).operator)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
def test_young_split(a, b, alpha):
    assert young_split_holds(a, b, alpha)


@settings(max_examples=20, deadline=None)
@given(st.integers(8, 80))
def test_discrete_circle_property(n):
    dec = decompose(make_circle(n).operator)
    np.testing.assert_allclose(dec.eigenvalues, discrete_circle_oracle(n), rtol=1e-9, atol=1e-8)
