import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgecalc.cutoffs import bracket, bracket_deriv, excision_profile, smooth_step


def test_bracket_equals_abs_outside_transition():
    # [PAPER] "[r]=|r| for |r|>R"
    assert bracket(5.0) == 5.0
    r = np.linspace(2.0, 40.0, 200)
    assert np.array_equal(bracket(r), r)
    assert np.array_equal(bracket(-r), r)


def test_bracket_at_origin():
    # [DERIVED] beta(0) = 1 so [0] = sqrt(1 + 0)
    assert bracket(0.0) == pytest.approx(1.0, abs=1e-15)


def test_bracket_negative_argument():
    # [TRIVIAL] evenness and the |r| regime
    assert bracket(-5.0) == 5.0
    assert bracket_deriv(-5.0, 1) == -1.0
    assert bracket_deriv(5.0, 2) == 0.0


def test_bracket_lower_bound_on_transition():
    r = np.linspace(-2, 2, 2001)
    assert bracket(r).min() >= 0.5


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_bracket_derivatives_match_finite_differences(k):
    # [DERIVED] centered differences of the (k-1)-th derivative
    r = np.linspace(-3, 3, 61) + 0.013
    h = 1e-5
    fd = (bracket_deriv(r + h, k - 1) - bracket_deriv(r - h, k - 1)) / (2 * h)
    scale = 1 + np.abs(bracket_deriv(r, k))
    assert np.max(np.abs(fd - bracket_deriv(r, k)) / scale) < 1e-6


def test_smooth_step_limits():
    assert smooth_step(0.0) == 0.0
    assert smooth_step(1.0) == 1.0
    assert smooth_step(0.5) == pytest.approx(0.5)


def test_excision_profile_regions():
    u = np.linspace(0, 0.25, 50)
    assert np.all(excision_profile(u) == 0.0)
    u = np.linspace(1, 10, 50)
    assert np.all(excision_profile(u) == 1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50, allow_nan=False))
def test_bracket_even_positive_and_above_abs(r):
    b = bracket(r)
    assert b > 0
    assert b == bracket(-r)
    assert b >= min(abs(r), 1.0) - 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 4, allow_nan=False))
def test_excision_profile_monotone(u):
    assert 0.0 <= excision_profile(u) <= excision_profile(u + 0.01) <= 1.0
