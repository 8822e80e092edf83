import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from edgecalc.circle import (SobolevPair, circle_symbol, family_derivative_sweep,
                             family_norm_sweep, make_circle_grid, operator_norm_circle,
                             order_reducing_family, quantize_circle, sobolev_norm_circle)
from edgecalc.symbolic import XI, X, japanese, lam_symbols

GRID = make_circle_grid(8)
LAM = [[2.0**k] for k in range(9)]


def unit(xi, grid=GRID):
    u = np.zeros(grid.size, dtype=complex)
    u[xi + grid.n_modes] = 1.0
    return u


def test_make_circle_grid():
    # [TRIVIAL] arithmetic from the definition
    g = make_circle_grid(8)
    assert g.n_points == 18
    assert list(g.modes) == list(range(-8, 9))
    g = make_circle_grid(1)
    assert g.n_points == 4 and list(g.modes) == [-1, 0, 1]
    with pytest.raises(ValueError, match="need at least one mode"):
        make_circle_grid(0)


def test_sobolev_norm_examples():
    # [TRIVIAL] single modes; [DERIVED] two-mode sum by hand
    assert sobolev_norm_circle(unit(0), 5.0) == 1.0
    assert sobolev_norm_circle(unit(3), 2.0) == pytest.approx(10.0)
    assert sobolev_norm_circle(unit(3) + unit(-3), 1.0) == pytest.approx(np.sqrt(20.0))


def test_coefficient_round_trip():
    rng = np.random.default_rng(1)
    c = rng.normal(size=GRID.size) + 1j * rng.normal(size=GRID.size)
    vals = GRID.from_coefficients(c)
    assert np.allclose(GRID.to_coefficients(vals), c, atol=1e-13)


def test_quantize_identity_and_multiplier():
    one = circle_symbol(sp.Integer(1), 0)
    assert np.array_equal(quantize_circle(one, [1.0], GRID).todense(), np.eye(GRID.size))
    R2 = quantize_circle(order_reducing_family(2), [2.0], GRID).todense()
    xi = GRID.modes
    assert np.allclose(R2, np.diag(1 + xi**2 + 4.0), rtol=1e-14)


def test_quantize_cosine_shift():
    # [DERIVED] cos x = (e^{ix} + e^{-ix}) / 2
    M = quantize_circle(circle_symbol(sp.cos(X), 0), [0.0], GRID).todense()
    expected = 0.5 * (np.eye(GRID.size, k=1) + np.eye(GRID.size, k=-1))
    assert np.allclose(M, expected, atol=1e-14)


def test_order_reducing_family_values():
    assert order_reducing_family(0).expr == 1
    p = order_reducing_family(2)
    assert p.eval(0.0, 1.0, np.array([2.0])) == pytest.approx(6.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 100))
def test_order_reduction_inverse(s, lam):
    P = quantize_circle(order_reducing_family(s), [lam], GRID).todense()
    Q = quantize_circle(order_reducing_family(-s), [lam], GRID).todense()
    assert np.max(np.abs(P @ Q - np.eye(GRID.size))) < 1e-12


def test_operator_norm_examples():
    I = np.eye(GRID.size)
    assert operator_norm_circle(I, SobolevPair(1.5, 1.5)) == pytest.approx(1.0)
    D = np.diag(np.sqrt(1 + GRID.modes**2.0))
    assert operator_norm_circle(D, SobolevPair(1, 0)) == pytest.approx(1.0)
    M = quantize_circle(order_reducing_family(-1), [3.0], GRID)
    assert operator_norm_circle(M, SobolevPair(0, 0)) == pytest.approx(10**-0.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 50))
def test_multiplier_norm_is_single_mode_maximum(order, s_in, s_out, lam):
    # the norm of a diagonal operator is attained on a single mode
    p = order_reducing_family(order)
    pair = SobolevPair(s_in, s_out)
    M = quantize_circle(p, [lam], GRID).todense()
    brute = max(sobolev_norm_circle(M @ unit(x), s_out) / sobolev_norm_circle(unit(x), s_in)
                for x in GRID.modes)
    assert operator_norm_circle(M, pair) == pytest.approx(brute, rel=1e-12)


def test_family_sweeps():
    # [DERIVED] closed-form diagonal norms (1 + lambda^2)^-1/2
    rep = family_norm_sweep(order_reducing_family(-1), SobolevPair(0, 0), LAM, GRID)
    assert rep.exponent == pytest.approx(-1.0, abs=0.1)
    assert np.allclose(rep.values, (1 + np.ravel(LAM) ** 2) ** -0.5)
    rep = family_norm_sweep(circle_symbol(sp.Integer(1), 0), SobolevPair(0, 0), LAM, GRID)
    assert np.all(rep.values == 1.0) and rep.exponent == pytest.approx(0.0, abs=1e-12)
    rep = family_norm_sweep(order_reducing_family(2), SobolevPair(2, 0), LAM, GRID)
    assert rep.exponent <= 2.1


def test_derivative_sweeps():
    # [DERIVED] d/dlam (1 + xi^2 + lam^2)^(s/2) = s lam (...)^(s/2 - 1)
    rep = family_derivative_sweep(order_reducing_family(-2), SobolevPair(0, 0), 0, LAM, GRID)
    lam = np.ravel(LAM)
    assert np.allclose(rep.values, 2 * lam / (1 + lam**2) ** 2)
    assert rep.exponent == pytest.approx(-3.0, abs=0.1)
    rep = family_derivative_sweep(order_reducing_family(-1), SobolevPair(0, 0), 0, LAM, GRID)
    assert rep.exponent == pytest.approx(-2.0, abs=0.1)
    rep = family_derivative_sweep(circle_symbol(sp.Integer(1), 0), SobolevPair(0, 0), 0, LAM, GRID)
    assert np.all(rep.values == 0.0) and rep.exponent == -np.inf


def test_sweep_needs_three_points():
    with pytest.raises(ValueError):
        family_norm_sweep(order_reducing_family(-1), SobolevPair(0, 0), [[1.0], [2.0]], GRID)


def test_parameter_length_checked():
    with pytest.raises(ValueError):
        quantize_circle(order_reducing_family(1), [1.0, 2.0], GRID)


def test_callable_symbol_derivatives_match_closed_form():
    # finite-difference oracle for callables against the sympy derivative
    fn = lambda x, xi, lam: (1 + xi**2 + lam**2) ** -0.5 * (1 + 0.3 * np.cos(x))
    p = circle_symbol(fn, -1)
    exact = circle_symbol((1 + 0.3 * sp.cos(X)) * japanese(XI, *lam_symbols(1)) ** -1, -1)
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 2 * np.pi, 100)
    xi = rng.uniform(-8, 8, 100)
    lam = rng.uniform(0, 20, (100, 1))
    for alpha in ([0, 1, 0], [0, 0, 1], [1, 0, 0], [0, 1, 1]):
        got = p.deriv(alpha, x, xi, lam)
        ref = exact.deriv(alpha, x, xi, lam)
        assert np.max(np.abs(got - ref) / (np.abs(ref) + 1e-3)) <= 1e-4


@pytest.mark.parametrize("order", [-2, -1, 0])
def test_nonpositive_orders_bounded_on_diagonal_pairs(order):
    rep = family_norm_sweep(order_reducing_family(order), SobolevPair(1, 1), LAM, GRID)
    assert rep.exponent <= order + 0.1
