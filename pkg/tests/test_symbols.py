import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from edgecalc.calculus import leibniz_terms
from edgecalc.cutoffs import bracket
from edgecalc.symbolic import RHO, XI, R, eta_symbols, japanese
from edgecalc.symbols import (AsymptoticSumPlan, EdgeSymbol, OracleDepthError, SampleSpec,
                              asymptotic_sum, bracket_power, edge_deriv, edge_multiply,
                              elliptic_model, get_symbol, make_edge_symbol, seminorm_check,
                              symbol_ids)

ETA = eta_symbols(1)[0]


def test_make_edge_symbol_examples():
    p = make_edge_symbol(japanese(XI, RHO, ETA) ** 2, 2, 0)
    assert (p.mu, p.nu) == (2.0, 0.0)
    # a(r, rho, eta) = a~(r, [r] rho, [r] eta)
    r, rho, eta, xi = 5.0, 0.3, 0.7, 2.0
    assert p.eval(r, rho, eta, xi) == pytest.approx(1 + xi**2 + (5 * rho) ** 2 + (5 * eta) ** 2)
    w = edge_multiply(bracket_power(1.5), p)
    assert (w.mu, w.nu) == (2.0, 1.5)
    one = make_edge_symbol(1, 0, 0)
    assert np.all(one.eval(np.linspace(-3, 3, 7), 1.0, 2.0, 0.0) == 1.0)


def test_callable_symbol_and_depth():
    fn = lambda r, rt, et, xi, x: (1 + xi**2 + rt**2 + et**2) ** -0.5
    a = make_edge_symbol(fn, -1, 0)
    assert a.depth == 6
    ref = elliptic_model(-1)
    r = np.array([0.0, 1.5, 3.0])
    assert np.allclose(a.eval(r, 0.4, 2.0, 1.0), ref.eval(r, 0.4, 2.0, 1.0), rtol=1e-13)
    d = edge_deriv(a, 0, 1)
    assert np.allclose(d.eval(r, 0.4, 2.0, 1.0), edge_deriv(ref, 0, 1).eval(r, 0.4, 2.0, 1.0),
                       rtol=1e-5, atol=1e-9)
    with pytest.raises(OracleDepthError):
        edge_deriv(a, 4, 3)
    with pytest.raises(OracleDepthError):
        make_edge_symbol(fn, -1, 0, depth=-1)


def test_edge_deriv_orders():
    # [PAPER] d_r^l a in S^{mu, nu - l}; d_rho^k a in S^{mu - k, nu + k}
    a = elliptic_model(1)
    d = edge_deriv(a, 1, 0)
    assert (d.mu, d.nu) == (1.0, -1.0)
    d = edge_deriv(a, 0, 1)
    assert (d.mu, d.nu) == (0.0, 1.0)
    d = edge_deriv(a, 0, 0, (2,))
    assert (d.mu, d.nu) == (-1.0, 2.0)
    one = get_symbol("one")
    assert edge_deriv(one, 1, 1).is_zero and edge_deriv(one, 0, 0, (1,)).is_zero


def test_edge_deriv_matches_finite_differences():
    # chain rule through the bracket against differences of a(r, rho, eta)
    a = edge_multiply(bracket_power(1), elliptic_model(-1))
    r = np.array([0.3, 1.4, 2.5, 6.0])
    rho, eta, xi, h = 0.7, 1.3, 2.0, 1e-5
    fd_r = (a.eval(r + h, rho, eta, xi) - a.eval(r - h, rho, eta, xi)) / (2 * h)
    fd_rho = (a.eval(r, rho + h, eta, xi) - a.eval(r, rho - h, eta, xi)) / (2 * h)
    fd_eta = (a.eval(r, rho, eta + h, xi) - a.eval(r, rho, eta - h, xi)) / (2 * h)
    assert np.allclose(edge_deriv(a, 1, 0).eval(r, rho, eta, xi), fd_r, rtol=1e-8)
    assert np.allclose(edge_deriv(a, 0, 1).eval(r, rho, eta, xi), fd_rho, rtol=1e-8)
    assert np.allclose(edge_deriv(a, 0, 0, (1,)).eval(r, rho, eta, xi), fd_eta, rtol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.floats(-6, 6), st.floats(-3, 3), st.floats(0.1, 5), st.integers(-4, 4))
def test_mixed_partials_commute(r, rho, eta, xi):
    a = get_symbol("cosx-perturbed:-1")
    rj = edge_deriv(edge_deriv(a, 1, 0), 0, 1)
    jr = edge_deriv(edge_deriv(a, 0, 1), 1, 0)
    u = rj.eval(r, rho, eta, float(xi), 0.4)
    v = jr.eval(r, rho, eta, float(xi), 0.4)
    assert abs(u - v) <= 1e-10 * (1 + abs(u))


def test_edge_multiply_orders():
    a = get_symbol("elliptic:-1")
    b = get_symbol("weighted-elliptic:2:1")
    # [PAPER] orders add under pointwise products
    c = edge_multiply(a, b)
    assert (c.mu, c.nu) == (1.0, 1.0)
    assert edge_multiply(a, get_symbol("one")).tilde == a.tilde
    g = edge_multiply(edge_multiply(bracket_power(2), bracket_power(-2)), a)
    assert (g.mu, g.nu) == (a.mu, a.nu)
    with pytest.raises(ValueError):
        edge_multiply(elliptic_model(1, q=2), a)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_leibniz_term_orders(k):
    # [PAPER] d_rho^k a D_r^k b in S^{mu + mu~ - k, nu + nu~}
    a = get_symbol("weighted-elliptic:-1:1")
    b = get_symbol("weighted-elliptic:2:-2")
    t = leibniz_terms(a, b, 3)[k]
    assert (t.mu, t.nu) == (1.0 - k, -1.0)


def test_registry():
    ids = symbol_ids()
    assert set(ids) == {"one", "elliptic:s", "weighted-elliptic:s:g", "cosx-perturbed:s",
                        "order-reduce:s"}
    assert get_symbol("order-reduce:-2").tilde == get_symbol("elliptic:-2").tilde
    w = get_symbol("weighted-elliptic:1:2")
    assert (w.mu, w.nu) == (1.0, 2.0)
    c = get_symbol("cosx-perturbed:1")
    assert c.x_dependent and (c.mu, c.nu) == (1.0, 0.0)
    for bad in ("elliptic", "nope:1", "elliptic:x", "elliptic:nan", 3):
        with pytest.raises(ValueError):
            get_symbol(bad)


def test_seminorm_check_examples():
    rep = seminorm_check(get_symbol("one"))
    assert rep.passed and rep.max_ratio <= 1.0 + 1e-12
    assert rep.r_exponents[0] == pytest.approx(0.0, abs=1e-9)
    # [DERIVED] [r]^1 has r-exponent 1 and its r-derivative exponent 0
    rep = seminorm_check(bracket_power(1))
    assert rep.passed
    assert rep.r_exponents[0] == pytest.approx(1.0, abs=1e-9)
    assert rep.r_exponents[1] == pytest.approx(0.0, abs=1e-9)
    rep = seminorm_check(elliptic_model(-2), SampleSpec(orders=(0,)))
    assert rep.cov_exponent == pytest.approx(-2.0, abs=0.05)


@pytest.mark.parametrize("sid", ["one", "elliptic:2", "elliptic:-1", "weighted-elliptic:1:1",
                                 "cosx-perturbed:1", "order-reduce:-2"])
def test_builtins_pass_seminorm_check(sid):
    assert seminorm_check(get_symbol(sid)).passed


def test_seminorm_check_rejects_wrong_orders():
    a = get_symbol("weighted-elliptic:0:2").with_orders(0, 0)
    assert not seminorm_check(a).passed


def test_asymptotic_sum_single_term_saturates():
    a0 = elliptic_model(1)
    s = asymptotic_sum(AsymptoticSumPlan((a0,), (2.0,)))
    r = np.array([0.0, 3.0])
    z = np.array([2.0, 5.0, 40.0])
    assert np.allclose(s.eval_tilde(r[:, None], z[None, :], 0.0, 1.0),
                       a0.eval_tilde(r[:, None], z[None, :], 0.0, 1.0), rtol=0, atol=1e-14)
    # below the excision radius the term is cut away
    assert s.eval_tilde(0.0, 0.5, 0.0, 1.0) == 0.0


def test_asymptotic_sum_two_terms():
    a0, a1 = elliptic_model(0), elliptic_model(-1)
    s = asymptotic_sum(AsymptoticSumPlan((a0, a1)))
    c = s.meta["constants"]
    assert c[0] < c[1]
    big = 4 * c[1]
    want = a0.eval_tilde(1.0, big, 0.3, 2.0) + a1.eval_tilde(1.0, big, 0.3, 2.0)
    assert abs(s.eval_tilde(1.0, big, 0.3, 2.0) - want) <= 1e-12


def test_asymptotic_sum_tail_decay():
    # [DERIVED] the tail after the leading term has order mu - 1
    terms = (elliptic_model(0), elliptic_model(-1), elliptic_model(-2))
    s = asymptotic_sum(AsymptoticSumPlan(terms))
    tail = EdgeSymbol(s.tilde - terms[0].tilde, -1.0, 0.0)
    rep = seminorm_check(tail, SampleSpec(orders=(0,), cov_samples=tuple(2.0**k for k in range(6, 12))))
    assert rep.cov_exponent <= 0 - 1 + 0.15


def test_asymptotic_sum_rejects_bad_orders():
    with pytest.raises(ValueError, match="not decreasing"):
        asymptotic_sum(AsymptoticSumPlan((elliptic_model(-1), elliptic_model(0))))
    with pytest.raises(ValueError):
        asymptotic_sum(AsymptoticSumPlan((elliptic_model(0), elliptic_model(-1)), (4.0, 2.0)))


def test_bracket_power_values():
    b = bracket_power(-2)
    r = np.array([0.0, 1.0, 3.0])
    assert np.allclose(b.eval(r, 0.0, 1.0, 0.0), bracket(r) ** -2.0)
    assert R in b.tilde.free_symbols and not b.edge_degenerate
