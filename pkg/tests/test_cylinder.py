import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from edgecalc.cutoffs import bracket, sym_bracket
from edgecalc.cylinder import (CylinderFunction, SeminormSpec, adjoint_defect, assemble_matrix,
                               from_vector, gaussian, inner_cyl, l2_norm_cyl, make_cylinder_grid,
                               op_apply, op_apply_adjoint, operator_norm_cyl, schwartz_seminorm,
                               seminorm_ratio_probe, to_vector, weighted_norm_cyl)
from edgecalc.symbolic import R
from edgecalc.symbols import EdgeSymbol, get_symbol

ETA = np.array([4.0])


def random_function(grid, seed):
    rng = np.random.default_rng(seed)
    u = gaussian(grid, 1.0, 0) * 0.0
    for _ in range(3):
        c = complex(rng.normal(), rng.normal())
        u = u + c * gaussian(grid, rng.uniform(0.5, 1.5), int(rng.integers(-2, 3)),
                             rng.uniform(-2, 2))
    return u


def test_grid_validation():
    g = make_cylinder_grid()
    assert g.dr == 0.125 and g.n_r == 512 and g.n_modes == 8
    assert np.max(np.abs(g.rho)) <= np.pi / g.dr + 1e-12
    with pytest.raises(ValueError, match="power of two"):
        make_cylinder_grid(32.0, 500)
    with pytest.raises(ValueError, match="0.25"):
        make_cylinder_grid(32.0, 128)


def test_gaussian_norm():
    # [DERIVED] int exp(-r^2) dr = sqrt(pi)
    g = make_cylinder_grid()
    assert l2_norm_cyl(gaussian(g, 1.0, 3)) == pytest.approx(np.pi**0.25, abs=1e-8)
    zero = CylinderFunction(np.zeros((g.n_r, g.circle.n_points)), g)
    assert l2_norm_cyl(zero) == 0.0


def test_weighted_norm_slope():
    # [DERIVED] bumps centred at R: weight w multiplies the norm by about R^w
    g = make_cylinder_grid()
    ratios = []
    for c in (4.0, 8.0, 16.0):
        u = gaussian(g, 0.25, 0, c)
        ratios.append(np.log(weighted_norm_cyl(u, 2) / l2_norm_cyl(u)) / np.log(c))
    assert np.allclose(ratios, 2.0, atol=0.01)


def test_periodization_control():
    g = make_cylinder_grid()
    u = gaussian(g, 4.0, 1)
    edge = np.abs(g.r) > g.half_length - 4
    frac = np.sum(np.abs(u.coeffs[edge]) ** 2) / np.sum(np.abs(u.coeffs) ** 2)
    assert frac <= 1e-10


def test_op_one_is_identity(small_grid):
    u = random_function(small_grid, 0)
    v = op_apply(get_symbol("one"), ETA, u)
    assert np.max(np.abs(v.values - u.values)) <= 1e-12


def test_r_multiplier_is_pointwise(small_grid):
    m = EdgeSymbol(sp.cos(R) * sym_bracket(R) ** -1, 0.0, -1.0)
    u = random_function(small_grid, 1)
    v = op_apply(m, ETA, u)
    w = np.cos(small_grid.r) / bracket(small_grid.r)
    assert np.allclose(v.values, w[:, None] * u.values, atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_linearity(alpha, beta):
    g = make_cylinder_grid(8.0, 64, 4)
    a = get_symbol("cosx-perturbed:-1")
    u, v = random_function(g, 2), random_function(g, 3)
    lhs = op_apply(a, ETA, alpha * u + beta * v)
    rhs = alpha * op_apply(a, ETA, u) + beta * op_apply(a, ETA, v)
    assert np.max(np.abs(lhs.values - rhs.values)) <= 1e-12 * (1 + abs(alpha) + abs(beta)) * 10


@pytest.mark.parametrize("sid", ["one", "elliptic:-1", "weighted-elliptic:1:1", "cosx-perturbed:1"])
def test_assembled_matrix_matches_op_apply(small_grid, sid):
    a = get_symbol(sid)
    M = assemble_matrix(a, ETA, small_grid)
    for seed in range(10):
        u = random_function(small_grid, seed)
        got = M.matvec(to_vector(u))
        want = to_vector(op_apply(a, ETA, u))
        assert np.linalg.norm(got - want) <= 1e-10 * np.linalg.norm(to_vector(u))


def test_assembled_structure(small_grid):
    M = assemble_matrix(get_symbol("one"), ETA, small_grid)
    assert M.blocks is not None
    assert np.allclose(M.todense(), np.eye(small_grid.size), atol=1e-13)
    D = assemble_matrix(get_symbol("cosx-perturbed:0"), ETA, small_grid)
    assert D.entries is not None and D.shape == (small_grid.size, small_grid.size)


def test_matrix_cap():
    g = make_cylinder_grid()
    with pytest.raises(ValueError, match="cap"):
        assemble_matrix(get_symbol("cosx-perturbed:0"), ETA, g)


def test_vector_round_trip(small_grid):
    u = random_function(small_grid, 4)
    v = from_vector(to_vector(u), small_grid)
    assert np.allclose(u.values, v.values, atol=1e-13)
    # the (rho, xi) basis is unitary for the L2 pairing
    assert np.linalg.norm(to_vector(u)) * np.sqrt(small_grid.dr) == pytest.approx(l2_norm_cyl(u))


@pytest.mark.parametrize("sid,tol", [("one", 1e-12), ("elliptic:-1", 1e-6),
                                     ("cosx-perturbed:1", 1e-6)])
def test_adjoint_defect(small_grid, sid, tol):
    assert adjoint_defect(get_symbol(sid), ETA, trials=3, grid=small_grid) <= tol


def test_adjoint_of_real_r_multiplier(small_grid):
    m = EdgeSymbol(sym_bracket(R) ** -2, 0.0, -2.0)
    assert adjoint_defect(m, ETA, trials=3, grid=small_grid) <= 1e-10
    u, v = random_function(small_grid, 5), random_function(small_grid, 6)
    assert abs(inner_cyl(op_apply(m, ETA, u), v) - inner_cyl(u, op_apply_adjoint(m, ETA, v))) < 1e-12


def test_operator_norm_examples(small_grid):
    assert operator_norm_cyl(get_symbol("one"), ETA, small_grid) == pytest.approx(1.0)
    m = EdgeSymbol(sp.cos(R), 0.0, 0.0)
    assert operator_norm_cyl(m, ETA, small_grid) <= 1 + 1e-8


def test_operator_norm_decays_like_eta_inverse():
    # [DERIVED] CV bound for the order -1 model on the nominal section
    g = make_cylinder_grid(16.0, 128, 4)
    a = get_symbol("elliptic:-1")
    etas = 2.0 ** np.arange(9)
    vals = [operator_norm_cyl(a, [e], g) for e in etas]
    slope = np.polyfit(0.5 * np.log1p(etas**2), np.log(vals), 1)[0]
    assert slope <= -1 + 0.1


def test_operator_norm_monotone_under_refinement():
    a = get_symbol("elliptic:-1")
    g = make_cylinder_grid(8.0, 64, 2)
    for eta in (1.0, 8.0):
        coarse = operator_norm_cyl(a, [eta], g)
        assert operator_norm_cyl(a, [eta], g.refined(2)) >= coarse - 1e-6
        assert operator_norm_cyl(a, [eta], g.refined(1, 2)) >= coarse - 1e-6


def test_eta_zero_rejected(small_grid):
    with pytest.raises(ValueError):
        op_apply(get_symbol("elliptic:-1"), [0.0], gaussian(small_grid))
    with pytest.raises(ValueError):
        op_apply(get_symbol("elliptic:-1"), [1.0, 2.0], gaussian(small_grid))


def test_grid_mismatch():
    u = gaussian(make_cylinder_grid(8.0, 64, 4))
    v = gaussian(make_cylinder_grid(8.0, 128, 4))
    with pytest.raises(ValueError, match="grid"):
        u + v


def test_schwartz_seminorm_of_gaussian():
    g = make_cylinder_grid()
    u = gaussian(g, 1.0, 0)
    assert schwartz_seminorm(u, SeminormSpec(0, 0)) == pytest.approx(1.0, abs=1e-12)
    # [DERIVED] sup |r exp(-r^2/2)| ~ e^-1/2 at r = 1, with [r] >= |r|
    assert schwartz_seminorm(u, SeminormSpec(1, 0)) >= np.exp(-0.5) - 1e-3
    with pytest.raises(ValueError, match="too high"):
        SeminormSpec(7)


def test_probe_identity_preserves_seminorm():
    g = make_cylinder_grid()
    u = gaussian(g, 0.5, 1)
    v = op_apply(get_symbol("one"), ETA, u)
    spec = SeminormSpec(3, 1)
    assert schwartz_seminorm(v, spec) == pytest.approx(schwartz_seminorm(u, spec), rel=1e-12)


def test_probe_order_zero_model():
    # [DERIVED] measured; constant reported
    rep = seminorm_ratio_probe(get_symbol("elliptic:0"), ETA, m_out=0, s_out=0)
    assert len(rep.ratios) == 5 and rep.max_ratio >= rep.min_ratio > 0
