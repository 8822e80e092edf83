import numpy as np
import pytest

from edgecalc.cone import (ConeSpaceSpec, cone_norm, iso_residual, make_space, mapping_bound,
                           mapping_sweep)
from edgecalc.cutoffs import sym_bracket
from edgecalc.cylinder import gaussian, l2_norm_cyl, make_cylinder_grid, weighted_norm_cyl
from edgecalc.symbolic import R
from edgecalc.symbols import EdgeSymbol, get_symbol


@pytest.fixture(scope="module")
def grid():
    return make_cylinder_grid(8.0, 64, 4)


def test_reducer_orders(grid):
    # [PAPER] the reducer has orders (s, -s+g), the inverse (-s, s-g)
    spec = make_space(2, 1, grid=grid)
    assert (spec.reducer.mu, spec.reducer.nu) == (2, -1)
    assert (spec.inverse.mu, spec.inverse.nu) == (-2, 1)
    assert isinstance(spec, ConeSpaceSpec) and spec.anchor_eta.shape == (1,)


def test_unit_space_is_l2(grid):
    spec = make_space(0, 0, grid=grid)
    u = gaussian(grid, 1.0, 1)
    assert cone_norm(u, spec) == pytest.approx(l2_norm_cyl(u), abs=1e-12)
    assert iso_residual(spec, 4.0, grid) <= 1e-12
    assert spec.anchor_eta[0] == 1.0


def test_pure_weight_space(grid):
    # H^{0,g} is L2 with weight [r]^g
    spec = make_space(0, 1, grid=grid)
    u = gaussian(grid, 0.5, 0, 3.0)
    assert cone_norm(u, spec) == pytest.approx(weighted_norm_cyl(u, 1.0), rel=1e-12)


def test_cone_norm_is_a_norm(grid):
    spec = make_space(1, 0, grid=grid)
    u, v = gaussian(grid, 1.0, 1), gaussian(grid, 0.7, -2, 1.0)
    assert cone_norm(2.5 * u, spec) == pytest.approx(2.5 * cone_norm(u, spec))
    assert cone_norm(u + v, spec) <= cone_norm(u, spec) + cone_norm(v, spec) + 1e-12
    assert cone_norm(0 * u, spec) == 0.0


def test_iso_residual_decays(grid):
    spec = make_space(1, 0, grid=grid)
    vals = [iso_residual(spec, e, grid) for e in (1.0, 16.0, 256.0)]
    assert vals[0] < 0.5 and vals[2] < vals[1] < vals[0]


def test_explicit_anchor_validation(grid):
    spec = make_space(1, 0, grid=grid, anchor=[8.0])
    assert spec.anchor_eta[0] == 8.0 and spec.calibration == ()
    with pytest.raises(ValueError, match="anchor"):
        make_space(1, 0, grid=grid, anchor=[0.0])
    with pytest.raises(ValueError, match="anchor"):
        make_space(1, 0, grid=grid, anchor=[1.0, 2.0])


def test_mapping_bound_of_identity(grid):
    spec = make_space(1, 0, grid=grid)
    assert mapping_bound(get_symbol("one"), 1, 0, 4.0, grid, space=spec) == pytest.approx(1.0, abs=1e-10)


def test_mapping_bound_of_weight(grid):
    # [DERIVED] a = [r]^-1 maps H^{0,0} to H^{0,1} isometrically on the section
    a = EdgeSymbol(sym_bracket(R) ** -1, 0, -1)
    val = mapping_bound(a, 0, 0, 4.0, grid)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_mapping_sweep_meta(grid):
    rep = mapping_sweep(get_symbol("elliptic:-1"), 0, 0, [4.0, 16.0, 64.0], grid)
    assert set(rep.meta) >= {"certificate", "anchor", "target_anchor"}
    assert rep.meta["certificate"] < 1
    assert np.all(rep.values > 0) and np.isfinite(rep.exponent)


def test_mapping_rejects_x_dependence(grid):
    with pytest.raises(NotImplementedError):
        mapping_bound(get_symbol("cosx-perturbed:-1"), 0, 0, 4.0, grid)
