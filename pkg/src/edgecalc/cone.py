"""Weighted cone Sobolev spaces on the cylinder and their order reductions.

The space H^{s,g} carries the norm ||[r]^(-s+g) Op(p~)(eta1) u||_{L2} with
p~ the model elliptic symbol of order s and a fixed anchor eta1.  The
reduction P^{s,g}(eta) = Op([r]^(-s+g) p~)(eta) has the candidate inverse
P^{-s,-g}(eta) = Op([r]^(s-g) p~^(-1))(eta), with p~^(-1) the excised
pointwise inverse of ``calculus.parametrix``.
"""
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .calculus import _section_norms, _xi_values, parametrix
from .cylinder import make_cylinder_grid, op_apply, weighted_norm_cyl
from .fitting import SweepReport
from .section import Block, get_section
from .symbols import EdgeSymbol, bracket_power, edge_multiply, elliptic_model

CALIBRATION_ETAS = tuple(2.0**k for k in range(0, 11))


@dataclass(frozen=True, eq=False)
class ConeSpaceSpec:
    s: float
    g: float
    anchor_eta: np.ndarray
    ptilde: EdgeSymbol
    reducer: EdgeSymbol
    inverse: EdgeSymbol
    calibration: tuple = ()


def _reducers(s, g, q, ptilde=None):
    ptilde = ptilde or elliptic_model(s, q)
    reducer = edge_multiply(bracket_power(-s + g, q), ptilde).with_orders(s, -s + g)
    inverse = edge_multiply(bracket_power(s - g, q), parametrix(ptilde)).with_orders(-s, s - g)
    return ptilde, reducer, inverse


def iso_residual_pair(reducer, inverse, eta, grid=None, params=None):
    """max(||P P^- - I||, ||P^- P - I||) on the section."""
    grid = grid or make_cylinder_grid()

    def op(S, X):
        return [S.apply_symbol(reducer, eta, S.apply_symbol(inverse, eta, X)) - X,
                S.apply_symbol(inverse, eta, S.apply_symbol(reducer, eta, X)) - X]

    return max(_section_norms(grid, params, [reducer, inverse], op))


def make_space(s, g, q=1, grid=None, params=None, ptilde=None, anchor=None):
    """Cone space spec with an anchor from a dyadic calibration sweep.

    The anchor is the smallest eta = 2^k, k = 0..10, at which the iso
    residual of the reduction is below 0.5, unless given explicitly.
    """
    s, g = float(s), float(g)
    grid = grid or make_cylinder_grid()
    ptilde, reducer, inverse = _reducers(sp.nsimplify(s), sp.nsimplify(g), q, ptilde)
    calib = []
    if anchor is None:
        for eta in CALIBRATION_ETAS:
            e = np.zeros(q)
            e[0] = eta
            res = iso_residual_pair(reducer, inverse, e, grid, params)
            calib.append((eta, res))
            if res < 0.5:
                anchor = e
                break
        else:
            raise ValueError(f"calibration failed: iso residual >= 0.5 for all eta <= "
                             f"{CALIBRATION_ETAS[-1]:g}")
    anchor = np.atleast_1d(np.asarray(anchor, dtype=float))
    if anchor.shape != (q,) or not np.any(anchor):
        raise ValueError("anchor must be a nonzero vector of length q")
    return ConeSpaceSpec(s, g, anchor, ptilde, reducer, inverse, tuple(calib))


def cone_norm(u, spec):
    """||[r]^(-s+g) Op(p~)(eta1) u||_{L2}."""
    return weighted_norm_cyl(op_apply(spec.ptilde, spec.anchor_eta, u), -spec.s + spec.g)


def iso_residual(spec, eta, grid=None, params=None):
    return iso_residual_pair(spec.reducer, spec.inverse, np.atleast_1d(eta), grid, params)


class InverseNotCertified(ValueError):
    pass


_INVERSES = {}


def _certified_inverse(section, spec, xi):
    """V G^-1 with G = V^H P^{s,g}(eta1) V, certified by ||H G - I|| < 1, H = V^H P^- V."""
    key = (section.grid, section.params, spec.reducer.tilde, spec.inverse.tilde,
           tuple(spec.anchor_eta), float(xi))
    if key not in _INVERSES:
        if len(_INVERSES) > 64:
            _INVERSES.clear()
        _INVERSES[key] = _compute_inverse(section, spec, xi)
    return _INVERSES[key]


def _compute_inverse(section, spec, xi):
    blk = section.basis_block([xi])
    G = section.compress(section.apply_symbol(spec.reducer, spec.anchor_eta, blk))
    H = section.compress(section.apply_symbol(spec.inverse, spec.anchor_eta, blk))
    cert = float(np.linalg.norm(H @ G - np.eye(G.shape[0]), 2))
    if not cert < 1:
        raise InverseNotCertified(f"inverse not certified: Neumann residual {cert:.3g} >= 1")
    return section.basis @ np.linalg.inv(G), cert


def mapping_sweep(a, s, g, etas, grid=None, params=None, space=None, target=None):
    """||P^{s-mu,g-nu}(eta1') Op(a)(eta) P^{s,g}(eta1)^-1|| on the section over an eta sweep.

    ``target`` may be a ConeSpaceSpec or an (s, g) pair overriding the
    default target space (s - mu, g - nu).  The inverse reduction is the
    inverse of the compressed reducer, certified by a Neumann bound.
    """
    grid = grid or make_cylinder_grid()
    space = space or make_space(s, g, a.q, grid, params)
    if target is None:
        target = (space.s - a.mu, space.g - a.nu)
    if not isinstance(target, ConeSpaceSpec):
        target = make_space(target[0], target[1], a.q, grid, params)
    section = get_section(grid, params)
    syms = [a, space.reducer, space.inverse, target.reducer]
    coupled = any(x.x_dependent for x in syms)
    if coupled:
        raise NotImplementedError("mapping bounds are implemented for x-independent symbols")
    xis = _xi_values(grid, syms)
    values = np.zeros(len(etas))
    certs = []
    for xi in xis:
        W, cert = _certified_inverse(section, space, xi)
        certs.append(cert)
        blk = Block(W[:, None, :], [xi], True)
        for i, eta in enumerate(etas):
            e = np.zeros(a.q)
            e[0] = eta
            Y = section.apply_symbol(a, e, blk) if not a.is_zero else blk * 0.0
            Y = section.apply_symbol(target.reducer, target.anchor_eta, Y)
            values[i] = max(values[i], float(np.linalg.norm(section.compress(Y), 2)))
    meta = {"certificate": max(certs), "anchor": float(space.anchor_eta[0]),
            "target_anchor": float(target.anchor_eta[0])}
    if len(etas) < 3:
        return SweepReport(np.asarray(etas, float), values, np.nan, np.nan, meta=meta)
    return SweepReport.from_samples(etas, values, scale="bracket", **meta)


def mapping_bound(a, s, g, eta, grid=None, params=None, space=None, target=None):
    eta = float(np.linalg.norm(np.atleast_1d(eta)))
    return float(mapping_sweep(a, s, g, [eta], grid, params, space, target).values[0])
