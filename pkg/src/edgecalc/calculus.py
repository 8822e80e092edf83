"""Leibniz products, operator-level remainders, parametrices and Neumann inversion.

Operator norms here are norms on the phase-space section of
``edgecalc.section``: every product of quantized symbols is applied on the
refined quadrature grid and compressed to the section only at the end.
"""
from dataclasses import dataclass
from math import factorial

import numpy as np
import sympy as sp

from .cutoffs import bracket, sym_excision
from .cylinder import counter_rng, make_cylinder_grid
from .fitting import SweepReport
from .section import get_section
from .symbolic import RHO, XI, X, eta_symbols
from .symbols import (EdgeSymbol, OracleDepthError, bracket_power, edge_deriv, edge_multiply,
                      edge_scale)

# sweep values at or below this are treated as exact zeros (roundoff level)
ZERO_TOL = 1e-12


def leibniz_terms(a, b, N):
    """Terms c_k = (1/k!) d_rho^k a * D_r^k b, k = 0..N, with D_r = -i d_r."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if a.q != b.q:
        raise ValueError("edge covariable dimensions differ")
    if a.depth < N + 1 or b.depth < N + 1:
        raise OracleDepthError(f"oracle depth below N + 1 = {N + 1}")
    terms = []
    for k in range(N + 1):
        da = edge_deriv(a, 0, k)
        db = edge_scale(edge_deriv(b, k, 0), (-sp.I) ** k / factorial(k))
        terms.append(edge_multiply(da, db))
    return terms


def _xi_values(grid, symbols):
    """Circle modes needed for a norm; only xi >= 0 when all symbols are even in xi."""
    xis = grid.xi
    even = all(s.tilde.subs(XI, -XI) == s.tilde for s in symbols)
    return xis[xis >= 0] if even else xis


def _coupled(symbols):
    return any(s.x_dependent for s in symbols)


def _apply_sum(section, symbols, eta, block):
    out = None
    for s in symbols:
        if s.is_zero:
            continue
        y = section.apply_symbol(s, eta, block)
        out = y if out is None else out + y
    return out


def _section_norm(grid, params, symbols, op):
    section = get_section(grid, params)
    coupled = _coupled(symbols)
    xis = grid.xi if coupled else _xi_values(grid, symbols)
    return section.operator_norm(lambda blk: op(section, blk), xis, coupled)


def _section_norms(grid, params, symbols, op):
    """Like ``_section_norm`` for an ``op`` returning a list of blocks; one norm each."""
    section = get_section(grid, params)
    coupled = _coupled(symbols)
    blocks = ([section.basis_block(grid.xi)] if coupled else
              [section.basis_block([xi]) for xi in _xi_values(grid, symbols)])
    norms = None
    for blk in blocks:
        vals = [float(np.linalg.norm(section.compress(y), 2)) for y in op(section, blk)]
        norms = vals if norms is None else [max(u, v) for u, v in zip(norms, vals)]
    return norms


def operator_norm_section(a, eta, grid=None, params=None):
    """Section norm of Op(a)(eta)."""
    grid = grid or make_cylinder_grid()
    if a.is_zero:
        return 0.0
    return _section_norm(grid, params, [a], lambda S, X: S.apply_symbol(a, eta, X))


def composition_defect(a, b, N, eta, grid=None, params=None, terms=None):
    """Section norm of Op(a)Op(b) - sum_{k<=N} Op(c_k) at eta."""
    grid = grid or make_cylinder_grid()
    terms = terms if terms is not None else leibniz_terms(a, b, N)

    def op(S, X):
        lhs = S.apply_symbol(a, eta, S.apply_symbol(b, eta, X))
        rhs = _apply_sum(S, terms, eta, X)
        return lhs - rhs if rhs is not None else lhs

    return _section_norm(grid, params, [a, b] + list(terms), op)


def eta_sweep(fn, etas, **meta):
    """Evaluate fn(eta_vector) over eta magnitudes (first component) and fit against <eta>."""
    etas = np.asarray(etas, dtype=float)
    values = [float(fn(np.array([e]))) for e in etas]
    return SweepReport.from_samples(etas, values, scale="bracket", zero_tol=ZERO_TOL, **meta)


def composition_sweep(a, b, N, etas, grid=None, params=None):
    terms = leibniz_terms(a, b, N)
    return eta_sweep(lambda e: composition_defect(a, b, N, e, grid, params, terms), etas, N=N)


def commute_weight(a, nu_t, N, etas=None, grid=None, params=None):
    """Symbol b_N with Op(a) [r]^nu_t ~ [r]^nu_t Op(b_N), and a defect sweep.

    b_N = [r]^-nu_t sum_{k<=N} (1/k!) d_rho^k a D_r^k [r]^nu_t, of orders
    (mu, nu).  When ``etas`` is given the defect
    ||Op(a) [r]^nu_t - [r]^nu_t Op(b_N)|| is swept over them.
    """
    phi = bracket_power(nu_t, a.q)
    terms = leibniz_terms(a, phi, N)
    total = terms[0]
    for t in terms[1:]:
        total = EdgeSymbol(total.tilde + t.tilde, total.mu, total.nu, a.q, min(total.depth, t.depth))
    b = edge_multiply(bracket_power(-nu_t, a.q), total).with_orders(a.mu, a.nu)
    if etas is None:
        return b, None
    return b, eta_sweep(lambda e: weight_commutation_defect(a, b, nu_t, e, grid, params), etas,
                        nu_t=nu_t, N=N)


def weight_commutation_defect(a, b, nu_t, eta, grid=None, params=None):
    """Section norm of Op(a) [r]^nu_t - [r]^nu_t Op(b) at eta."""
    grid = grid or make_cylinder_grid()

    def op(S, X):
        w = S.bracket_power(nu_t)
        return S.apply_symbol(a, eta, S.apply_weight(w, X)) - S.apply_weight(w, S.apply_symbol(b, eta, X))

    return _section_norm(grid, params, [a, b], op)


# --- parametrix -----------------------------------------------------------------

@dataclass(frozen=True)
class EllipticProbe:
    r: tuple = (0.0, 1.0, 2.0, 8.0, 32.0)
    radii: tuple = tuple(2.0**k for k in range(-3, 13))
    n_dirs: int = 7
    n_x: int = 8
    threshold: float = 0.5
    max_constant: float = 2.0**10


def _probe_points(q, probe):
    """Points z = (xi, rho_t, eta_t) on spheres of the probe radii."""
    rng = counter_rng(12345)
    dirs = [np.eye(2 + q)[i] for i in range(2 + q)]
    dirs += list(rng.normal(size=(probe.n_dirs, 2 + q)))
    dirs = np.array([d / np.linalg.norm(d) for d in dirs])
    pts = np.concatenate([t * dirs for t in probe.radii])
    return pts, np.linalg.norm(pts, axis=1)


def _ellipticity_profile(p, probe):
    """min over r and x of |p~| <z>^-mu [r]^-nu at each probe point."""
    pts, radius = _probe_points(p.q, probe)
    x = 2 * np.pi * np.arange(probe.n_x) / probe.n_x
    prof = np.full(len(pts), np.inf)
    for r in probe.r:
        vals = p.eval_tilde(r, pts[:, 1, None], pts[:, None, 2:], pts[:, 0, None], x[None, :])
        m = np.abs(vals).min(axis=1) * (1 + radius**2) ** (-p.mu / 2) * bracket(r) ** (-p.nu)
        prof = np.minimum(prof, m)
    return radius, prof


def calibrate_excision(p, probe=None):
    """Smallest power of two C >= 1 such that the ellipticity profile stays
    above ``threshold`` times its asymptotic value for |z| >= C."""
    probe = probe or EllipticProbe()
    radius, prof = _ellipticity_profile(p, probe)
    far = radius >= radius.max() / 4
    c_inf = prof[far].min()
    if not c_inf > 0:
        raise ValueError("ellipticity probe failure: symbol vanishes at large |z|")
    C = 1.0
    while C <= probe.max_constant:
        if prof[radius >= C].min() >= probe.threshold * c_inf:
            return C
        C *= 2.0
    raise ValueError("ellipticity probe failure: no excision constant up to "
                     f"{probe.max_constant:g}")


def parametrix(p, C=None, probe=None):
    """chi((xi, rho_t, eta_t) / C) / p~, of orders (-mu, -nu)."""
    C = calibrate_excision(p, probe) if C is None else float(C)
    chi = sym_excision(XI, RHO, *eta_symbols(p.q), scale=sp.nsimplify(C))
    return EdgeSymbol(chi / p.tilde, -p.mu, -p.nu, p.q, p.depth, f"parametrix({p.label})",
                      meta={"excision": C})


@dataclass(frozen=True)
class LeftInverseResidual:
    """||Op(a)Op(b) - I|| on the section, with a = [r]^s p^(-1), b = [r]^-s p.

    ``remainder`` is the norm left after also subtracting the Leibniz terms
    c_1..c_N of a#b, i.e. the size of Op(r_N).
    """

    value: float
    remainder: float
    N: int

    def __float__(self):
        return self.value


def left_inverse_pair(p, C=None):
    s = p.mu
    a = edge_multiply(bracket_power(s, p.q), parametrix(p, C))
    b = edge_multiply(bracket_power(-s, p.q), p)
    return a, b


def left_inverse_residual(p, eta, N=1, grid=None, params=None, C=None):
    grid = grid or make_cylinder_grid()
    a, b = left_inverse_pair(p, C)
    corrections = leibniz_terms(a, b, N)[1:] if N > 0 else []

    def op(S, X):
        defect = S.apply_symbol(a, eta, S.apply_symbol(b, eta, X)) - X
        rest = _apply_sum(S, corrections, eta, X)
        return [defect, defect - rest if rest is not None else defect]

    value, remainder = _section_norms(grid, params, [a, b] + corrections, op)
    return LeftInverseResidual(value, remainder, N)


def calibrate_eta0(residual_fn, etas=tuple(2.0**k for k in range(0, 9)), level=0.5):
    """Smallest sampled eta0 with residual < level at every sampled eta >= eta0.

    Returns (eta0 or None, residuals).
    """
    res = [float(residual_fn(np.array([e]))) for e in etas]
    eta0 = None
    for i in range(len(etas) - 1, -1, -1):
        if res[i] < level:
            eta0 = etas[i]
        else:
            break
    return eta0, res


def injectivity_certificate(p, eta, grid=None, params=None, C=None, residual=None):
    """Rank check of Op(b)V on the section alongside the Neumann residual.

    Returns a dict with the residual, the smallest singular value of the
    compressed left product, the numerical rank of Op(b)V and the section
    dimension, per circle mode.
    """
    grid = grid or make_cylinder_grid()
    a, b = left_inverse_pair(p, C)
    section = get_section(grid, params)
    xis = _xi_values(grid, [a, b])
    if residual is None:
        residual = float(left_inverse_residual(p, eta, 1, grid, params, C))
    out = {"residual": float(residual), "modes": {}}
    for xi in xis:
        BV = section.apply_symbol(b, eta, section.basis_block([xi])).data[:, 0, :]
        svals = np.linalg.svd(BV, compute_uv=False)
        tol = svals.max() * max(BV.shape) * np.finfo(float).eps
        out["modes"][int(xi)] = {"rank": int(np.sum(svals > tol)), "dim": BV.shape[1],
                                 "sigma_min": float(svals.min())}
    out["full_rank"] = all(m["rank"] == m["dim"] for m in out["modes"].values())
    return out


# --- Neumann series ---------------------------------------------------------------

def _sum_symbols(terms, mu, nu, q):
    expr = sum((t.tilde for t in terms), sp.Integer(0))
    depth = min(t.depth for t in terms)
    return EdgeSymbol(expr, mu, nu, q, depth)


def neumann_correct(c, N):
    """d = sum_{j=1}^N (-1)^j c^{#j}, each Leibniz power truncated at N terms."""
    if c.mu > -1 + 1e-12 or c.nu > 1e-12:
        raise ValueError("order precondition violated: need orders <= (-1, 0)")
    if c.is_zero:
        return EdgeSymbol(sp.Integer(0), c.mu, c.nu, c.q)
    power = c
    powers = [c]
    for j in range(2, N + 1):
        power = _sum_symbols(leibniz_terms(power, c, N), j * c.mu, c.nu, c.q)
        powers.append(power)
    expr = sum(((-1) ** j * P.tilde for j, P in enumerate(powers, start=1)), sp.Integer(0))
    depth = min(P.depth for P in powers)
    return EdgeSymbol(expr, c.mu, c.nu, c.q, depth)


def neumann_residual(c, d, eta, grid=None, params=None):
    """Section norm of (I + Op(c))(I + Op(d)) - I."""
    grid = grid or make_cylinder_grid()

    def op(S, X):
        Y = S.apply_symbol(d, eta, X) if not d.is_zero else None
        Z = X + Y if Y is not None else X
        out = S.apply_symbol(c, eta, Z) if not c.is_zero else None
        if Y is not None:
            out = Y if out is None else out + Y
        return out if out is not None else X * 0.0

    return _section_norm(grid, params, [c, d], op)
