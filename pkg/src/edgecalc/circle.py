"""Spectral machinery on the circle: grids, symbols, quantization and norms.

Circle functions are represented by their Fourier coefficients on the
retained modes ``xi = -n_modes, ..., n_modes`` (in that order), normalized as

    u_hat(xi) = (2 pi)^(-1) * integral of u(x) exp(-i x xi) dx,

which the collocation grid computes as ``fft(values) / n_points``.  With this
normalization the constant function 1 has norm 1; the L2(S^1) norm differs by
the single global factor sqrt(2 pi), which cancels in every ratio and
exponent fit in this package.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy as sp

from .fitting import SweepReport
from .symbolic import XI, X, callable_function, compile_expr, evaluate, japanese, lam_symbols


@dataclass(frozen=True)
class CircleGrid:
    n_modes: int
    n_points: int

    @property
    def modes(self):
        return np.arange(-self.n_modes, self.n_modes + 1)

    @property
    def points(self):
        return 2 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def size(self):
        return 2 * self.n_modes + 1

    def to_coefficients(self, values, axis=-1):
        """Retained Fourier coefficients of samples on the collocation points."""
        c = np.fft.fft(values, axis=axis) / self.n_points
        return np.take(c, self.modes % self.n_points, axis=axis)

    def from_coefficients(self, coeffs, axis=-1):
        """Samples on the collocation points of a trigonometric polynomial."""
        coeffs = np.moveaxis(np.asarray(coeffs, dtype=complex), axis, -1)
        full = np.zeros(coeffs.shape[:-1] + (self.n_points,), dtype=complex)
        full[..., self.modes % self.n_points] = coeffs
        return np.moveaxis(np.fft.ifft(full, axis=-1) * self.n_points, -1, axis)


def make_circle_grid(n_modes):
    """Grid with modes |xi| <= n_modes and 2 n_modes + 2 collocation points."""
    if int(n_modes) != n_modes or n_modes < 1:
        raise ValueError("need at least one mode")
    n_modes = int(n_modes)
    return CircleGrid(n_modes, 2 * n_modes + 2)


@dataclass(frozen=True)
class SobolevPair:
    s_in: float
    s_out: float

    def __post_init__(self):
        if not (np.isfinite(self.s_in) and np.isfinite(self.s_out)):
            raise ValueError("Sobolev orders must be finite")


@dataclass(frozen=True, eq=False)
class CircleSymbol:
    """Parameter-dependent symbol p(x, xi, lam) with a declared order.

    ``expr`` is a sympy expression in ``x``, ``xi`` and ``lam0..lam{l-1}``.
    """

    expr: sp.Expr
    order: float
    param_dim: int = 1

    @property
    def args(self):
        return (X, XI) + lam_symbols(self.param_dim)

    @property
    def is_multiplier(self):
        return X not in self.expr.free_symbols

    @cached_property
    def _fn(self):
        return compile_expr(self.expr, self.args)

    def eval(self, x, xi, lam):
        lam = np.asarray(lam, dtype=float)
        if lam.shape[-1:] != (self.param_dim,) and self.param_dim:
            raise ValueError(f"parameter must have length {self.param_dim}")
        return evaluate(self._fn, x, xi, *np.moveaxis(lam, -1, 0)) if self.param_dim \
            else evaluate(self._fn, x, xi)

    def derivative(self, alpha):
        """Symbol differentiated by the multi-index alpha over (x, xi, lam...)."""
        alpha = tuple(alpha)
        if len(alpha) != 2 + self.param_dim:
            raise ValueError("multi-index length must be 2 + param_dim")
        expr = self.expr
        for var, n in zip(self.args, alpha):
            if n:
                expr = sp.diff(expr, var, n)
        return CircleSymbol(expr, self.order - sum(alpha[1:]), self.param_dim)

    def deriv(self, alpha, x, xi, lam):
        return self.derivative(alpha).eval(x, xi, lam)


def circle_symbol(fn_or_expr, order, param_dim=1):
    """Build a CircleSymbol from a sympy expression or a callable f(x, xi, *lam)."""
    if isinstance(fn_or_expr, sp.Basic):
        return CircleSymbol(sp.sympify(fn_or_expr), float(order), param_dim)
    cls = callable_function(fn_or_expr, 2 + param_dim, name="circle")
    return CircleSymbol(cls(X, XI, *lam_symbols(param_dim)), float(order), param_dim)


def order_reducing_family(s, param_dim=1):
    """R^s(lam)(xi) = (1 + xi^2 + |lam|^2)^(s/2), a multiplier of order s."""
    s = sp.nsimplify(s)
    return CircleSymbol(japanese(XI, *lam_symbols(param_dim)) ** s, float(s), param_dim)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Matrix of an operator in a Fourier basis.

    Dense operators store ``entries``; operators that do not couple the
    circle modes may store one block per mode in ``blocks`` instead.
    """

    entries: np.ndarray = None
    blocks: tuple = None
    basis: str = "circle-modes"
    grid: object = None
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        if self.entries is not None:
            return self.entries.shape
        n = sum(b.shape[0] for b in self.blocks)
        return (n, n)

    def todense(self):
        if self.entries is not None:
            return self.entries
        from scipy.linalg import block_diag
        return block_diag(*self.blocks)

    def matvec(self, v):
        if self.entries is not None:
            return self.entries @ v
        n = self.blocks[0].shape[0]
        v = np.asarray(v).reshape(len(self.blocks), n, *np.shape(v)[1:])
        return np.concatenate([b @ vb for b, vb in zip(self.blocks, v)])


def quantize_circle(p, lam, grid=None):
    """Matrix of Op(p)(lam) on the retained modes.

    Column xi holds the Fourier coefficients (computed on the collocation
    grid) of x -> p(x, xi, lam) exp(i x xi), so that
    (M u_hat)(xi') = sum_xi p_hat(xi' - xi; xi, lam) u_hat(xi).
    Multipliers give an exactly diagonal matrix.
    """
    grid = grid or make_circle_grid(8)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (p.param_dim,):
        raise ValueError(f"parameter must have length {p.param_dim}, got {lam.shape}")
    xi = grid.modes
    if p.is_multiplier:
        return OperatorMatrix(np.diag(p.eval(0.0, xi.astype(float), lam)), grid=grid)
    x = grid.points
    vals = p.eval(x[:, None], xi[None, :].astype(float), lam)
    phat = np.fft.fft(vals, axis=0) / grid.n_points
    shift = (xi[:, None] - xi[None, :]) % grid.n_points
    M = phat[shift, np.arange(len(xi))[None, :]]
    return OperatorMatrix(M, grid=grid)


def sobolev_weights(grid, s):
    return (1.0 + grid.modes.astype(float) ** 2) ** (s / 2)


def sobolev_norm_circle(u, s, grid=None):
    """(sum_xi <xi>^(2s) |u_hat(xi)|^2)^(1/2) for coefficients on the retained modes."""
    u = np.asarray(u, dtype=complex)
    grid = grid or make_circle_grid((len(u) - 1) // 2)
    if len(u) != grid.size:
        raise ValueError("coefficient vector does not match the grid")
    return float(np.linalg.norm(sobolev_weights(grid, s) * u))


def operator_norm_circle(M, sp_pair):
    """Largest singular value of D_{s_out} M D_{s_in}^{-1}."""
    A = M.todense() if isinstance(M, OperatorMatrix) else np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("operator matrix must be square")
    n = (A.shape[0] - 1) // 2
    xi = np.arange(-n, n + 1, dtype=float)
    w_out = (1 + xi**2) ** (sp_pair.s_out / 2)
    w_in = (1 + xi**2) ** (-sp_pair.s_in / 2)
    return float(np.linalg.norm(w_out[:, None] * A * w_in[None, :], 2))


def _param_magnitudes(lam_values):
    lam = np.asarray(lam_values, dtype=float)
    if lam.ndim == 1:
        lam = lam[:, None]
    return lam, np.linalg.norm(lam, axis=1)


def family_norm_sweep(p, sp_pair, lam_values, grid=None):
    """Operator norms of Op(p)(lam) over a parameter sweep, fitted against <lam>."""
    lam, mags = _param_magnitudes(lam_values)
    if len(lam) < 3:
        raise ValueError("need at least 3 sweep points for a fit")
    norms = [operator_norm_circle(quantize_circle(p, l, grid), sp_pair) for l in lam]
    return SweepReport.from_samples(mags, norms, scale="bracket", order=p.order)


def family_derivative_sweep(p, sp_pair, direction, lam_values, grid=None):
    """Sweep of the norms of Op(d_lam p)(lam), d_lam along parameter ``direction``."""
    if not 0 <= direction < p.param_dim:
        raise ValueError("derivative direction outside the parameter space")
    alpha = [0, 0] + [int(i == direction) for i in range(p.param_dim)]
    return family_norm_sweep(p.derivative(alpha), sp_pair, lam_values, grid)
