"""Phase-space finite sections for operator norms on the cylinder.

Norms of operators on the cylinder are measured on a subspace of
functions that are concentrated in a window |r| <= window * L and
band-limited to |rho| <= band * pi / dr (dr the nominal grid spacing).  The
subspace is spanned by discrete prolate (Slepian) functions: eigenvectors
of the band-limited window operator whose eigenvalue is at least
1 - ``concentration``.  An operator T is then measured by the norm of its
compression V^H T V, with V an orthonormal basis of the subspace.

Operators are applied on a quadrature grid that refines the nominal r-grid
by ``oversample``.  This keeps the symbol of every product, and of
the bracket [r] itself, resolved, so products of operators are computed
as products of discretized operators without aliasing back into the band.
Plain finite sections of the nominal grid instead show an artificial floor
from the band edge and from the periodic seam at r = +-L.

For symbols that do not depend on x every operator is diagonal in the
circle mode xi, and norms are maxima over per-mode blocks.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cutoffs import bracket_deriv


@dataclass(frozen=True)
class SectionParams:
    oversample: int = 4
    band: float = 0.5
    window: float = 0.5
    concentration: float = 1e-12


class Block:
    """Columns of r-space functions for a set of circle modes.

    ``data`` has shape (n_q, n_xi, ncols); ``band_limited`` marks data that
    lies exactly in the section band, so symbols need only be tabulated there.
    """

    __slots__ = ("data", "xis", "band_limited")

    def __init__(self, data, xis, band_limited=False):
        self.data = data
        self.xis = np.asarray(xis)
        self.band_limited = band_limited

    def __add__(self, other):
        return Block(self.data + other.data, self.xis, self.band_limited and other.band_limited)

    def __sub__(self, other):
        return Block(self.data - other.data, self.xis, self.band_limited and other.band_limited)

    def __mul__(self, c):
        return Block(self.data * c, self.xis, self.band_limited)

    __rmul__ = __mul__


class PhaseSpaceSection:
    """Slepian finite section attached to a nominal cylinder grid."""

    def __init__(self, grid, params=None):
        self.grid = grid
        self.params = params or SectionParams()
        p = self.params
        self.n_q = grid.n_r * p.oversample
        self.dr = 2.0 * grid.half_length / self.n_q
        self.r = -grid.half_length + self.dr * np.arange(self.n_q)
        self.rho = 2 * np.pi * np.fft.fftfreq(self.n_q, d=self.dr)
        cutoff = p.band * np.pi / grid.dr
        self.band_idx = np.nonzero(np.abs(self.rho) <= cutoff + 1e-9)[0]
        self.bracket = bracket_deriv(self.r, 0)

    @cached_property
    def basis(self):
        """Orthonormal Slepian basis V, shape (n_q, m)."""
        p = self.params
        Q = np.exp(-1j * self.rho[self.band_idx, None] * self.r[None, :]) / np.sqrt(self.n_q)
        inside = (np.abs(self.r) <= p.window * self.grid.half_length).astype(float)
        T = (Q * inside[None, :]) @ Q.conj().T
        lam, w = np.linalg.eigh(T)
        keep = lam >= 1.0 - p.concentration
        if not np.any(keep):
            raise ValueError("section is empty; enlarge band or window")
        return Q.conj().T @ w[:, keep]

    @property
    def dim(self):
        return self.basis.shape[1]

    @cached_property
    def _phase_full(self):
        return np.exp(1j * self.r[:, None] * self.rho[None, :])

    @cached_property
    def _phase_band(self):
        return np.ascontiguousarray(self._phase_full[:, self.band_idx])

    def transform(self, data):
        """f_hat(rho_k) = n_q^-1 sum_l exp(-i rho_k r_l) f(r_l) along axis 0."""
        out = np.fft.fft(data, axis=0) / self.n_q
        phase = np.exp(1j * self.rho * self.grid.half_length)
        return out * phase.reshape((-1,) + (1,) * (data.ndim - 1))

    def basis_block(self, xis):
        xis = np.asarray(xis)
        V = self.basis
        if len(xis) == 1:
            return Block(V[:, None, :].copy(), xis, True)
        m = V.shape[1]
        data = np.zeros((self.n_q, len(xis), len(xis) * m), dtype=complex)
        for i in range(len(xis)):
            data[:, i, i * m:(i + 1) * m] = V
        return Block(data, xis, True)

    # --- operator application ---------------------------------------------

    def apply_symbol(self, a, eta, block):
        """Op(a)(eta) applied to the block on the quadrature grid."""
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        if block.band_limited:
            idx, E = self.band_idx, self._phase_band
        else:
            idx, E = slice(None), self._phase_full
        rho = self.rho[idx]
        xh = self.transform(block.data)[idx]                  # (k, n_xi, c)
        out = np.empty_like(block.data)
        if not a.x_dependent:
            for i, xi in enumerate(block.xis):
                tab = a.eval(self.r[:, None], rho[None, :], eta, float(xi))
                out[:, i, :] = (tab * E) @ xh[:, i, :]
            return Block(out, block.xis)
        return Block(self._apply_coupled(a, eta, rho, E, xh, block.xis), block.xis)

    def _apply_coupled(self, a, eta, rho, E, xh, xis):
        """x-dependent symbols: collocation in x, evaluated in r-chunks."""
        n_x = 2 * (len(xis) // 2) + 2
        x = 2 * np.pi * np.arange(n_x) / n_x
        xi = np.asarray(xis, dtype=float)
        shift = (xis[:, None] - xis[None, :]) % n_x
        cols = np.broadcast_to(np.arange(len(xis))[None, :], shift.shape)
        out = np.empty((self.n_q,) + xh.shape[1:], dtype=complex)
        for j0 in range(0, self.n_q, 4):
            rows = slice(j0, j0 + 4)
            vals = a.eval(self.r[rows, None, None, None], rho[None, :, None, None], eta,
                          xi[None, None, None, :], x[None, None, :, None])
            phat = np.fft.fft(vals, axis=2) / n_x
            M = phat[:, :, shift, cols]
            out[rows] = np.einsum("jkab,jk,kbc->jac", M, E[rows], xh)
        return out

    def apply_weight(self, w, block):
        """Multiply by the function w(r) given on the quadrature grid."""
        return Block(block.data * np.asarray(w)[:, None, None], block.xis)

    def bracket_power(self, g):
        return self.bracket ** g

    # --- norms --------------------------------------------------------------

    @cached_property
    def _basis_h(self):
        return np.ascontiguousarray(self.basis.conj().T)

    def compress(self, block):
        """V^H applied per circle mode, stacked mode-major."""
        Vh = self._basis_h
        return np.concatenate([Vh @ block.data[:, i, :] for i in range(block.data.shape[1])])

    def operator_norm(self, op, xis, coupled=False):
        """Norm of the compression V^H T V of the operator ``op`` (Block -> Block).

        With ``coupled`` false the operator must not mix circle modes and the
        norm is the maximum over per-mode blocks.
        """
        return max(self.block_norms(op, xis, coupled).values())

    def block_norms(self, op, xis, coupled=False):
        if coupled:
            block = self.basis_block(xis)
            return {None: float(np.linalg.norm(self.compress(op(block)), 2))}
        out = {}
        for xi in xis:
            out[int(xi)] = float(np.linalg.norm(self.compress(op(self.basis_block([xi]))), 2))
        return out

    def compressed(self, op, xi):
        """The compressed matrix V^H T V for one circle mode."""
        return self.compress(op(self.basis_block([xi])))


_SECTIONS = {}


def get_section(grid, params=None):
    """Cached section per (grid, params)."""
    params = params or SectionParams()
    key = (grid, params)
    if key not in _SECTIONS:
        if len(_SECTIONS) > 4:
            _SECTIONS.pop(next(iter(_SECTIONS)))
        _SECTIONS[key] = PhaseSpaceSection(grid, params)
    return _SECTIONS[key]
