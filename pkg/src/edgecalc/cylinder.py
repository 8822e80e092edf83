"""Discretized cylinder R x S^1 and the edge quantization on it.

The line is truncated to [-L, L) with n_r uniform points and treated
periodically.  A ``CylinderFunction`` stores samples u(r_j, x_p); its circle
Fourier coefficients on the retained modes are ``u.coeffs`` with shape
(n_r, 2 n_modes + 1).  The L2 norm is

    ||u||^2 = dr * sum_j sum_xi |u_hat(r_j, xi)|^2,

i.e. the rectangle rule in r (exact for band-limited periodic data) times
Parseval in x with the circle normalization of ``edgecalc.circle``.

The discrete quantization of an edge symbol is

    (Op(a)(eta) u)(r_j) = sum_k exp(i rho_k r_j) a(r_j, rho_k, eta) u_hat(rho_k),
    u_hat(rho_k) = n_r^-1 sum_l exp(-i rho_k r_l) u(r_l),

where a(r, rho, eta) acts on the circle coefficients as the matrix of
``quantize_circle`` of a~(r, [r] rho, [r] eta).
"""
from dataclasses import dataclass

import numpy as np

from .circle import CircleGrid, OperatorMatrix, make_circle_grid
from .cutoffs import bracket_deriv

DEFAULT_CAP = 8192
_ROW_CHUNK = 8


def counter_rng(seed):
    """Counter-based (Philox) generator; streams are reproducible across platforms."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class CylinderGrid:
    half_length: float
    n_r: int
    circle: CircleGrid

    @property
    def dr(self):
        return 2.0 * self.half_length / self.n_r

    @property
    def r(self):
        return -self.half_length + self.dr * np.arange(self.n_r)

    @property
    def rho(self):
        """Dual frequencies in FFT order, spacing pi / L, |rho| <= pi / dr."""
        return 2 * np.pi * np.fft.fftfreq(self.n_r, d=self.dr)

    @property
    def n_modes(self):
        return self.circle.n_modes

    @property
    def xi(self):
        return self.circle.modes

    @property
    def size(self):
        return self.n_r * self.circle.size

    def refined(self, factor=2, modes_factor=1):
        return make_cylinder_grid(self.half_length, self.n_r * factor, self.n_modes * modes_factor)


def make_cylinder_grid(half_length=32.0, n_r=512, n_modes=8):
    """Cylinder grid; n_r must be a power of two and dr = 2L/n_r at most 0.25."""
    n_r = int(n_r)
    if n_r < 2 or n_r & (n_r - 1):
        raise ValueError("n_r must be a power of two")
    if not half_length > 0:
        raise ValueError("half_length must be positive")
    if 2.0 * half_length / n_r > 0.25 + 1e-15:
        raise ValueError("grid spacing 2L/n_r exceeds 0.25")
    return CylinderGrid(float(half_length), n_r, make_circle_grid(n_modes))


class CylinderFunction:
    """Samples of a function on the cylinder grid, shape (n_r, n_points)."""

    def __init__(self, values, grid):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n_r, grid.circle.n_points):
            raise ValueError("values do not match the grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        self.values = values
        self.grid = grid

    @classmethod
    def from_coeffs(cls, coeffs, grid):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (grid.n_r, grid.circle.size):
            raise ValueError("coefficients do not match the grid")
        return cls(grid.circle.from_coefficients(coeffs, axis=1), grid)

    @property
    def coeffs(self):
        return self.grid.circle.to_coefficients(self.values, axis=1)

    def __add__(self, other):
        _check_grid(self.grid, other.grid)
        return CylinderFunction(self.values + other.values, self.grid)

    def __sub__(self, other):
        _check_grid(self.grid, other.grid)
        return CylinderFunction(self.values - other.values, self.grid)

    def __mul__(self, c):
        return CylinderFunction(self.values * c, self.grid)

    __rmul__ = __mul__


def _check_grid(g1, g2):
    if g1 != g2:
        raise ValueError("grid mismatch")


def gaussian(grid, width=1.0, mode=0, center=0.0):
    """exp(-(r - center)^2 / (2 width^2)) * exp(i mode x) on the grid."""
    if abs(mode) > grid.n_modes:
        raise ValueError("mode outside the retained range")
    prof = np.exp(-((grid.r - center) ** 2) / (2.0 * width**2))
    coeffs = np.zeros((grid.n_r, grid.circle.size), dtype=complex)
    coeffs[:, mode + grid.n_modes] = prof
    return CylinderFunction.from_coeffs(coeffs, grid)


# --- transforms --------------------------------------------------------------

def r_transform(f, grid, axis=0):
    """f_hat(rho_k) = n_r^-1 sum_l exp(-i rho_k r_l) f(r_l) along ``axis``."""
    f = np.moveaxis(np.asarray(f, dtype=complex), axis, 0)
    out = np.fft.fft(f, axis=0) / grid.n_r
    phase = np.exp(1j * grid.rho * grid.half_length)
    out *= phase.reshape((-1,) + (1,) * (out.ndim - 1))
    return np.moveaxis(out, 0, axis)


def r_synthesis(fh, grid, axis=0):
    """Inverse of ``r_transform``."""
    fh = np.moveaxis(np.asarray(fh, dtype=complex), axis, 0)
    phase = np.exp(-1j * grid.rho * grid.half_length)
    out = np.fft.ifft(fh * phase.reshape((-1,) + (1,) * (fh.ndim - 1)), axis=0) * grid.n_r
    return np.moveaxis(out, 0, axis)


# --- quantization -------------------------------------------------------------

def _check_eta(a, eta):
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if eta.shape != (a.q,):
        raise ValueError(f"eta must have length {a.q}")
    if a.edge_degenerate and not np.any(eta):
        raise ValueError("eta = 0 is excluded for edge-degenerate symbols")
    return eta


def _multiplier_table(a, eta, r, rho, xi):
    """a(r_j, rho_k, eta, xi) for an x-independent symbol, shape (len(r), len(rho), len(xi))."""
    return a.eval(r[:, None, None], rho[None, :, None], eta, xi[None, None, :].astype(float))


def _circle_coeff_table(a, eta, r, rho, grid):
    """Fourier coefficients in x of a(r_j, rho_k, eta; x, xi), shape (r, rho, n_points, xi)."""
    x = grid.circle.points
    xi = grid.xi.astype(float)
    vals = a.eval(r[:, None, None, None], rho[None, :, None, None], eta,
                  xi[None, None, None, :], x[None, None, :, None])
    return np.fft.fft(vals, axis=2) / grid.circle.n_points


def _circle_matrices(a, eta, r, rho, grid):
    """Circle matrices M[j, k, xi', xi] of a at (r_j, rho_k)."""
    phat = _circle_coeff_table(a, eta, r, rho, grid)
    xi = grid.xi
    shift = (xi[:, None] - xi[None, :]) % grid.circle.n_points
    cols = np.broadcast_to(np.arange(len(xi))[None, :], shift.shape)
    return phat[:, :, shift, cols]


def op_apply(a, eta, u):
    """Apply the discrete Op(a)(eta) to a CylinderFunction."""
    grid = u.grid
    eta = _check_eta(a, eta)
    uh = r_transform(u.coeffs, grid)                      # (rho, xi)
    r, rho = grid.r, grid.rho
    out = np.empty((grid.n_r, grid.circle.size), dtype=complex)
    if not a.x_dependent:
        for j0 in range(0, grid.n_r, 64):
            rows = slice(j0, j0 + 64)
            tab = _multiplier_table(a, eta, r[rows], rho, grid.xi)
            ph = np.exp(1j * r[rows, None] * rho[None, :])
            out[rows] = np.einsum("jkx,jk,kx->jx", tab, ph, uh)
    else:
        for j0 in range(0, grid.n_r, _ROW_CHUNK):
            rows = slice(j0, j0 + _ROW_CHUNK)
            M = _circle_matrices(a, eta, r[rows], rho, grid)
            ph = np.exp(1j * r[rows, None] * rho[None, :])
            out[rows] = np.einsum("jkab,jk,kb->ja", M, ph, uh)
    return CylinderFunction.from_coeffs(out, grid)


def op_apply_adjoint(a, eta, v):
    """Right quantization of the pointwise adjoint symbol, applied to v.

    (A* v)(r_j) = sum_k exp(i rho_k r_j) n_r^-1 sum_l exp(-i rho_k r_l) a(r_l, rho_k, eta)^H v(r_l),
    where ^H is the conjugate transpose of the circle matrix.
    """
    grid = v.grid
    eta = _check_eta(a, eta)
    vc = v.coeffs
    r, rho = grid.r, grid.rho
    acc = np.zeros((grid.n_r, grid.circle.size), dtype=complex)   # indexed (rho, xi)
    if not a.x_dependent:
        for l0 in range(0, grid.n_r, 64):
            rows = slice(l0, l0 + 64)
            tab = np.conj(_multiplier_table(a, eta, r[rows], rho, grid.xi))
            ph = np.exp(-1j * r[rows, None] * rho[None, :])
            acc += np.einsum("lkx,lk,lx->kx", tab, ph, vc[rows])
    else:
        for l0 in range(0, grid.n_r, _ROW_CHUNK):
            rows = slice(l0, l0 + _ROW_CHUNK)
            M = _circle_matrices(a, eta, r[rows], rho, grid)
            ph = np.exp(-1j * r[rows, None] * rho[None, :])
            acc += np.einsum("lkab,lk,la->kb", np.conj(M), ph, vc[rows])
    acc /= grid.n_r
    out = np.exp(1j * r[:, None] * rho[None, :]) @ acc
    return CylinderFunction.from_coeffs(out, grid)


def to_vector(u):
    """Coefficients of u in the unitary (rho, xi) Fourier basis, xi-major."""
    uh = r_transform(u.coeffs, u.grid) * np.sqrt(u.grid.n_r)
    return uh.T.reshape(-1)


def from_vector(vec, grid):
    uh = np.asarray(vec, dtype=complex).reshape(grid.circle.size, grid.n_r).T / np.sqrt(grid.n_r)
    return CylinderFunction.from_coeffs(r_synthesis(uh, grid), grid)


def assemble_matrix(a, eta, grid, cap=DEFAULT_CAP):
    """Matrix of Op(a)(eta) in the unitary (rho, xi) basis (xi-major ordering).

    Symbols that do not depend on x give one n_r x n_r block per circle
    mode; the cap then applies to the block size.  x-dependent symbols give
    a dense matrix whose full dimension must respect the cap.
    """
    eta = _check_eta(a, eta)
    r, rho = grid.r, grid.rho
    n = grid.n_r
    F = np.exp(-1j * rho[:, None] * r[None, :])
    if not a.x_dependent:
        if n > cap:
            raise ValueError(f"block dimension {n} exceeds cap {cap}")
        tab = _multiplier_table(a, eta, r, rho, grid.xi)
        E = np.exp(1j * r[:, None] * rho[None, :])
        blocks = tuple(F @ (tab[:, :, i] * E) / n for i in range(grid.circle.size))
        return OperatorMatrix(blocks=blocks, basis="rho-xi", grid=grid)
    if grid.size > cap:
        raise ValueError(f"dimension {grid.size} exceeds cap {cap}")
    nx = grid.circle.size
    K = np.zeros((nx, n, nx, n), dtype=complex)
    for j0 in range(0, n, _ROW_CHUNK):
        rows = slice(j0, j0 + _ROW_CHUNK)
        M = _circle_matrices(a, eta, r[rows], rho, grid)          # (j, k, a, b)
        E = np.exp(1j * r[rows, None] * rho[None, :])
        K += np.einsum("pj,jk,jkab->apbk", F[:, rows], E, M) / n
    return OperatorMatrix(entries=K.reshape(nx * n, nx * n), basis="rho-xi", grid=grid)


def operator_norm_cyl(a, eta, grid=None, cap=DEFAULT_CAP):
    """Largest singular value of the assembled nominal-grid section of Op(a)(eta).

    Block matrices use exact SVDs per circle mode; dense matrices above
    dimension 4096 use an iterative (Lanczos) estimate with tolerance 1e-6.
    """
    from scipy.sparse.linalg import svds
    grid = grid or make_cylinder_grid()
    M = assemble_matrix(a, eta, grid, cap)
    if M.blocks is not None:
        return max(float(np.linalg.norm(b, 2)) for b in M.blocks)
    A = M.entries
    if A.shape[0] <= 4096:
        return float(np.linalg.norm(A, 2))
    return float(svds(A, k=1, tol=1e-6, return_singular_vectors=False)[0])


# --- norms and inner products ----------------------------------------------------

def inner_cyl(u, v):
    _check_grid(u.grid, v.grid)
    return complex(u.grid.dr * np.vdot(v.coeffs, u.coeffs))


def l2_norm_cyl(u):
    return float(np.sqrt(u.grid.dr) * np.linalg.norm(u.coeffs))


def weighted_norm_cyl(u, w):
    """L2 norm of [r]^w u."""
    weight = bracket_deriv(u.grid.r, 0) ** w
    return float(np.sqrt(u.grid.dr) * np.linalg.norm(weight[:, None] * u.coeffs))


def adjoint_defect(a, eta, trials=4, seed=0, grid=None):
    """max |(A u, v) - (u, A* v)| / (||u|| ||v||) over random Gaussian test pairs."""
    if trials < 1:
        raise ValueError("need at least one trial")
    grid = grid or make_cylinder_grid()
    rng = counter_rng(seed)

    def sample():
        u = CylinderFunction(np.zeros((grid.n_r, grid.circle.n_points)), grid)
        for _ in range(2):
            mode = int(rng.integers(-2, 3))
            c = complex(rng.normal(), rng.normal())
            u = u + c * gaussian(grid, rng.uniform(0.5, 2.0), mode, rng.uniform(-4, 4))
        return u

    worst = 0.0
    for _ in range(trials):
        u, v = sample(), sample()
        lhs = inner_cyl(op_apply(a, eta, u), v)
        rhs = inner_cyl(u, op_apply_adjoint(a, eta, v))
        worst = max(worst, abs(lhs - rhs) / (l2_norm_cyl(u) * l2_norm_cyl(v)))
    return worst


# --- Schwartz seminorms ----------------------------------------------------------

MAX_SEMINORM_ORDER = 6


@dataclass(frozen=True)
class SeminormSpec:
    m: int
    s: int = 0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("seminorm order must be nonnegative")
        if self.m > MAX_SEMINORM_ORDER:
            raise ValueError(f"derivative order too high (m <= {MAX_SEMINORM_ORDER})")


def schwartz_seminorm(u, spec):
    """max over alpha + beta <= m of sup_r ||[r]^alpha d_r^beta u(r)||_{H^s(S^1)}.

    r-derivatives are spectral (multiplication by (i rho)^beta).
    """
    grid = u.grid
    uh = r_transform(u.coeffs, grid)
    w_x = (1.0 + grid.xi.astype(float) ** 2) ** (spec.s / 2)
    b = bracket_deriv(grid.r, 0)
    best = 0.0
    for beta in range(spec.m + 1):
        d = r_synthesis(((1j * grid.rho) ** beta)[:, None] * uh, grid)
        hs = np.linalg.norm(d * w_x[None, :], axis=1)
        for alpha in range(spec.m - beta + 1):
            best = max(best, float(np.max(b**alpha * hs)))
    return best


@dataclass(frozen=True)
class ProbeReport:
    widths: tuple
    ratios: tuple
    max_ratio: float
    min_ratio: float
    spread: float
    passed: bool
    bound: float


def seminorm_ratio_probe(a, eta, inputs=None, m_out=0, s_out=0, spread_bound=100.0,
                         grid=None, mode=1):
    """Ratios pi_{m_out, s_out}(Op(a) u) / pi_{m_out + 6, s_out + ceil(mu)}(u).

    ``inputs`` are Gaussian widths (default 2^-2, ..., 2^2) of test
    functions exp(-r^2 / (2 w^2)) exp(i mode x).  The probe passes when
    max/min of the ratios over the family is at most ``spread_bound``.
    """
    grid = grid or make_cylinder_grid()
    widths = tuple(inputs) if inputs is not None else tuple(2.0**k for k in range(-2, 3))
    spec_out = SeminormSpec(m_out, s_out)
    spec_in = SeminormSpec(m_out + 6, s_out + int(np.ceil(a.mu)))
    ratios = []
    for w in widths:
        u = gaussian(grid, w, mode)
        ratios.append(schwartz_seminorm(op_apply(a, eta, u), spec_out) / schwartz_seminorm(u, spec_in))
    ratios = np.asarray(ratios)
    hi, lo = float(ratios.max()), float(ratios.min())
    spread = hi / lo if lo > 0 else np.inf
    return ProbeReport(widths, tuple(ratios.tolist()), hi, lo, spread, bool(spread <= spread_bound),
                       spread_bound)
