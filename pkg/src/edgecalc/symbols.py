"""Edge-degenerate symbols a(r, rho, eta) = a~(r, [r] rho, [r] eta).

An ``EdgeSymbol`` stores the tilde-level function a~(r, rho_t, eta_t; x, xi)
as a sympy expression together with its orders (mu, nu): mu is the
operator order in (xi, rho, eta) and nu the growth order in r.  Derivatives
in the original variables are pushed through the bracket scaling:

    d_rho  a = [r] (d_rho_t a~)
    d_eta  a = [r] (d_eta_t a~)
    d_r    a = (d_r a~) + ([r]'/[r]) (rho_t d_rho_t a~ + eta_t . d_eta_t a~)

all evaluated at (r, [r] rho, [r] eta).  ``d_rho`` and ``d_eta`` lower mu by
one and raise nu by one; ``d_r`` lowers nu by one.
"""
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import sympy as sp

from .circle import CircleSymbol, SobolevPair, make_circle_grid, operator_norm_circle, quantize_circle
from .cutoffs import MAX_DERIV, bracket, bracket_deriv, sym_bracket, sym_excision
from .fitting import DegenerateSweep, fit_exponent
from .symbolic import R, RHO, XI, X, callable_function, compile_expr, eta_symbols, evaluate, japanese, lam_symbols

DEFAULT_USER_DEPTH = 6


class OracleDepthError(ValueError):
    """Raised when more derivatives are requested than a symbol supports."""


@dataclass(frozen=True, eq=False)
class EdgeSymbol:
    """Symbol of orders (mu, nu) given by its tilde-level expression.

    ``depth`` is the number of further derivatives the symbol supports;
    closed-form symbols are limited only by the bracket's derivative table.
    """

    tilde: sp.Expr
    mu: float
    nu: float
    q: int = 1
    depth: int = MAX_DERIV
    label: str = ""
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def args(self):
        return (R, RHO) + eta_symbols(self.q) + (XI, X)

    @property
    def x_dependent(self):
        return X in self.tilde.free_symbols

    @property
    def edge_degenerate(self):
        """True when the symbol depends on the scaled covariables."""
        return bool(self.tilde.free_symbols & ({RHO} | set(eta_symbols(self.q))))

    @property
    def is_zero(self):
        return self.tilde == 0

    @cached_property
    def _fn(self):
        return compile_expr(self.tilde, self.args)

    def eval_tilde(self, r, rho_t, eta_t, xi, x=0.0):
        """Evaluate a~ at scaled covariables; ``eta_t`` has trailing axis q (or is scalar for q = 1)."""
        eta_t = _split_eta(eta_t, self.q)
        return evaluate(self._fn, r, rho_t, *eta_t, xi, x)

    def eval(self, r, rho, eta, xi, x=0.0):
        """Evaluate a(r, rho, eta) = a~(r, [r] rho, [r] eta) with broadcasting."""
        r = np.asarray(r, dtype=float)
        b = bracket_deriv(r, 0)
        eta = _split_eta(eta, self.q)
        return evaluate(self._fn, r, b * np.asarray(rho), *(b * np.asarray(e) for e in eta), xi, x)

    def circle_family(self):
        """The tilde symbol as a circle family with parameters (r, rho_t, eta_t...)."""
        lam = lam_symbols(2 + self.q)
        expr = self.tilde.xreplace(dict(zip((R, RHO) + eta_symbols(self.q), lam)))
        return CircleSymbol(expr, self.mu, 2 + self.q)

    def with_orders(self, mu, nu, label=None):
        return replace(self, mu=float(mu), nu=float(nu), label=label or self.label)


def _split_eta(eta, q):
    eta = np.asarray(eta, dtype=float)
    if q == 1 and (eta.ndim == 0 or eta.shape[-1] != 1):
        return (eta,)
    if eta.shape[-1] != q:
        raise ValueError(f"edge covariable must have length {q}")
    return tuple(np.moveaxis(eta, -1, 0))


def make_edge_symbol(tilde, mu, nu, q=1, depth=None, label=""):
    """Edge symbol from a sympy expression or a callable tilde(r, rho_t, *eta_t, xi, x).

    Callables get finite-difference derivative oracles of total order up to
    ``depth`` (default 6).
    """
    if isinstance(tilde, sp.Basic) or isinstance(tilde, (int, float, complex)):
        expr = sp.sympify(tilde)
        allowed = {R, RHO, XI, X} | set(eta_symbols(q))
        extra = expr.free_symbols - allowed
        if extra:
            raise ValueError(f"unexpected variables in symbol: {sorted(map(str, extra))}")
        depth = MAX_DERIV if depth is None else depth
    elif callable(tilde):
        depth = DEFAULT_USER_DEPTH if depth is None else depth
        cls = callable_function(tilde, 4 + q, name="edge")
        expr = cls(R, RHO, *eta_symbols(q), XI, X)
    else:
        raise TypeError("tilde must be a sympy expression or a callable")
    if depth < 0:
        raise OracleDepthError("missing derivative oracle")
    return EdgeSymbol(expr, float(mu), float(nu), q, depth, label)


def _d_rho(expr):
    return sym_bracket(R) * sp.diff(expr, RHO)


def _d_eta(expr, var):
    return sym_bracket(R) * sp.diff(expr, var)


def _d_r(expr, q):
    b = sym_bracket(R)
    euler = RHO * sp.diff(expr, RHO) + sum(e * sp.diff(expr, e) for e in eta_symbols(q))
    return sp.diff(expr, R) + sp.diff(b, R) / b * euler


def edge_deriv(a, i=0, j=0, alpha=None):
    """d_r^i d_rho^j d_eta^alpha a, with orders (mu - j - |alpha|, nu - i + j + |alpha|)."""
    alpha = tuple(alpha) if alpha is not None else (0,) * a.q
    if len(alpha) != a.q:
        raise ValueError(f"eta multi-index must have length {a.q}")
    if min((i, j) + alpha) < 0:
        raise ValueError("derivative orders must be nonnegative")
    total = i + j + sum(alpha)
    if total > a.depth:
        raise OracleDepthError(f"oracle depth exceeded: {total} > {a.depth}")
    expr = a.tilde
    for _ in range(j):
        expr = _d_rho(expr)
    for var, n in zip(eta_symbols(a.q), alpha):
        for _ in range(n):
            expr = _d_eta(expr, var)
    for _ in range(i):
        expr = _d_r(expr, a.q)
    mu = a.mu - j - sum(alpha)
    nu = a.nu - i + j + sum(alpha)
    return EdgeSymbol(expr, mu, nu, a.q, a.depth - total, a.label)


def edge_multiply(a, b):
    """Pointwise product at tilde level; orders add."""
    if a.q != b.q:
        raise ValueError("edge covariable dimensions differ")
    label = f"{a.label}*{b.label}" if a.label and b.label else ""
    return EdgeSymbol(a.tilde * b.tilde, a.mu + b.mu, a.nu + b.nu, a.q, min(a.depth, b.depth), label)


def edge_add(a, b):
    """Sum of two symbols; orders are the componentwise maxima."""
    if a.q != b.q:
        raise ValueError("edge covariable dimensions differ")
    return EdgeSymbol(a.tilde + b.tilde, max(a.mu, b.mu), max(a.nu, b.nu), a.q, min(a.depth, b.depth))


def edge_scale(a, c):
    return replace(a, tilde=sp.sympify(c) * a.tilde)


def bracket_power(g, q=1):
    """The r-multiplier [r]^g, of orders (0, g)."""
    g = sp.nsimplify(g)
    return EdgeSymbol(sym_bracket(R) ** g, 0.0, float(g), q, MAX_DERIV, f"[r]^{g}")


def elliptic_model(s, q=1):
    """<xi, rho_t, eta_t>^s, of orders (s, 0)."""
    s = sp.nsimplify(s)
    return EdgeSymbol(japanese(XI, RHO, *eta_symbols(q)) ** s, float(s), 0.0, q, MAX_DERIV, f"elliptic:{s}")


# --- registry -------------------------------------------------------------

def _num(text):
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"bad number {text!r} in symbol id") from None
    if not np.isfinite(value):
        raise ValueError(f"bad number {text!r} in symbol id")
    return value


def symbol_ids():
    """Registered generator patterns with a short description."""
    return {
        "one": "constant symbol 1, orders (0, 0)",
        "elliptic:s": "<xi, rho_t, eta_t>^s, orders (s, 0)",
        "weighted-elliptic:s:g": "[r]^g <xi, rho_t, eta_t>^s, orders (s, g)",
        "cosx-perturbed:s": "(1 + cos(x)/2) <xi, rho_t, eta_t>^s, orders (s, 0)",
        "order-reduce:s": "order-reducing family <xi, rho_t, eta_t>^s, orders (s, 0)",
    }


def get_symbol(symbol_id, q=1):
    """Build a registered generator from its string id."""
    if not isinstance(symbol_id, str):
        raise ValueError("symbol id must be a string")
    parts = symbol_id.split(":")
    name, params = parts[0], parts[1:]
    if name == "one" and not params:
        sym = EdgeSymbol(sp.Integer(1), 0.0, 0.0, q)
    elif name in ("elliptic", "order-reduce") and len(params) == 1:
        sym = elliptic_model(sp.nsimplify(_num(params[0])), q)
    elif name == "weighted-elliptic" and len(params) == 2:
        s, g = sp.nsimplify(_num(params[0])), sp.nsimplify(_num(params[1]))
        sym = edge_multiply(bracket_power(g, q), elliptic_model(s, q))
    elif name == "cosx-perturbed" and len(params) == 1:
        base = elliptic_model(sp.nsimplify(_num(params[0])), q)
        sym = replace(base, tilde=(1 + sp.cos(X) / 2) * base.tilde)
    else:
        raise ValueError(f"unknown symbol id {symbol_id!r}")
    return replace(sym, label=symbol_id)


# --- defining-estimate checker -------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    """Samples for the seminorm checker.

    r_samples : r values; the r-exponent is fitted over those with |r| >= 2.
    cov_samples : magnitudes t of scaled covariables, used along the
        directions (rho_t, eta_t) = t * unit vectors in ``directions``.
    orders : r-derivative orders k (at most 2).
    pair : Sobolev pair for the circle operator norm; default (max(mu, 0), 0).
    """

    r_samples: tuple = (0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
    cov_samples: tuple = tuple(2.0**k for k in range(-2, 9))
    orders: tuple = (0, 1, 2)
    pair: SobolevPair = None
    n_modes: int = 8
    threshold: float = 1e3
    directions: tuple = ((1.0, 0.0), (0.0, 1.0), (0.6, 0.8))


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    max_ratio: float
    ratios: dict
    r_exponents: dict
    cov_exponent: float
    threshold: float


def _directions(spec, q):
    dirs = []
    for d in spec.directions:
        d = np.zeros(1 + q) + np.resize(np.asarray(d, dtype=float), 1 + q)
        dirs.append(d / np.linalg.norm(d))
    return dirs


def seminorm_check(a, spec=None):
    """Check the defining estimates of the symbol class on samples.

    For each r-derivative order k the circle operator norm of d_r^k a~(r)
    at frozen scaled covariables z = (rho_t, eta_t) is divided by
    <z>^w with w = max(mu, mu - (s_in - s_out)), maximized over z, and
    multiplied by [r]^(k - nu).  The check passes when every such ratio
    is at most ``threshold`` and the r-exponent fitted over |r| >= 2 is at
    most nu - k + 0.15 for each k.
    """
    spec = spec or SampleSpec()
    if not spec.r_samples or not spec.cov_samples or not spec.orders:
        raise ValueError("empty samples")
    if max(spec.orders) > 2:
        raise ValueError("r-derivative orders above 2 are not checked")
    pair = spec.pair or SobolevPair(max(a.mu, 0.0), 0.0)
    w = max(a.mu, a.mu - (pair.s_in - pair.s_out))
    grid = make_circle_grid(spec.n_modes)
    dirs = _directions(spec, a.q)
    ratios, r_exps = {}, {}
    cov_norms = None
    for k in spec.orders:
        expr = a.tilde
        for _ in range(k):
            expr = sp.diff(expr, R)
        fam = EdgeSymbol(expr, a.mu, a.nu - k, a.q).circle_family()
        sup_r = []
        for r in spec.r_samples:
            best = 0.0
            norms = []
            for t in spec.cov_samples:
                for d in dirs:
                    z = t * d
                    n = operator_norm_circle(quantize_circle(fam, np.r_[r, z], grid), pair)
                    best = max(best, n * (1 + t * t) ** (-w / 2))
                    norms.append(n)
            if k == 0 and cov_norms is None:
                cov_norms = np.asarray(norms).reshape(len(spec.cov_samples), len(dirs)).max(axis=1)
            sup_r.append(best)
        sup_r = np.asarray(sup_r)
        rb = bracket(np.asarray(spec.r_samples, dtype=float))
        ratios[k] = float(np.max(sup_r * rb ** (k - a.nu)))
        far = np.abs(np.asarray(spec.r_samples)) >= 2
        try:
            r_exps[k] = fit_exponent(np.abs(np.asarray(spec.r_samples))[far], sup_r[far],
                                     zero_tol=1e-13).exponent
        except DegenerateSweep:
            r_exps[k] = -np.inf if np.all(sup_r[far] <= 1e-13) else np.nan
    try:
        cov_exp = fit_exponent(spec.cov_samples, cov_norms, scale="bracket", zero_tol=1e-13).exponent
    except DegenerateSweep:
        cov_exp = -np.inf
    max_ratio = max(ratios.values())
    ok = max_ratio <= spec.threshold and all(
        not np.isnan(r_exps[k]) and r_exps[k] <= a.nu - k + 0.15 for k in spec.orders)
    return CheckReport(bool(ok), max_ratio, ratios, r_exps, cov_exp, spec.threshold)


# --- asymptotic summation --------------------------------------------------

@dataclass(frozen=True)
class AsymptoticSumPlan:
    """Terms a~_j of orders mu - j summed with excision factors chi(z / c_j).

    ``constants`` may be left empty to have them chosen automatically.
    The excision acts on the scaled covariables z = (rho_t, eta_t).
    """

    terms: tuple
    constants: tuple = ()
    check_r: tuple = (0.0, 2.0, 8.0)
    check_cov: tuple = tuple(2.0**k for k in range(0, 11))
    n_modes: int = 8


def _excised(term, c):
    chi = sym_excision(RHO, *eta_symbols(term.q), scale=sp.nsimplify(c))
    return replace(term, tilde=chi * term.tilde)


def _contribution(term, mu0, plan, pair):
    """sup over the check grid of the circle norm of a term, in units of <z>^mu0."""
    grid = make_circle_grid(plan.n_modes)
    fam = term.circle_family()
    out = 0.0
    for r in plan.check_r:
        for t in plan.check_cov:
            z = np.zeros(1 + term.q)
            z[0] = t
            n = operator_norm_circle(quantize_circle(fam, np.r_[r, z], grid), pair)
            out = max(out, n * (1 + t * t) ** (-mu0 / 2))
    return out


def asymptotic_sum(plan):
    """Finite excised sum sum_j chi(z / c_j) a~_j as an EdgeSymbol.

    Missing constants are chosen as the smallest powers of two, strictly
    increasing in j, for which the j-th excised term's contribution on the
    check grid is at most 2^-j times the leading term's.
    """
    terms = list(plan.terms)
    if not terms:
        raise ValueError("empty asymptotic sum")
    for prev, nxt in zip(terms, terms[1:]):
        if not nxt.mu < prev.mu:
            raise ValueError("term order not decreasing")
        if nxt.q != prev.q:
            raise ValueError("edge covariable dimensions differ")
    mu0 = terms[0].mu
    pair = SobolevPair(max(mu0, 0.0), 0.0)
    consts = list(plan.constants)
    if consts and len(consts) != len(terms):
        raise ValueError("need one constant per term")
    if not consts:
        consts = [1.0]
        lead = _contribution(_excised(terms[0], 1.0), mu0, plan, pair)
        for j, term in enumerate(terms[1:], start=1):
            c = 2.0 * consts[-1]
            while _contribution(_excised(term, c), mu0, plan, pair) > 2.0**-j * lead:
                c *= 2.0
                if c > 2.0**40:
                    raise ValueError("could not calibrate excision constant")
            consts.append(c)
    if any(b <= a_ for a_, b in zip(consts, consts[1:])) or consts[0] <= 0:
        raise ValueError("excision constants must be positive and strictly increasing")
    total = sum((_excised(t, c).tilde for t, c in zip(terms, consts)), sp.Integer(0))
    depth = min(t.depth for t in terms)
    nu = max(t.nu for t in terms)
    return EdgeSymbol(total, mu0, nu, terms[0].q, depth, meta={"constants": tuple(consts)})
