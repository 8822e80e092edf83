"""Shared sympy variables, compilation of expressions, and callable wrapping.

Symbols are stored as sympy expressions in a fixed set of variables so that
derivatives are exact.  Plain Python callables are accepted too: they are
wrapped in a sympy ``Function`` whose derivatives are evaluated by nested
centered finite differences.
"""
from functools import lru_cache

import numpy as np
import sympy as sp

from .cutoffs import BracketD, ExcisionD

X = sp.Symbol("x", real=True)
XI = sp.Symbol("xi", real=True)
R = sp.Symbol("r", real=True)
RHO = sp.Symbol("rho_t", real=True)


@lru_cache(maxsize=None)
def eta_symbols(q):
    """Edge covariables eta_t0, ..., eta_t{q-1} (already scaled by [r])."""
    return tuple(sp.Symbol(f"eta_t{i}", real=True) for i in range(q))


@lru_cache(maxsize=None)
def lam_symbols(n):
    """Circle-family parameters lam0, ..., lam{n-1}."""
    return tuple(sp.Symbol(f"lam{i}", real=True) for i in range(n))


def japanese(*components):
    """Symbolic <z> = (1 + |z|^2)^(1/2)."""
    return sp.sqrt(1 + sum(c**2 for c in components))


_MODULES = [{"BracketD": BracketD._imp_, "ExcisionD": ExcisionD._imp_}, "numpy"]


def compile_expr(expr, args):
    """Lambdify ``expr`` in ``args`` with common-subexpression elimination."""
    return sp.lambdify(args, expr, modules=_MODULES, cse=True)


def evaluate(fn, *arrays):
    """Call a compiled expression and broadcast the result to the full shape."""
    arrays = [np.asarray(a) for a in arrays]
    shape = np.broadcast_shapes(*(a.shape for a in arrays))
    with np.errstate(over="ignore", under="ignore"):
        out = fn(*arrays)
    out = np.asarray(out)
    if out.dtype.kind not in "fc":
        out = out.astype(float)
    return np.broadcast_to(out, shape)


_EPS = np.finfo(float).eps
_FD_CLASSES = {}
_FD_NAMES = {}


def _fd_derivative(fn, index, args):
    order = sum(index)
    if order == 0:
        return np.asarray(fn(*args), dtype=complex)
    i = next(j for j, n in enumerate(index) if n)
    h = _EPS ** (1.0 / (order + 2)) * (1.0 + np.abs(args[i]))
    lower = tuple(n - (j == i) for j, n in enumerate(index))
    plus = list(args)
    minus = list(args)
    plus[i] = args[i] + h
    minus[i] = args[i] - h
    return (_fd_derivative(fn, lower, plus) - _fd_derivative(fn, lower, minus)) / (2 * h)


def callable_function(fn, nargs, name="user", index=None):
    """Wrap a numeric callable as a sympy Function class.

    Derivatives of the returned class are new classes of the same kind whose
    numeric implementation applies nested centered differences with step
    ``eps**(1/(m+2)) * (1 + |arg|)`` for a derivative of total order m.
    """
    index = tuple(index) if index is not None else (0,) * nargs
    # printed names must be unique per callable for lambdify namespaces
    base = _FD_NAMES.setdefault(id(fn), f"{name}{len(_FD_NAMES)}")
    key = (id(fn), index)
    if key in _FD_CLASSES:
        return _FD_CLASSES[key][0]

    def imp(*args):
        args = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
        return _fd_derivative(fn, index, args)

    def fdiff(self, argindex=1):
        raised = list(index)
        raised[argindex - 1] += 1
        return callable_function(fn, nargs, name, raised)(*self.args)

    suffix = "" if not any(index) else "_d" + "".join(map(str, index))
    cls = type(f"{base}{suffix}", (sp.Function,), {
        "nargs": nargs,
        "fdiff": fdiff,
        "_imp_": staticmethod(imp),
    })
    # keep fn alive so its id stays unique
    _FD_CLASSES[key] = (cls, fn)
    return cls
