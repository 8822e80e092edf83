"""Smooth cutoff functions: the bracket [r] and the radial excision function.

Both are built from the bump ``exp(-1/t)``.  The smooth step

    step(t) = f(t) / (f(t) + f(1 - t)),   f(t) = exp(-1/t) for t > 0,

vanishes for ``t <= 0`` and equals one for ``t >= 1``.  The bracket blends
``sqrt(1 + r**2)`` (near the origin) into ``|r|`` (for ``|r| >= 2``), and the
excision function is ``step`` applied to a rescaled ``|z|**2``.

Each function is also exposed as a sympy ``Function`` whose derivatives are
again of the same family, so symbolic differentiation of symbols containing
``[r]`` or an excision factor stays closed-form and can be lambdified.
"""
from functools import lru_cache

import numpy as np
import sympy as sp

MAX_DERIV = 10

_t = sp.Symbol("t", real=True)
_f = sp.exp(-1 / _t)
_g = sp.exp(-1 / (1 - _t))
_STEP = _f / (_f + _g)

# below this distance from the transition endpoints the step is flat to
# within exp(-1000), which underflows to zero in double precision
_EDGE = 1e-3


@lru_cache(maxsize=None)
def _step_deriv_fn(k):
    return sp.lambdify(_t, sp.diff(_STEP, _t, k), "numpy")


def smooth_step(t, k=0):
    """k-th derivative of the smooth step at ``t`` (array-like)."""
    if k < 0 or k > MAX_DERIV:
        raise ValueError(f"derivative order {k} outside 0..{MAX_DERIV}")
    t = np.asarray(t, dtype=float)
    shape = t.shape
    t = t.reshape(-1)
    if k == 0:
        out = (t >= 1.0).astype(float)
    else:
        out = np.zeros_like(t)
    inner = (t > _EDGE) & (t < 1.0 - _EDGE)
    if np.any(inner):
        with np.errstate(over="ignore", under="ignore"):
            out[inner] = _step_deriv_fn(k)(t[inner])
    return out.reshape(shape)


_a = sp.Symbol("a", positive=True)
_BLEND = (1 - _STEP.subs(_t, _a - 1)) * sp.sqrt(1 + _a**2) + _STEP.subs(_t, _a - 1) * _a


@lru_cache(maxsize=None)
def _bracket_pieces(k):
    inner = sp.lambdify(_a, sp.diff(sp.sqrt(1 + _a**2), _a, k), "numpy")
    blend = sp.lambdify(_a, sp.diff(_BLEND, _a, k), "numpy")
    return inner, blend


def bracket_deriv(r, k=0):
    """k-th derivative of the bracket [r].

    [r] = beta(r) sqrt(1 + r^2) + (1 - beta(r)) |r| with beta = 1 on |r| <= 1
    and beta = 0 on |r| >= 2.  The bracket is even, so the k-th derivative at
    negative r is (-1)^k times the value at |r|.
    """
    if k < 0 or k > MAX_DERIV:
        raise ValueError(f"derivative order {k} outside 0..{MAX_DERIV}")
    r = np.asarray(r, dtype=float)
    shape = r.shape
    r = r.reshape(-1)
    a = np.abs(r)
    inner_fn, blend_fn = _bracket_pieces(k)
    if k == 0:
        out = a.copy()
    elif k == 1:
        out = np.ones_like(a)
    else:
        out = np.zeros_like(a)
    near = a <= 1.0 + _EDGE
    if np.any(near):
        out[near] = inner_fn(a[near])
    mid = (a > 1.0 + _EDGE) & (a < 2.0 - _EDGE)
    if np.any(mid):
        with np.errstate(over="ignore", under="ignore"):
            out[mid] = blend_fn(a[mid])
    if k % 2 == 1:
        out = np.where(r < 0, -out, out)
    return out.reshape(shape)


def bracket(r):
    """The bracket [r]: smooth, >= 1, and exactly |r| for |r| >= 2."""
    out = bracket_deriv(r, 0)
    return out if out.ndim else float(out)


def excision_profile(u, k=0):
    """k-th derivative of the excision profile as a function of u = |z|^2.

    The profile vanishes for u <= 1/4 and is one for u >= 1, so the
    excision function chi(z) = profile(|z|^2) vanishes for |z| <= 1/2 and is
    one outside the unit ball.
    """
    u = np.asarray(u, dtype=float)
    scale = (4.0 / 3.0) ** k
    return scale * smooth_step((u - 0.25) * 4.0 / 3.0, k)


class BracketD(sp.Function):
    """``BracketD(k, r)`` is the k-th derivative of the bracket at r."""

    nargs = 2

    def fdiff(self, argindex=2):
        if argindex != 2:
            raise sp.ArgumentIndexError(self, argindex)
        k, r = self.args
        return BracketD(k + 1, r)

    _imp_ = staticmethod(lambda k, r: bracket_deriv(r, int(k)))


class ExcisionD(sp.Function):
    """``ExcisionD(k, u)``: k-th derivative of the excision profile in u = |z|^2."""

    nargs = 2

    def fdiff(self, argindex=2):
        if argindex != 2:
            raise sp.ArgumentIndexError(self, argindex)
        k, u = self.args
        return ExcisionD(k + 1, u)

    _imp_ = staticmethod(lambda k, u: excision_profile(u, int(k)))


def sym_bracket(r):
    """Symbolic [r]."""
    return BracketD(0, r)


def sym_excision(*components, scale=1):
    """Symbolic chi(z / scale) for z given by its components."""
    u = sum(c**2 for c in components) / sp.sympify(scale) ** 2
    return ExcisionD(0, u)
