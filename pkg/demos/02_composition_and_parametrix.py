"""Leibniz composition remainders and a left parametrix on the cylinder.

Runs on a coarse grid so it finishes in a few seconds.  The composition
defect ||Op(a)Op(b) - sum_k Op(c_k)|| decays faster in eta as more Leibniz
terms are subtracted, and the excised inverse of an elliptic symbol gives a
left inverse up to a residual that shrinks with eta.
"""
import numpy as np

from edgecalc.calculus import composition_sweep, injectivity_certificate, left_inverse_residual
from edgecalc.cylinder import make_cylinder_grid
from edgecalc.symbols import get_symbol

grid = make_cylinder_grid(8.0, 64, 4)
etas = 2.0 ** np.arange(0, 9, 2)
a, b = get_symbol("elliptic:-1"), get_symbol("elliptic:1")
for N in (0, 1, 2):
    rep = composition_sweep(a, b, N, etas, grid)
    print(f"N={N}: defects {np.array2string(rep.values, precision=2)}, exponent {rep.exponent:.3f}")

p = get_symbol("elliptic:2")
for eta in etas:
    res = left_inverse_residual(p, np.array([eta]), 1, grid)
    cert = injectivity_certificate(p, np.array([eta]), grid, residual=float(res))
    print(f"eta={eta:5g}: left inverse residual {float(res):.3g}, full column rank {cert['full_rank']}")
