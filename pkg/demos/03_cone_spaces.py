"""Order reductions of weighted cone spaces and a mapping bound.

For (s, g) the reduction Op([r]^(-s+g) p~)(eta) and its candidate inverse
are composed on the phase-space section; the residual of the product falls
off in eta.  The mapping bound of an order (-1, 0) operator from H^{s,g}
to H^{s+1,g} is then printed over eta, showing its decay on the section.
"""
import numpy as np

from edgecalc.cone import iso_residual, make_space, mapping_sweep
from edgecalc.cylinder import make_cylinder_grid
from edgecalc.symbols import get_symbol

grid = make_cylinder_grid(8.0, 64, 4)
for s, g in ((0, 0), (1, 0), (2, 1), (-1, 1)):
    spec = make_space(s, g, grid=grid)
    res = [iso_residual(spec, e, grid) for e in (1.0, 16.0, 256.0)]
    print(f"(s,g)=({s},{g}) anchor {spec.anchor_eta[0]:g}: iso residuals at 1, 16, 256 "
          f"{np.array2string(np.array(res), precision=3)}")

rep = mapping_sweep(get_symbol("elliptic:-1"), 1, 0, 2.0 ** np.arange(2, 9), grid)
print("mapping bound over eta = 4..256:", np.array2string(rep.values, precision=3))
print("certificate", round(rep.meta["certificate"], 3))
