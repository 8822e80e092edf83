"""Norm growth of the order-reducing family and the effect of the mode cutoff.

||R^mu(lam)|| on L2(S^1) is max over |xi| <= n_modes of <xi, lam>^mu.  At
n_modes = 8 the sweep lam = 1..256 crosses from the mode-dominated regime
(flat) to the lam-dominated regime (slope mu), so a single straight-line fit
through both regimes has a large residual.  Raising n_modes past the largest
lam moves the kink out of the sweep, at the price of a flat fit for mu > 0.
"""
from edgecalc import harness

for n_modes in (8, 64, 256):
    for mu in (-2, 1):
        cfg = harness.ExperimentConfig("norm-growth", f"order-reduce:{mu}", n_modes=n_modes)
        out = harness.run(cfg)
        print(f"n_modes={n_modes:3d} mu={mu:+d}: {'PASS' if out.passed else 'FAIL'} {out.detail}")
