"""Numerical toolkit for edge-degenerate pseudo-differential operators on the
cylinder R x S^1: circle quantization of parameter-dependent symbols, edge
symbols in scaled covariables, their quantization on a discretized cylinder,
Leibniz products and parametrices, weighted cone Sobolev spaces, and an
experiment harness that measures the predicted growth and decay rates.
"""
from .circle import (CircleGrid, SobolevPair, circle_symbol, family_derivative_sweep,
                     family_norm_sweep, make_circle_grid, operator_norm_circle,
                     order_reducing_family, quantize_circle, sobolev_norm_circle)
from .cone import ConeSpaceSpec, cone_norm, iso_residual, make_space, mapping_bound, mapping_sweep
from .calculus import (commute_weight, composition_defect, composition_sweep,
                       injectivity_certificate, left_inverse_residual, leibniz_terms,
                       neumann_correct, neumann_residual, operator_norm_section, parametrix)
from .cutoffs import bracket, bracket_deriv, excision_profile
from .cylinder import (CylinderFunction, SeminormSpec, adjoint_defect, assemble_matrix, gaussian,
                       l2_norm_cyl, make_cylinder_grid, op_apply, op_apply_adjoint,
                       schwartz_seminorm, seminorm_ratio_probe, weighted_norm_cyl)
from .fitting import DegenerateSweep, SweepReport, fit_exponent
from .section import SectionParams
from .symbols import (EdgeSymbol, asymptotic_sum, edge_deriv, edge_multiply, get_symbol,
                      make_edge_symbol, seminorm_check, symbol_ids)

__version__ = "0.1.0"
