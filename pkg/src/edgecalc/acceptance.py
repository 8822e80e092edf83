"""The acceptance suite: ten criteria at the default desk-scale grid.

Criteria 1-8 and 10 are runs of harness experiments, so each PASS is the
experiment's own pass rule.  Criterion 9 collects the exact identity and
multiplier cases and the adjoint check.
"""
import sys
import time
from dataclasses import dataclass

import numpy as np
import sympy as sp

from . import harness
from .calculus import composition_defect, left_inverse_residual, operator_norm_section
from .circle import (SobolevPair, make_circle_grid, operator_norm_circle, order_reducing_family,
                     quantize_circle)
from .cone import cone_norm, iso_residual, make_space, mapping_bound
from .cylinder import (adjoint_defect, gaussian, l2_norm_cyl, make_cylinder_grid, op_apply,
                       weighted_norm_cyl)
from .fitting import fit_exponent
from .section import SectionParams
from .symbols import EdgeSymbol, get_symbol

SWEEP = tuple(2.0**k for k in range(9))
# registry instances used where a criterion ranges over "all registry symbols"
REGISTRY_INSTANCES = ("one", "elliptic:1", "elliptic:-1", "order-reduce:-2",
                      "weighted-elliptic:1:1", "cosx-perturbed:1")
TRIVIAL_TOL = 1e-10


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        return (f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'} "
                f"{self.title}: {self.detail} [{self.seconds:.0f} s]")


def _runs(configs, jobs, key):
    """Run the configs; returns (all passed, summary line)."""
    outs = [(cfg, harness.run(cfg, jobs)) for cfg in configs]
    failed = [f"{key(c)}: {o.detail}" for c, o in outs if not o.passed]
    if failed:
        return False, f"{len(failed)}/{len(outs)} runs fail; " + "; ".join(failed)
    return True, f"{len(outs)} runs pass; " + "; ".join(f"{key(c)}: {o.detail}" for c, o in outs)


def norm_growth(jobs=None):
    configs = []
    for mu in (-2, -1, 0, 1, 2):
        for nu in sorted({0, mu}):
            for s in (0, 2):
                configs.append(harness.ExperimentConfig(
                    "norm-growth", f"order-reduce:{mu}", sobolev_pair=(s, s - nu), sweep=SWEEP))
    return _runs(configs, jobs, lambda c: f"{c.symbol_a} sp={c.sobolev_pair}")


def derivative_decay(jobs=None):
    configs = [harness.ExperimentConfig("derivative-decay", f"order-reduce:{mu}", sweep=SWEEP)
               for mu in (-1, -2)]
    return _runs(configs, jobs, lambda c: c.symbol_a)


def cv_bound(jobs=None):
    configs = [harness.ExperimentConfig("cv-bound", f"elliptic:{s}", sweep=SWEEP) for s in (0, -1, -2)]
    passed, detail = _runs(configs, jobs, lambda c: c.symbol_a)
    # section norms are quadrature-converged: compare with a doubled quadrature
    grid = make_cylinder_grid()
    fine = SectionParams(oversample=8)
    worst = 0.0
    for s in (0, -1, -2):
        a = get_symbol(f"elliptic:{s}")
        for eta in (1.0, 16.0, 256.0):
            v = operator_norm_section(a, np.array([eta]), grid)
            w = operator_norm_section(a, np.array([eta]), grid, fine)
            worst = max(worst, abs(v - w))
    ok = passed and worst <= 1e-6
    return ok, detail + f"; quadrature change {worst:.2g} (need <= 1e-6)"


def composition(jobs=None):
    cfg = harness.ExperimentConfig("composition", "elliptic:-1", "elliptic:1", leibniz_n=2,
                                   sweep=SWEEP)
    out = harness.run(cfg, jobs)
    return out.passed, out.detail


def weight_commutation(jobs=None):
    cfg = harness.ExperimentConfig("weight-commutation", "elliptic:-1", weight_order=2.0,
                                   leibniz_n=2, sweep=SWEEP)
    out = harness.run(cfg, jobs)
    return out.passed, out.detail


def left_inverse(jobs=None):
    configs = [harness.ExperimentConfig("parametrix", sid, leibniz_n=1, sweep=SWEEP)
               for sid in ("elliptic:1", "elliptic:2", "weighted-elliptic:1:1")]
    return _runs(configs, jobs, lambda c: c.symbol_a)


def cone_iso(jobs=None):
    configs = [harness.ExperimentConfig("cone-iso", "one", space=sg, sweep=SWEEP)
               for sg in ((0, 0), (1, 0), (2, 1), (-1, 1))]
    return _runs(configs, jobs, lambda c: f"(s,g)={c.space}")


def mapping(jobs=None):
    configs = [harness.ExperimentConfig("mapping", "elliptic:-1", space=sg, sweep=SWEEP[2:])
               for sg in ((1, 0), (0, 0))]
    return _runs(configs, jobs, lambda c: f"(s,g)={c.space}")


def _trivial_cases():
    """(name, error) for the exact identity and multiplier cases."""
    cases = []
    cgrid = make_circle_grid(8)
    lam = np.array([3.0])
    I = np.eye(cgrid.size)
    R0 = quantize_circle(order_reducing_family(0), lam, cgrid).todense()
    cases.append(("R^0 is the identity", np.abs(R0 - I).max()))
    P = quantize_circle(order_reducing_family(2), lam, cgrid).todense()
    Q = quantize_circle(order_reducing_family(-2), lam, cgrid).todense()
    cases.append(("R^2 R^-2 = I", np.abs(P @ Q - I).max()))
    n = operator_norm_circle(quantize_circle(order_reducing_family(2), [2.0], cgrid),
                             SobolevPair(0, 0))
    cases.append(("||R^2(2)|| = 69", abs(n - 69.0) / 69.0))
    t = np.array(SWEEP)
    fit = fit_exponent(t, t**-2.0)
    cases.append(("fit of lambda^-2", max(abs(fit.exponent + 2), fit.residual)))
    cases.append(("fit of constants", abs(fit_exponent(t, np.full_like(t, 3.0)).exponent)))

    grid = make_cylinder_grid()
    one = get_symbol("one")
    eta = np.array([4.0])
    u = gaussian(grid, 1.0, 1)
    cases.append(("Gaussian norm pi^(1/4)", abs(l2_norm_cyl(u) - np.pi**0.25)))
    cases.append(("Op(1) u = u", np.abs(op_apply(one, eta, u).values - u.values).max()))
    mult = EdgeSymbol(sp.Integer(1), 0.0, 0.0)
    cases.append(("1 # 1 defect", composition_defect(one, mult, 0, eta, grid)))
    unit = make_space(0, 0, grid=grid)
    cases.append(("iso residual of H^{0,0}", iso_residual(unit, eta, grid)))
    spec = make_space(1, 0, grid=grid)
    v = op_apply(spec.ptilde, spec.anchor_eta, u)
    cases.append(("cone norm is ||[r]^(-s+g) Op(p~) u||",
                  abs(cone_norm(u, spec) - weighted_norm_cyl(v, -1.0))))
    cases.append(("mapping bound of 1", abs(mapping_bound(one, 1, 0, 4.0, grid, space=spec) - 1)))
    cases.append(("left inverse of 1", float(left_inverse_residual(one, eta, 1, grid))))
    return cases


def exactness_floor(jobs=None):
    cases = _trivial_cases()
    bad = [f"{name} err {err:.2g}" for name, err in cases if not err <= TRIVIAL_TOL]
    adj = {}
    for sid in REGISTRY_INSTANCES:
        adj[sid] = adjoint_defect(get_symbol(sid), np.array([4.0]), trials=2)
    worst = max(adj.values())
    ok = not bad and worst <= 1e-6
    detail = (f"{len(cases) - len(bad)}/{len(cases)} exact cases within {TRIVIAL_TOL:g}"
              + (f" (failing: {'; '.join(bad)})" if bad else "")
              + f"; max adjoint defect {worst:.2g} (need <= 1e-6)")
    return ok, detail


def seminorm_probe(jobs=None):
    configs = [harness.ExperimentConfig("seminorm-probe", sid, eta=4.0,
                                        sweep=tuple(2.0**k for k in range(-2, 3)))
               for sid in REGISTRY_INSTANCES]
    return _runs(configs, jobs, lambda c: c.symbol_a)


CRITERIA = (
    (1, "norm growth", norm_growth),
    (2, "derivative decay", derivative_decay),
    (3, "Calderon-Vaillancourt bound", cv_bound),
    (4, "composition remainder", composition),
    (5, "weight commutation", weight_commutation),
    (6, "injectivity / left inverse", left_inverse),
    (7, "cone-space isomorphism", cone_iso),
    (8, "mapping bound", mapping),
    (9, "exactness floor", exactness_floor),
    (10, "Schwartz seminorm probe", seminorm_probe),
)


def run_criterion(number, jobs=None):
    for n, title, fn in CRITERIA:
        if n == number:
            t0 = time.perf_counter()
            passed, detail = fn(jobs)
            return CriterionResult(n, title, bool(passed), detail, time.perf_counter() - t0)
    raise ValueError(f"no criterion {number}")


def run_acceptance(only=None, jobs=None, stream=None):
    stream = stream or sys.stdout
    results = []
    for n, _, _ in CRITERIA:
        if only and n not in only:
            continue
        res = run_criterion(n, jobs)
        print(res.line(), file=stream, flush=True)
        results.append(res)
    return results
