"""Experiment configuration, sweep runner and CSV output.

An experiment is described by a JSON object whose keys are exactly the
fields of ``ExperimentConfig``.  Running it evaluates one measurement per
sweep point (optionally in a process pool), fits the growth exponent and
decides PASS with the rule of the matching acceptance criterion.  Rows are
written in sweep order, so the CSV does not depend on the worker count.
"""
import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache

import numpy as np
import sympy as sp

from .calculus import (ZERO_TOL, commute_weight, composition_defect, injectivity_certificate,
                       left_inverse_residual, leibniz_terms, operator_norm_section,
                       weight_commutation_defect)
from .circle import (SobolevPair, circle_symbol, make_circle_grid, operator_norm_circle,
                     quantize_circle)
from .cone import iso_residual, make_space, mapping_sweep
from .cylinder import make_cylinder_grid, seminorm_ratio_probe
from .fitting import DegenerateSweep, SweepReport
from .symbolic import XI, X, japanese, lam_symbols
from .symbols import get_symbol, seminorm_check, symbol_ids

EXPERIMENTS = ("norm-growth", "derivative-decay", "cv-bound", "composition",
               "weight-commutation", "parametrix", "cone-iso", "mapping",
               "seminorm-probe", "symbol-check")

CSV_COLUMNS = ("experiment", "symbol_a", "symbol_b", "param", "n_modes", "n_r", "half_length",
               "leibniz_n", "value", "fitted_exponent", "fit_residual", "pass")

# exponent drop required between leibniz_n = 0 and leibniz_n = N
COMPOSITION_DROP = 1.5


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    symbol_a: str = "one"
    symbol_b: str = ""
    sobolev_pair: tuple = (0.0, 0.0)
    space: tuple = (0.0, 0.0)
    target: tuple = ()
    weight_order: float = 2.0
    eta: float = 4.0
    n_modes: int = 8
    half_length: float = 32.0
    n_r: int = 512
    sweep: tuple = tuple(2.0**k for k in range(9))
    leibniz_n: int = 0
    seed: int = 0
    output: str = ""

    def __post_init__(self):
        validate(self)

    @property
    def grid(self):
        return make_cylinder_grid(self.half_length, self.n_r, self.n_modes)


_FIT_EXPERIMENTS = set(EXPERIMENTS) - {"symbol-check"}


def _pair(name, value):
    if not (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ConfigError(f"{name}: expected a pair of numbers")
    return tuple(float(v) for v in value)


def validate(cfg):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {cfg.experiment!r}")
    for name in ("symbol_a", "symbol_b"):
        sid = getattr(cfg, name)
        if not isinstance(sid, str):
            raise ConfigError(f"{name}: expected a symbol id string")
        if sid:
            try:
                get_symbol(sid)
            except ValueError as exc:
                raise ConfigError(f"{name}: {exc}") from None
    if cfg.experiment == "composition" and not cfg.symbol_b:
        raise ConfigError("symbol_b: composition needs a second symbol")
    object.__setattr__(cfg, "sobolev_pair", _pair("sobolev_pair", cfg.sobolev_pair))
    object.__setattr__(cfg, "space", _pair("space", cfg.space))
    if cfg.target not in ((), []):
        object.__setattr__(cfg, "target", _pair("target", cfg.target))
    else:
        object.__setattr__(cfg, "target", ())
    for name in ("n_modes", "n_r", "leibniz_n", "seed"):
        v = getattr(cfg, name)
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ConfigError(f"{name}: expected a nonnegative integer")
    for name in ("half_length", "weight_order", "eta"):
        v = getattr(cfg, name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not np.isfinite(v):
            raise ConfigError(f"{name}: expected a finite number")
    try:
        cfg.grid
    except ValueError as exc:
        raise ConfigError(f"n_r/half_length/n_modes: {exc}") from None
    sweep = cfg.sweep
    if not isinstance(sweep, (list, tuple)) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in sweep):
        raise ConfigError("sweep: expected a list of numbers")
    sweep = tuple(float(v) for v in sweep)
    if any(not np.isfinite(v) or v <= 0 for v in sweep):
        raise ConfigError("sweep: values must be positive reals")
    if any(b <= a for a, b in zip(sweep, sweep[1:])):
        raise ConfigError("sweep: values must be sorted ascending without repeats")
    if cfg.experiment in _FIT_EXPERIMENTS and len(sweep) < 3:
        raise ConfigError("sweep: need at least 3 points for a fit")
    object.__setattr__(cfg, "sweep", sweep)
    if not isinstance(cfg.output, str):
        raise ConfigError("output: expected a path string")


def load_config(text):
    """Parse a JSON config; unknown keys and type errors raise ConfigError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    if "experiment" not in data:
        raise ConfigError("experiment: missing")
    return ExperimentConfig(**data)


def config_to_json(cfg):
    return json.dumps({f.name: getattr(cfg, f.name) for f in fields(cfg)}, indent=2)


# --- per-experiment measurements -------------------------------------------------

_CIRCLE_IDS = {"one", "elliptic", "order-reduce", "cosx-perturbed"}


def circle_family(symbol_id):
    """Parameter-dependent circle family R(lam) named by a registry id."""
    name, *params = symbol_id.split(":")
    if name not in _CIRCLE_IDS:
        raise ConfigError(f"symbol_a: {symbol_id!r} has no circle-level family")
    if name == "one":
        return circle_symbol(sp.Integer(1), 0.0)
    s = sp.nsimplify(float(params[0]))
    base = japanese(XI, *lam_symbols(1)) ** s
    if name == "cosx-perturbed":
        base = (1 + sp.cos(X) / 2) * base
    return circle_symbol(base, float(s))


def diagonal_oracle(symbol_id, pair, lam, n_modes):
    """Brute-force max over modes of <xi>^s_out |p(xi, lam)| <xi>^-s_in for multipliers."""
    name, *params = symbol_id.split(":")
    if name == "cosx-perturbed":
        return np.nan
    s = float(params[0]) if params else 0.0
    xi = np.arange(-n_modes, n_modes + 1, dtype=float)
    vals = (1 + xi**2 + lam**2) ** (s / 2)
    w = (1 + xi**2) ** ((pair.s_out - pair.s_in) / 2)
    return float(np.max(w * vals))


@lru_cache(maxsize=8)
def _space(s, g, half_length, n_r, n_modes):
    return make_space(s, g, grid=make_cylinder_grid(half_length, n_r, n_modes))


def _eta(v):
    return np.array([float(v)])


def measure(cfg, t):
    """Measurements at sweep point t; a tuple whose first entry is the row value."""
    grid = cfg.grid
    exp = cfg.experiment
    if exp == "norm-growth":
        pair = SobolevPair(*cfg.sobolev_pair)
        M = quantize_circle(circle_family(cfg.symbol_a), [t], make_circle_grid(cfg.n_modes))
        return (operator_norm_circle(M, pair), diagonal_oracle(cfg.symbol_a, pair, t, cfg.n_modes))
    if exp == "derivative-decay":
        pair = SobolevPair(*cfg.sobolev_pair)
        cgrid = make_circle_grid(cfg.n_modes)
        fam = circle_family(cfg.symbol_a)
        deriv = operator_norm_circle(quantize_circle(fam.derivative([0, 0, 1]), [t], cgrid), pair)
        return (deriv, operator_norm_circle(quantize_circle(fam, [t], cgrid), pair))
    a = get_symbol(cfg.symbol_a)
    if exp == "cv-bound":
        return (operator_norm_section(a, _eta(t), grid),)
    if exp == "composition":
        b = get_symbol(cfg.symbol_b)
        hi = composition_defect(a, b, cfg.leibniz_n, _eta(t), grid,
                                terms=leibniz_terms(a, b, cfg.leibniz_n))
        lo = composition_defect(a, b, 0, _eta(t), grid, terms=leibniz_terms(a, b, 0))
        return (hi, lo)
    if exp == "weight-commutation":
        b, _ = commute_weight(a, cfg.weight_order, cfg.leibniz_n)
        return (weight_commutation_defect(a, b, cfg.weight_order, _eta(t), grid),)
    if exp == "parametrix":
        res = float(left_inverse_residual(a, _eta(t), max(cfg.leibniz_n, 1), grid))
        cert = injectivity_certificate(a, _eta(t), grid, residual=res)
        return (res, float(cert["full_rank"]))
    if exp == "cone-iso":
        spec = _space(*cfg.space, cfg.half_length, cfg.n_r, cfg.n_modes)
        return (iso_residual(spec, _eta(t), grid), float(spec.anchor_eta[0]))
    if exp == "mapping":
        target = cfg.target or (cfg.space[0] - a.mu, cfg.space[1] - a.nu)
        values = []
        # the doubled grid is measured at the sweep endpoints only
        grids = [grid, grid.refined(2)] if t in (cfg.sweep[0], cfg.sweep[-1]) else [grid]
        for g in grids:
            space = _space(*cfg.space, g.half_length, g.n_r, g.n_modes)
            tgt = _space(*target, g.half_length, g.n_r, g.n_modes)
            values.append(mapping_sweep(a, *cfg.space, [t], g, space=space, target=tgt).values[0])
        return tuple(values) if len(values) == 2 else (values[0], np.nan)
    if exp == "seminorm-probe":
        rep = seminorm_ratio_probe(a, _eta(cfg.eta), inputs=[t], grid=grid)
        return (rep.ratios[0],)
    raise ConfigError(f"experiment: {exp!r} has no sweep measurement")


# --- pass rules, one per acceptance criterion -----------------------------------

@dataclass
class Outcome:
    report: SweepReport
    passed: bool
    detail: str
    extra: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)


def _fit(params, values, **meta):
    try:
        return SweepReport.from_samples(params, values, scale="bracket", zero_tol=ZERO_TOL, **meta)
    except DegenerateSweep as exc:
        return SweepReport(np.asarray(params, float), np.asarray(values, float), np.nan, np.nan,
                           meta={"error": str(exc), **meta})


def _row(cfg, symbol_b, param, value, rep, passed, leibniz_n=None):
    return {"experiment": cfg.experiment, "symbol_a": cfg.symbol_a, "symbol_b": symbol_b,
            "param": param, "n_modes": cfg.n_modes, "n_r": cfg.n_r,
            "half_length": cfg.half_length,
            "leibniz_n": cfg.leibniz_n if leibniz_n is None else leibniz_n,
            "value": value, "fitted_exponent": rep.exponent, "fit_residual": rep.residual,
            "pass": passed}


def summarize(cfg, results):
    """Fit the sweep and apply the pass rule of the experiment."""
    t = np.asarray(cfg.sweep)
    first = np.array([r[0] for r in results])
    exp = cfg.experiment
    if exp == "norm-growth":
        oracle = np.array([r[1] for r in results])
        rep = _fit(t, first)
        mu = circle_family(cfg.symbol_a).order
        nu = cfg.sobolev_pair[0] - cfg.sobolev_pair[1]
        bound = max(mu, mu - nu) + 0.1
        match = float(np.nanmax(np.abs(first - oracle))) if not np.all(np.isnan(oracle)) else 0.0
        ok = rep.exponent <= bound and rep.residual <= 0.3 and match <= 1e-10
        detail = (f"exponent {rep.exponent:.4g} (bound {bound:.4g}), residual {rep.residual:.3g} "
                  f"(bound 0.3), oracle mismatch {match:.2g}")
        return Outcome(rep, bool(ok), detail, {"oracle_mismatch": match})
    if exp == "derivative-decay":
        rep = _fit(t, first)
        fam = _fit(t, [r[1] for r in results])
        ok = rep.exponent <= fam.exponent - 1 + 0.15
        detail = f"derivative exponent {rep.exponent:.4g}, family exponent {fam.exponent:.4g}"
        return Outcome(rep, bool(ok), detail, {"family": fam})
    if exp == "cv-bound":
        a = get_symbol(cfg.symbol_a)
        rep = _fit(t, first)
        ok = rep.exponent <= a.mu + 0.1
        return Outcome(rep, bool(ok), f"exponent {rep.exponent:.4g} (bound {a.mu + 0.1:.4g})")
    if exp == "composition":
        rep = _fit(t, first, N=cfg.leibniz_n)
        base = _fit(t, [r[1] for r in results], N=0)
        drop = base.exponent - rep.exponent
        ratio = first[-1] / results[0][1] if results[0][1] > 0 else np.inf
        ok = drop >= COMPOSITION_DROP and ratio <= 1e-3
        detail = (f"exponents N=0 {base.exponent:.4g}, N={cfg.leibniz_n} {rep.exponent:.4g}, "
                  f"drop {drop:.3g} (need {COMPOSITION_DROP}), end/start ratio {ratio:.3g} "
                  f"(need <= 1e-3)")
        return Outcome(rep, bool(ok), detail, {"base": base})
    if exp == "weight-commutation":
        a = get_symbol(cfg.symbol_a)
        rep = _fit(t, first)
        bound = a.mu + 0.2
        return Outcome(rep, bool(rep.exponent <= bound),
                       f"exponent {rep.exponent:.4g} (bound {bound:.4g})")
    if exp == "parametrix":
        rep = _fit(t, first)
        eta0 = None
        for i in range(len(t) - 1, -1, -1):
            if first[i] < 0.5:
                eta0 = t[i]
            else:
                break
        ranks = np.array([r[1] for r in results]) > 0
        ok = eta0 is not None and eta0 <= 64 and bool(np.all(ranks[t >= eta0]))
        detail = (f"eta0 {eta0 if eta0 is not None else 'none'} (need <= 64), full column rank "
                  f"for eta >= eta0: {bool(eta0 is not None and np.all(ranks[t >= eta0]))}")
        return Outcome(rep, bool(ok), detail, {"eta0": eta0})
    if exp == "cone-iso":
        rep = _fit(t, first)
        anchor = results[0][1]
        spec = _space(*cfg.space, cfg.half_length, cfg.n_r, cfg.n_modes)
        at_anchor = spec.calibration[-1][1] if spec.calibration else \
            iso_residual(spec, spec.anchor_eta, cfg.grid)
        ok = at_anchor < 1 and rep.exponent <= -0.8
        detail = (f"anchor {anchor:g}, residual at anchor {at_anchor:.3g}, "
                  f"exponent {rep.exponent:.4g} (bound -0.8)")
        return Outcome(rep, bool(ok), detail, {"anchor": anchor, "at_anchor": at_anchor})
    if exp == "mapping":
        rep = _fit(t, first)
        fine = np.array([r[1] for r in results])
        spread = first.max() / first.min() if first.min() > 0 else np.inf
        both = ~np.isnan(fine)
        change = float(np.max(np.maximum(fine[both] / first[both], first[both] / fine[both])))
        ok = np.all(np.isfinite(first)) and spread <= 10 and change <= 2
        detail = (f"bound C = {first.max():.4g}, max/min {spread:.3g} (need <= 10), "
                  f"grid-doubling change {change:.3g} (need <= 2)")
        return Outcome(rep, bool(ok), detail, {"C": float(first.max()), "change": change})
    if exp == "seminorm-probe":
        rep = _fit(t, first)
        spread = first.max() / first.min() if first.min() > 0 else np.inf
        return Outcome(rep, bool(spread <= 100),
                       f"constant {first.max():.4g}, max/min {spread:.3g} (need <= 100)",
                       {"constant": float(first.max())})
    raise ConfigError(f"experiment: {exp!r}")


# --- running ---------------------------------------------------------------------

def _measure_job(args):
    cfg_json, t = args
    return measure(load_config(cfg_json), t)


def default_jobs():
    try:
        return max(1, int(os.environ.get("EDGECALC_JOBS", "1")))
    except ValueError:
        return 1


def run(cfg, jobs=None):
    """Run an experiment; returns an Outcome with the CSV rows in sweep order."""
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if cfg.experiment == "symbol-check":
        rep = seminorm_check(get_symbol(cfg.symbol_a))
        sweep = SweepReport(np.array([0.0]), np.array([rep.max_ratio]), rep.cov_exponent, np.nan)
        out = Outcome(sweep, rep.passed, f"max ratio {rep.max_ratio:.4g}, r-exponents "
                      f"{ {k: round(v, 3) for k, v in rep.r_exponents.items()} }")
        out.rows = [_row(cfg, "", 0.0, rep.max_ratio, sweep, rep.passed)]
        return out
    if jobs == 1:
        results = [measure(cfg, t) for t in cfg.sweep]
    else:
        payload = config_to_json(cfg)
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_measure_job, [(payload, t) for t in cfg.sweep]))
    out = summarize(cfg, results)
    rows = []
    if cfg.experiment == "composition":
        base = out.extra["base"]
        rows += [_row(cfg, cfg.symbol_b, t, r[1], base, out.passed, 0)
                 for t, r in zip(cfg.sweep, results)]
    if cfg.experiment == "derivative-decay":
        fam = out.extra["family"]
        rows += [_row(cfg, "", t, r[1], fam, out.passed) for t, r in zip(cfg.sweep, results)]
    label = {"derivative-decay": "d/dlambda", "mapping": "grid x1"}.get(cfg.experiment, cfg.symbol_b)
    rows += [_row(cfg, label, t, r[0], out.report, out.passed) for t, r in zip(cfg.sweep, results)]
    if cfg.experiment == "mapping":
        nofit = SweepReport(np.array([]), np.array([]), np.nan, np.nan)
        rows += [_row(cfg, "grid x2", t, r[1], nofit, out.passed)
                 for t, r in zip(cfg.sweep, results) if not np.isnan(r[1])]
    out.rows = rows
    return out


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError("CSV header does not match the expected columns")
        return list(reader)


def fit_csv(rows, scale="bracket"):
    """Refit each (experiment, symbol_a, symbol_b, leibniz_n) group of CSV rows."""
    from .fitting import fit_exponent
    groups = {}
    for row in rows:
        key = (row["experiment"], row["symbol_a"], row["symbol_b"], row["leibniz_n"])
        groups.setdefault(key, []).append((float(row["param"]), float(row["value"])))
    out = []
    for key, pts in groups.items():
        params, values = np.array(pts).T
        try:
            fit = fit_exponent(params, values, scale=scale, zero_tol=ZERO_TOL)
            out.append((key, fit.exponent, fit.residual, None))
        except DegenerateSweep as exc:
            out.append((key, np.nan, np.nan, str(exc)))
    return out


def list_symbols():
    return symbol_ids()
