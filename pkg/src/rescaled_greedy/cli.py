"""Batch experiment runner.

Experiments are described by an INI file::

    [objective]
    source = builtin:quadratic        ; or a path to a problem file
    seed = 0

    [dictionary]
    source = canonical                ; canonical | random_unit | union_rotated | path
    count = 40                        ; random_unit only
    seed = 0

    [run]
    q = 2
    alpha = auto                      ; auto = analytic constant of the objective
    mu = 2                            ; comma-separated list is cycled
    weakness = 1
    m_zero = auto                     ; auto | unknown | number
    us_radius = inf
    max_iterations = 200
    linesearch_tolerance = 1e-10
    variants = rescaled, no_rescale_baseline
    selector = argmax                 ; argmax | first_admissible

    [scan]
    mu_grid = 1.5, 2, 4, 8

    [estimate]
    samples = 10000
    radius = 1

    [output]
    dir = out

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, dictionaries, objectives
from .algorithms import argmax_selector, first_admissible_selector, run
from .core import VARIANTS, ConfigError, RunConfig, RunTrace

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
TRACE_COLUMNS = ("k", "atom_index", "inner_product", "lambda_k", "t_k", "objective_value", "error_k")
SELECTORS = {"argmax": argmax_selector, "first_admissible": first_admissible_selector}
MODULUS_U = (1e-2, 1e-1, 1.0)


class InputError(Exception):
    pass


@dataclass
class ExperimentSpec:
    objective_source: str = "builtin:quadratic"
    objective_seed: int = 0
    dictionary_source: str = "canonical"
    dictionary_count: Optional[int] = None
    dictionary_seed: int = 0
    run: dict = field(default_factory=dict)
    outputs: Path = Path("out")
    compare_variants: list = field(default_factory=lambda: ["rescaled"])
    selector: str = "argmax"
    mu_grid: list = field(default_factory=list)
    estimate_samples: int = 10000
    estimate_radius: float = 1.0
    seed: int = 0


def _floats(text: str) -> list:
    return [float(v) for v in text.replace(",", " ").split()]


def load_spec(path, out: Optional[str] = None, seed: Optional[int] = None) -> ExperimentSpec:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"spec file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise InputError(f"{path}: {exc}") from exc
    spec = ExperimentSpec()
    base = path.parent
    try:
        if cp.has_section("objective"):
            src = cp.get("objective", "source", fallback=spec.objective_source)
            spec.objective_source = src if src.startswith("builtin:") else str(base / src)
            spec.objective_seed = cp.getint("objective", "seed", fallback=0)
        if cp.has_section("dictionary"):
            src = cp.get("dictionary", "source", fallback="canonical")
            named = ("canonical", "random_unit", "union_rotated")
            spec.dictionary_source = src if src in named else str(base / src)
            count = cp.get("dictionary", "count", fallback=None)
            spec.dictionary_count = int(count) if count else None
            spec.dictionary_seed = cp.getint("dictionary", "seed", fallback=0)
        if cp.has_section("run"):
            spec.run = dict(cp.items("run"))
            variants = spec.run.pop("variants", "rescaled")
            spec.compare_variants = [v.strip() for v in variants.split(",") if v.strip()]
            spec.selector = spec.run.pop("selector", "argmax").strip()
        if cp.has_section("scan"):
            spec.mu_grid = _floats(cp.get("scan", "mu_grid", fallback=""))
        if cp.has_section("estimate"):
            spec.estimate_samples = cp.getint("estimate", "samples", fallback=10000)
            spec.estimate_radius = cp.getfloat("estimate", "radius", fallback=1.0)
        spec.outputs = Path(out) if out else base / cp.get("output", "dir", fallback="out")
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if seed is not None:
        spec.seed = spec.objective_seed = spec.dictionary_seed = seed
    if not spec.compare_variants:
        raise InputError("no variants requested")
    for v in spec.compare_variants:
        if v not in VARIANTS:
            raise InputError(f"unknown variant {v!r}")
    if spec.selector not in SELECTORS:
        raise InputError(f"unknown selector {spec.selector!r}")
    return spec


def resolve_objective(spec: ExperimentSpec):
    src = spec.objective_source
    try:
        if src.startswith("builtin:"):
            return objectives.builtin_objective(src.split(":", 1)[1], spec.objective_seed)
        if not Path(src).is_file():
            raise InputError(f"objective file not found: {src}")
        return objectives.load_objective(src)
    except (ValueError, OSError) as exc:
        raise InputError(str(exc)) from exc


def resolve_dictionary(spec: ExperimentSpec, n: int):
    src = spec.dictionary_source
    try:
        if src == "canonical":
            return dictionaries.canonical_basis(n)
        if src == "random_unit":
            return dictionaries.random_unit(n, spec.dictionary_count or 2 * n, spec.dictionary_seed)
        if src == "union_rotated":
            return dictionaries.union_of_bases(
                [dictionaries.canonical_basis(n), dictionaries.rotated_basis(n, spec.dictionary_seed)])
        if not Path(src).is_file():
            raise InputError(f"dictionary file not found: {src}")
        d = dictionaries.load_dictionary(src)
    except (ValueError, OSError) as exc:
        raise InputError(str(exc)) from exc
    if d.dim != n:
        raise InputError(f"dictionary dim {d.dim} does not match objective dim {n}")
    return d


def build_config(spec: ExperimentSpec, obj, variant: str, **overrides) -> RunConfig:
    r = spec.run
    consts = obj.constants

    def number(key, default, auto=None):
        text = str(r.get(key, default)).strip().lower()
        if text == "auto":
            return auto
        if text in ("unknown", "none", ""):
            return None
        return float(text)

    try:
        alpha = number("alpha", "auto", consts.alpha if consts else None)
        if alpha is None:
            raise InputError("alpha is unknown; set [run] alpha")
        weakness = _floats(r.get("weakness", "1"))
        kwargs = dict(
            q=number("q", "auto", consts.q if consts else 2.0),
            alpha=alpha,
            mu_sequence=_floats(r.get("mu", "2")),
            weakness_sequence=[1.0] if variant == "rescaled" else weakness,
            m_zero=number("m_zero", "auto", consts.m_zero if consts else None),
            us_radius=number("us_radius", "auto", consts.us_radius if consts else math.inf),
            max_iterations=int(number("max_iterations", 200)),
            gradient_tolerance=number("gradient_tolerance", ""),
            linesearch_tolerance=number("linesearch_tolerance", 1e-10),
            variant=variant,
        )
        kwargs.update(overrides)
        return RunConfig(**kwargs)
    except (ConfigError, ValueError) as exc:
        raise InputError(f"invalid run configuration: {exc}") from exc


# output helpers --------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def trace_csv(trace: RunTrace) -> str:
    rows = ((r.k, r.atom_index, r.inner_product, r.lambda_k, r.t_k, r.objective_value, r.error)
            for r in trace.records)
    return _csv_text(TRACE_COLUMNS, rows)


def _fit_window(steps: int):
    return max(2, steps // 10), steps


def _try_fit(trace: RunTrace):
    k_min, k_max = _fit_window(len(trace))
    if k_max <= k_min:
        return None, "too few steps to fit a rate"
    try:
        return analysis.fit_rate(trace, k_min, k_max), None
    except ValueError as exc:
        return None, str(exc)


def _final_error(trace: RunTrace):
    return trace.records[-1].error if trace.records else None


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


# subcommands -----------------------------------------------------------------


def cmd_run(spec: ExperimentSpec, k_max: Optional[int] = None) -> int:
    obj = resolve_objective(spec)
    d = resolve_dictionary(spec, obj.dim)
    overrides = {} if k_max is None else {"max_iterations": k_max}
    cfgs = {v: build_config(spec, obj, v, **overrides) for v in spec.compare_variants}
    info = obj.minimum_info()
    e_min = None if info is None else info[1]
    selector = SELECTORS[spec.selector]
    status = EXIT_OK
    outputs = {}
    for variant, cfg in cfgs.items():
        trace = run(obj, d, cfg, selector=selector, e_min=e_min)
        slope, slope_note = _try_fit(trace)
        summary = {
            "variant": variant,
            "termination": trace.termination,
            "steps": len(trace),
            "final_value": trace.records[-1].objective_value if trace.records else trace.initial_value,
            "final_error": _final_error(trace),
            "fitted_slope": slope,
            "fit_note": slope_note,
            "bound_check": "skipped",
        }
        inputs = analysis.bound_inputs_for(obj, d, cfg)
        if variant == "no_rescale_baseline":
            summary["bound_check"] = "not_applicable"
        elif inputs is not None and e_min is not None:
            report = analysis.verify_trace(trace, inputs, cfg, e_min)
            summary["bound_check"] = "pass" if report.passed else "fail"
            summary["verification"] = report.summary()
            if not report.passed:
                status = EXIT_FAIL
        outputs[f"trace_{variant}.csv"] = trace_csv(trace)
        outputs[f"summary_{variant}.json"] = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    for name, text in outputs.items():
        _atomic_write(spec.outputs / name, text)
    print(json.dumps({v: json.loads(outputs[f"summary_{v}.json"]) for v in cfgs}, indent=2, sort_keys=True))
    return status


def cmd_bound(spec: ExperimentSpec, k_max: int, svg: bool = False) -> int:
    obj = resolve_objective(spec)
    d = resolve_dictionary(spec, obj.dim)
    variant = next((v for v in spec.compare_variants if v != "no_rescale_baseline"), "rescaled")
    cfg = build_config(spec, obj, variant, max_iterations=max(k_max, 0))
    info = obj.minimum_info()
    if k_max < 2 or info is None:
        reason = "bounds are defined for k >= 2" if k_max < 2 else "E(xbar) unknown"
        _atomic_write(spec.outputs / "bound.csv", _csv_text(("k", "observed_error", "rpga_bound", "wrpga_bound"), []))
        print(json.dumps({"status": "skipped", "reason": reason}))
        return EXIT_OK
    e_min = info[1]
    inputs = analysis.bound_inputs_for(obj, d, cfg)
    if inputs is None:
        print(json.dumps({"status": "skipped", "reason": "minimizer at the origin"}))
        return EXIT_OK
    trace = run(obj, d, cfg, selector=SELECTORS[spec.selector], e_min=e_min)
    constant_mu = len(set(cfg.mu_sequence)) == 1
    rows, ok = [], True
    for k in range(2, k_max + 1):
        observed = trace.error_at(k)
        rb = analysis.theoretical_bound_rpga(inputs, k) if constant_mu else None
        wb = analysis.theoretical_bound_wrpga(inputs, k)
        target = rb if variant == "rescaled" else wb
        if observed is None or observed > target * (1.0 + 1e-9):
            ok = False
        rows.append((k, observed, rb, wb))
    _atomic_write(spec.outputs / "bound.csv", _csv_text(("k", "observed_error", "rpga_bound", "wrpga_bound"), rows))
    if svg:
        _atomic_write(spec.outputs / "bound.svg", bound_svg(rows, variant))
    print(json.dumps({"status": "pass" if ok else "fail", "variant": variant, "rows": len(rows),
                      "termination": trace.termination}))
    return EXIT_OK if ok else EXIT_FAIL


def bound_svg(rows, variant: str) -> str:
    """Log-log chart of observed error against the guaranteed bound, as SVG text."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "rescaled-greedy"
    ks = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    obs = [(k, e) for k, e, *_ in rows if e is not None and e > 0]
    if obs:
        ax.loglog(*zip(*obs), label=f"observed ({variant})")
    bound_col = 2 if variant == "rescaled" else 3
    ax.loglog(ks, [r[bound_col] for r in rows], "--", label="guaranteed bound")
    ax.set_xlabel("k")
    ax.set_ylabel("e_k")
    ax.legend()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def cmd_estimate(spec: ExperimentSpec) -> int:
    obj = resolve_objective(spec)
    q = build_config_q(spec, obj)
    n_samples, seed = spec.estimate_samples, spec.seed
    alpha_hat = objectives.estimate_alpha(obj, q, n_samples, spec.estimate_radius, seed)
    m_zero = objectives.estimate_m_zero(obj, min(n_samples, 2000), seed)
    analytic_rho = None
    # rho(E, u) = c u^2 exactly for these two families
    if isinstance(obj, objectives.QuadraticObjective):
        analytic_rho = obj.op_norm**2
    elif isinstance(obj, objectives.LinearObjective):
        analytic_rho = 0.0
    table = []
    for u in MODULUS_U:
        rho = analysis.modulus_estimate(obj, u, n_samples, seed)
        rho_half = analysis.modulus_estimate(obj, u / 2.0, n_samples, seed)
        rho1 = analysis.uniform_modulus_estimate(obj, u, n_samples, seed)
        row = {
            "u": u,
            "rho": rho,
            "rho1": rho1,
            "rho_analytic": None if analytic_rho is None else analytic_rho * u * u,
            "lower_ok": 4.0 * rho_half <= rho1 * (1.0 + 1e-6),
            "upper_ok": None if analytic_rho is None else rho1 <= 2.0 * analytic_rho * u * u * (1.0 + 1e-6) + 1e-9,
        }
        table.append(row)
    consts = obj.constants
    out = {
        "q": q,
        "alpha_estimate": alpha_hat,
        "alpha_analytic": None if consts is None else consts.alpha,
        "m_zero_estimate": m_zero,
        "level_set": "unbounded" if m_zero is None else "bounded",
        "moduli": table,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def build_config_q(spec: ExperimentSpec, obj) -> float:
    text = str(spec.run.get("q", "auto")).strip().lower()
    if text == "auto":
        return obj.constants.q if obj.constants else 2.0
    return float(text)


def cmd_mu_scan(spec: ExperimentSpec, k_max: Optional[int] = None) -> int:
    if not spec.mu_grid:
        raise InputError("mu_grid is empty; set [scan] mu_grid")
    obj = resolve_objective(spec)
    d = resolve_dictionary(spec, obj.dim)
    cfgs = []
    for mu in spec.mu_grid:
        overrides = {"mu_sequence": mu}
        if k_max is not None:
            overrides["max_iterations"] = k_max
        cfgs.append(build_config(spec, obj, "rescaled", **overrides))
    info = obj.minimum_info()
    e_min = None if info is None else info[1]
    results = []
    for cfg in cfgs:
        trace = run(obj, d, cfg, e_min=e_min)
        slope, _ = _try_fit(trace)
        final = _final_error(trace)
        if final is None:
            final = trace.records[-1].objective_value if trace.records else trace.initial_value
        results.append((cfg.mu_sequence[0], final, slope))
    best = min(range(len(results)), key=lambda i: results[i][1])
    rows = [(mu, fin, sl, int(i == best)) for i, (mu, fin, sl) in enumerate(results)]
    _atomic_write(spec.outputs / "mu_scan.csv", _csv_text(("mu", "final_error", "slope", "best"), rows))
    print(json.dumps({"best_mu": results[best][0], "final_error": results[best][1]}))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rescaled-greedy", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "bound", "estimate", "mu-scan"):
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="experiment spec (INI)")
        p.add_argument("--out", help="output directory (overrides [output] dir)")
        p.add_argument("--seed", type=int, help="seed for every random component")
        p.add_argument("--k-max", type=int, dest="k_max", help="iteration count")
        if name == "bound":
            p.add_argument("--svg", action="store_true", help="also write bound.svg")
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args.spec, out=args.out, seed=args.seed)
        if args.command == "run":
            return cmd_run(spec, args.k_max)
        if args.command == "bound":
            return cmd_bound(spec, args.k_max if args.k_max is not None else 200, args.svg)
        if args.command == "estimate":
            return cmd_estimate(spec)
        return cmd_mu_scan(spec, args.k_max)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
