"""Command-line front end.

Usage::

    bohmflow <reconstruct|ensemble|verify|figure1|tdse-check> --config run.cfg [--output DIR]

The config file holds flat ``key = value`` lines; ``#`` starts a comment.
Numbers may be written as simple expressions in ``pi`` (``pi/2``,
``2*pi``); ``t`` takes a comma-separated list.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 solver error.
"""

import argparse
import ast
import math
import operator
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import verify
from .dynamics import METHODS, SolverOptions
from .errors import BohmFlowError, ConfigError
from .reconstruct import (
    EnsembleSpec,
    bin_averaged_density,
    both_densities,
    ensemble_transport,
)
from .states import Coherent, FreeGaussian, Superposition
from .svg import line_chart
from .tdse import init_from_model, l2_error, numeric_model, propagate

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
BASE_MODELS = ("coherent", "free", "superposition")
FORMATS = ("csv", "csv+svg")


@dataclass
class RunConfig:
    model: str = "coherent"
    d: float = 1.0
    t: tuple = (0.5, 1.0, math.pi)
    grid_min: float = None
    grid_max: float = None
    grid_n: int = None
    ode_method: str = "adaptive"
    ode_tol: float = 1e-10
    ode_dt_max: float = 0.01
    ensemble_samples: int = 100_000
    ensemble_seed: int = 42
    ensemble_bins: int = 80
    output_path: str = "."
    output_format: str = "csv+svg"

    def __post_init__(self):
        self.validate()

    def validate(self):
        base = self.model.split(":", 1)[1] if self.model.startswith("tdse:") else self.model
        if base not in BASE_MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if not self.t:
            raise ConfigError("t: at least one time is required")
        if any(not math.isfinite(v) or v < 0 for v in self.t):
            raise ConfigError("t: times must be finite and nonnegative")
        if not math.isfinite(self.d):
            raise ConfigError("d must be finite")
        if self.grid_min is not None and self.grid_max is not None and not self.grid_min < self.grid_max:
            raise ConfigError("grid.min must be below grid.max")
        if self.grid_n is not None and self.grid_n < 2:
            raise ConfigError("grid.n must be >= 2")
        if self.ode_method not in METHODS:
            raise ConfigError(f"ode.method must be one of {METHODS}")
        if not (self.ode_tol > 0 and self.ode_dt_max > 0):
            raise ConfigError("ode.tol and ode.dt_max must be positive")
        if self.ensemble_samples < 1 or self.ensemble_bins < 2:
            raise ConfigError("ensemble.samples >= 1 and ensemble.bins >= 2 required")
        if self.output_format not in FORMATS:
            raise ConfigError(f"output.format must be one of {FORMATS}")

    @property
    def base_model(self):
        name = self.model.split(":", 1)[1] if self.model.startswith("tdse:") else self.model
        return {"coherent": Coherent(self.d), "free": FreeGaussian(),
                "superposition": Superposition()}[name]

    @property
    def uses_tdse(self):
        return self.model.startswith("tdse:")

    def solver_options(self):
        method = "rk4" if self.ode_method == "rk4" else "adaptive"
        return SolverOptions(method=method, abs_tol=self.ode_tol, rel_tol=self.ode_tol,
                             dt_max=self.ode_dt_max)

    def grid(self, lo, hi, n):
        return np.linspace(
            lo if self.grid_min is None else self.grid_min,
            hi if self.grid_max is None else self.grid_max,
            n if self.grid_n is None else self.grid_n,
        )

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "t":
                v = ", ".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{_KEY_OF[f.name]} = {v}")
        return "\n".join(lines) + "\n"


_FIELD_OF = {f.name.replace("_", ".", 1): f.name for f in fields(RunConfig)}
_KEY_OF = {v: k for k, v in _FIELD_OF.items()}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def parse_number(text):
    """Evaluate a numeric literal or arithmetic expression in ``pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"not a number: {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ConfigError(f"not a number: {text!r}")

    return ev(tree)


def _parse_int(text):
    v = parse_number(text)
    if v != int(v):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(v)


_CONVERT = {
    "d": parse_number, "grid_min": parse_number, "grid_max": parse_number,
    "grid_n": _parse_int, "ode_tol": parse_number, "ode_dt_max": parse_number,
    "ensemble_samples": _parse_int, "ensemble_seed": _parse_int, "ensemble_bins": _parse_int,
    "t": lambda s: tuple(parse_number(p) for p in s.split(",") if p.strip()),
}


def parse_config(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _FIELD_OF:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name = _FIELD_OF[key]
        try:
            values[name] = _CONVERT.get(name, str)(value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return RunConfig(**values)


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


def _num(v):
    return repr(float(v)) if np.isfinite(v) else "nan"


def write_csv(path, header, columns, comments=()):
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(_num(v) for v in row))
    rows.extend(f"# {c}" for c in comments)
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def _tag(t):
    return f"{t:.6g}".replace(".", "p")


def _model_for_run(cfg):
    if not cfg.uses_tdse:
        return cfg.base_model
    return numeric_model(cfg.base_model, max(cfg.t))


def cmd_reconstruct(cfg):
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    model = _model_for_run(cfg)
    exact_model = cfg.base_model
    opts = cfg.solver_options()
    for t in cfg.t:
        grid = cfg.grid(-6.0, 6.0 + t, 481)
        rec, raw = both_densities(model, grid, t, opts)
        exact = exact_model.density(grid, t) if t else rec.values
        err = np.abs(rec.values - exact)
        stem = out / f"reconstruct_{cfg.model.replace(':', '-')}_t{_tag(t)}"
        comments = [f"t = {t!r}", f"model = {cfg.model}"]
        if rec.n_missing:
            comments.append(f"missing points (node guard): {rec.n_missing}")
        write_csv(stem.with_suffix(".csv"),
                  ["x", "rho_exact", "rho_reconstructed", "rho_no_jacobian", "abs_err"],
                  [grid, exact, rec.values, raw.values, err], comments)
        if cfg.output_format == "csv+svg":
            svg = line_chart(
                [("exact |psi|^2", grid, exact), ("reconstructed", grid, rec.values),
                 ("no Jacobian", grid, raw.values)],
                title=f"{cfg.model}, t = {t:.6g}", xlabel="x", ylabel="density")
            stem.with_suffix(".svg").write_text(svg, encoding="utf-8")
    return EXIT_OK


def cmd_ensemble(cfg):
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    model = _model_for_run(cfg)
    opts = cfg.solver_options()
    for t in cfg.t:
        lo = -6.0 if cfg.grid_min is None else cfg.grid_min
        hi = 6.0 + t if cfg.grid_max is None else cfg.grid_max
        spec = EnsembleSpec(cfg.ensemble_samples, cfg.ensemble_seed, cfg.ensemble_bins, (lo, hi))
        fld = ensemble_transport(model, spec, t, opts, initial_model=cfg.base_model)
        exact = bin_averaged_density(cfg.base_model, fld.info["edges"], t)
        stem = out / f"ensemble_{cfg.model.replace(':', '-')}_t{_tag(t)}"
        info = fld.info
        comments = [
            f"t = {t!r}", f"model = {cfg.model}", f"seed = {cfg.ensemble_seed}",
            f"n_samples = {info['n_samples']}", f"n_dropped = {info['n_dropped']}",
            f"n_outside_range = {info['n_outside']}",
            "rho_exact is the exact bin probability divided by the bin width",
        ]
        write_csv(stem.with_suffix(".csv"), ["bin_center", "histogram_density", "rho_exact"],
                  [fld.grid, fld.values, exact], comments)
        if cfg.output_format == "csv+svg":
            svg = line_chart([("histogram", fld.grid, fld.values), ("exact", fld.grid, exact)],
                             title=f"ensemble {cfg.model}, t = {t:.6g}", xlabel="x",
                             ylabel="density")
            stem.with_suffix(".svg").write_text(svg, encoding="utf-8")
    return EXIT_OK


def _write_report(path, reports):
    lines = ["check_name,metric,threshold,pass"]
    for r in reports:
        lines.append(f"{r.check_name},{_num(r.metric)},{_num(r.threshold)},{str(r.passed).lower()}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_verify(cfg):
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    reports = verify.run_suite(cfg.t, cfg.solver_options())
    _write_report(out / "verify_report.csv", reports)
    for r in reports:
        print(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_figure1(cfg):
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid(*verify.FIGURE1_GRID)
    data = verify.figure1_dataset(grid, cfg.solver_options())
    comments = ["t = pi, superposition of the two lowest oscillator states"]
    if data.missing.any():
        comments.append(f"missing points (node guard): {int(data.missing.sum())}")
    write_csv(out / "figure1.csv", ["x", "R_exact", "R_transported"],
              [data.x, data.exact, data.transported], comments)
    if cfg.output_format == "csv+svg":
        svg = line_chart([("R(x, pi) exact", data.x, data.exact),
                          ("R(x0(x, pi), 0) without Jacobian", data.x, data.transported)],
                         title="exact amplitude vs trajectory transport without Jacobian",
                         xlabel="x", ylabel="amplitude")
        (out / "figure1.svg").write_text(svg, encoding="utf-8")
    return EXIT_OK


def tdse_reports(times, dt=1e-3):
    """Grid-propagation checks against the analytic models."""
    reports = []
    for base in verify.analytic_models():
        for t in times:
            if isinstance(base, FreeGaussian):
                dom = (-16.0 - 7.0 * t, 16.0 + 7.0 * t)
                s0 = init_from_model(base, dom, 2048)
            else:
                s0 = init_from_model(base)
            err = l2_error(propagate(s0, t, dt), base)
            reports.append(verify.VerificationReport(
                f"tdse_l2[{base.name}, t={t:g}]", err, 1e-6))
            if not isinstance(base, FreeGaussian) and t > 0:
                coarse = l2_error(propagate(s0, t, 2 * dt), base)
                ratio = coarse / err
                reports.append(verify.VerificationReport(
                    f"tdse_order[{base.name}, t={t:g}]", abs(ratio - 4.0), 0.6,
                    extra={"ratio": ratio}))
            if t > 0:
                nm = numeric_model(base, t)
                grid = verify.reconstruction_grid(t)
                a, _ = both_densities(base, grid, t)
                b, _ = both_densities(nm, grid, t)
                reports.append(verify.compare_densities(
                    a, b, 1e-4, f"cross_oracle[{base.name}, t={t:g}]"))
    return reports


def cmd_tdse_check(cfg):
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    reports = tdse_reports(cfg.t)
    _write_report(out / "tdse_report.csv", reports)
    for r in reports:
        print(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


COMMANDS = {
    "reconstruct": cmd_reconstruct,
    "ensemble": cmd_ensemble,
    "verify": cmd_verify,
    "figure1": cmd_figure1,
    "tdse-check": cmd_tdse_check,
}


def build_parser():
    p = argparse.ArgumentParser(prog="bohmflow", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="path to a key = value config file")
    p.add_argument("--output", help="output directory (overrides output.path)")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.output:
            cfg.output_path = args.output
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BohmFlowError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
