"""Command-line interface.

Commands: ``validate``, ``synth``, ``bpl``, ``perf``, ``match`` and
``casestudy``.  Each reads one plant (``--spec FILE`` or ``--case NAME``)
and writes its report bundle into ``--out``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import casestudies
from .errors import InputError, KFLocalError
from .export import (fmt, kernel_rows, locus_rows, spectral_rows, svg_lines, svg_locus,
                     write_csv, write_json)
from .kernel import default_grid, fit_decay_rate, inverse_transform
from .locus import LocusTrajectory, bpl_sweep, branch_points, build_radicand
from .perf import classify_monotonicity, closed_form_diffusion, error_variance
from .plantfile import load_plant
from .riccati import FrequencyGrid, matching_test, solve_grid
from .symbols import all_passed, validate_plant

__all__ = ["RunConfig", "build_parser", "main"]

COMMANDS = ("validate", "synth", "bpl", "perf", "match", "casestudy")
FORMATS = ("csv", "json", "svg")

EXIT_HELP = """exit status:
  0  success
  1  usage error or malformed input
  2  the plant violates a structural assumption
  3  numerical failure (grid too coarse, tolerance not met, divergence)
"""

# CLI flag -> case-study parameter
_FLAG_PARAMS = {"kappa": "kappa", "sigw": "sigma_w", "sigv": "sigma_v", "lv": "l_v",
                "la": "l_a", "pi_star": "pi_star", "l_star": "l_star"}
_ALIASES = {"sigw": "sigma_w", "sigv": "sigma_v", "lv": "l_v", "la": "l_a",
            "pi-star": "pi_star", "l-star": "l_star", "pi": "pi_star"}

DEFAULT_SWEEPS = {
    "diffusion-white": ("l_star", (0.5, 1.0, 2.0)),
    "diffusion-correlated": ("pi_star", tuple(np.logspace(-1.0, 1.0, 25))),
    "swift-hohenberg": ("pi_star", tuple(np.logspace(-1.0, 1.0, 25))),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one CLI invocation."""

    command: str
    spec: Path | None = None
    case: str | None = None
    params: dict = field(default_factory=dict)
    lam_max: float | None = None
    n: int | None = None
    rtol: float = 1e-10
    out: Path = Path("kflocal-out")
    formats: tuple = FORMATS
    sweep_param: str | None = None
    sweep_values: tuple | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if (self.spec is None) == (self.case is None):
            raise InputError("give exactly one of --spec and --case")
        if self.case is not None and self.case not in casestudies.CASES:
            raise InputError(f"unknown case {self.case!r}; choose from {', '.join(casestudies.CASES)}")
        if self.command == "casestudy" and self.case is None:
            raise InputError("casestudy needs --case")
        if not (np.isfinite(self.rtol) and self.rtol > 0):
            raise InputError("--rtol must be positive")
        if self.lam_max is not None and not (np.isfinite(self.lam_max) and self.lam_max > 0):
            raise InputError("--lmax must be positive")
        if self.n is not None and (self.n < 2 or self.n & (self.n - 1)):
            raise InputError("--n must be a power of two")
        bad = set(self.formats) - set(FORMATS)
        if bad or not self.formats:
            raise InputError(f"--format takes a subset of {','.join(FORMATS)}")
        if (self.sweep_param is None) != (self.sweep_values is None):
            raise InputError("--sweep-param and --sweep-values go together")
        if self.sweep_param is not None:
            if self.case is None:
                raise InputError("sweeps need a built-in --case")
            allowed = casestudies.sweep_parameters(self.case)
            if self.sweep_param not in allowed:
                raise InputError(f"{self.case} cannot be swept over {self.sweep_param!r}; "
                                 f"choose from {', '.join(allowed)}")
            if len(self.sweep_values) == 0:
                raise InputError("--sweep-values is empty")

    def plant(self, **override):
        if self.spec is not None:
            return load_plant(self.spec)
        return casestudies.make_case(self.case, **{**self.params, **override}).plant

    def case_study(self, **override):
        return casestudies.make_case(self.case, **{**self.params, **override})

    def grid(self, plant) -> FrequencyGrid:
        if self.lam_max is None and self.n is None:
            return default_grid(plant)
        g = default_grid(plant)
        return FrequencyGrid(self.lam_max or g.lam_max, self.n or g.n)

    def sweep(self):
        """``(name, values)`` of the requested sweep, or the case default."""
        if self.sweep_param is not None:
            return self.sweep_param, tuple(self.sweep_values)
        if self.case is None:
            return None, ()
        return DEFAULT_SWEEPS[self.case]

    def wants(self, kind: str) -> bool:
        return kind in self.formats


# ---------------------------------------------------------------------------
# parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _formats(text: str):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--spec", type=Path, metavar="PATH", help="plant file (JSON)")
    src.add_argument("--case", choices=casestudies.CASES, help="built-in case study")
    for flag, label in (("kappa", "diffusivity"), ("sigw", "process noise intensity"),
                        ("sigv", "measurement noise intensity"), ("lv", "noise correlation length"),
                        ("la", "Swift-Hohenberg length scale"), ("pi-star", "dimensionless group"),
                        ("l-star", "information length scale (diffusion-white)")):
        common.add_argument(f"--{flag}", type=float, help=label)
    common.add_argument("--lmax", type=float, help="frequency grid half-width")
    common.add_argument("--n", type=int, help="number of frequency samples (power of two)")
    common.add_argument("--rtol", type=float, default=1e-10, help="quadrature tolerance")
    common.add_argument("--out", type=Path, default=Path("kflocal-out"), help="output directory")
    common.add_argument("--format", type=_formats, default=FORMATS, help="csv,json,svg")
    common.add_argument("--sweep-param", help="parameter to sweep")
    common.add_argument("--sweep-values", type=_floats, help="comma-separated values")

    p = _Parser(prog="kflocal", description="Spatial locality of Kalman filters for "
                "spatially invariant systems.", epilog=EXIT_HELP,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "validate": "check the structural assumptions",
        "synth": "gain symbol and kernel on a frequency grid",
        "bpl": "branch point locus over a sweep",
        "perf": "steady-state error variance (over a sweep for built-in cases)",
        "match": "test the complete-decentralization condition",
        "casestudy": "full report bundle of a built-in case",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return p


def config_from_args(ns) -> RunConfig:
    params = {}
    for flag, key in _FLAG_PARAMS.items():
        v = getattr(ns, flag, None)
        if v is not None:
            params[key] = v
    if ns.spec is not None and params:
        raise InputError("parameter flags apply to --case only")
    sp = ns.sweep_param
    if sp is not None:
        sp = _ALIASES.get(sp, sp.replace("-", "_"))
    return RunConfig(ns.command, ns.spec, ns.case, params, ns.lmax, ns.n, ns.rtol, ns.out,
                     tuple(ns.format), sp, ns.sweep_values)


# ---------------------------------------------------------------------------
# commands


def _tag(name, value):
    return f"{name}={fmt(float(value))}"


def cmd_validate(cfg: RunConfig, log=print) -> int:
    plant = cfg.plant()
    diags = validate_plant(plant)
    for d in diags:
        log(str(d))
    if all_passed(diags):
        log("plant satisfies all structural assumptions")
        return 0
    failed = sorted({d.assumption for d in diags if d.required and not d.passed})
    log("violates assumption " + ", ".join(failed))
    return 2


def _synth_one(cfg, plant, stem, theta_ref=None):
    grid = cfg.grid(plant)
    sol = solve_grid(plant, grid, strict=True)
    ker = inverse_transform(sol)
    rad = branch_points(build_radicand(plant))
    summary = {
        "delta_strength": sol.delta_strength,
        "theta": rad.theta,
        "entire": rad.entire,
        "branch_points": rad.points,
        "max_residual": sol.max_residual,
        "lam_max": grid.lam_max,
        "n": grid.n,
        "kernel_peak": ker.peak,
        "completely_decentralized": ker.is_null,
        "status": "completely decentralized" if ker.is_null else "spatially distributed",
    }
    if not ker.is_null and np.isfinite(rad.effective_theta):
        try:
            fit = fit_decay_rate(ker, rad.theta)
            summary["fitted_decay_rate"] = fit.theta_hat
            summary["fit_window"] = list(fit.window)
        except KFLocalError as exc:
            summary["fitted_decay_rate"] = None
            summary["fit_note"] = str(exc)
    out = cfg.out
    if cfg.wants("csv"):
        write_csv(out / f"{stem}_spectral.csv", ("lambda", "P", "ReL", "ImL", "residual"),
                  spectral_rows(sol))
        write_csv(out / f"{stem}_kernel.csv", ("x", "value", "component"), kernel_rows(ker))
    if cfg.wants("json"):
        write_json(out / f"{stem}_summary.json", summary)
    return sol, ker, summary


def cmd_synth(cfg: RunConfig, log=print, sweep=None) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    name, values = sweep if sweep is not None else (
        (cfg.sweep_param, cfg.sweep_values) if cfg.sweep_param else (None, ()))
    runs = []
    if name is None:
        plant = cfg.plant()
        sol, ker, summ = _synth_one(cfg, plant, "synth")
        runs.append(("", sol, ker, summ))
    else:
        for v in values:
            plant = cfg.plant(**{name: v})
            tag = _tag(name, v)
            sol, ker, summ = _synth_one(cfg, plant, f"synth_{tag}")
            runs.append((tag, sol, ker, summ))
    for tag, _, _, s in runs:
        log(f"synth {tag or cfg.case or cfg.spec}: delta={fmt(s['delta_strength'])} "
            f"theta={fmt(s['theta'])} residual={s['max_residual']:.3g} {s['status']}")
    if cfg.wants("svg"):
        _synth_plots(cfg, runs)
    return 0


def _synth_plots(cfg, runs):
    spec_series, ker_series = [], []
    xwin = 0.0
    for tag, sol, ker, s in runs:
        lam = sol.lam
        l0 = float(np.real(sol.l_hat[np.argmin(np.abs(lam))]))
        if l0 != 0:
            spec_series.append((tag or "L", lam, np.real(sol.l_hat) / l0))
        if not ker.is_null:
            ker_series.append((tag or "L(x)", ker.xs, ker.values / ker.peak))
            th = s["theta"] if np.isfinite(s["theta"]) else 1.0
            xwin = max(xwin, 8.0 / th)
    if spec_series:
        lmax = max(min(sol.grid.lam_max, 8.0 * (s["theta"] if np.isfinite(s["theta"]) else 1.0))
                   for _, sol, _, s in runs)
        svg_lines(cfg.out / "synth_symbol.svg", spec_series, title="normalized gain symbol",
                  xlabel="lambda", ylabel="L(lambda) / L(0)", xlim=(-lmax, lmax))
    if ker_series:
        svg_lines(cfg.out / "synth_kernel.svg", ker_series, title="regular gain kernel",
                  xlabel="x", ylabel="L(x) / max|L|", xlim=(-xwin, xwin))


def cmd_bpl(cfg: RunConfig, log=print, sweep=None) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    name, values = sweep if sweep is not None else cfg.sweep()
    if name is None:
        # a single plant file: one branch point set
        bps = branch_points(build_radicand(cfg.plant()))
        traj = LocusTrajectory(np.array([0.0]), (bps,), (), bps.points[None, :],
                               (0,) if bps.collisions.size else (), ())
    else:
        if len(values) < 2:
            raise InputError("a locus sweep needs at least two values")
        traj = bpl_sweep(lambda v: cfg.plant(**{name: v}), values)
    report = {
        "param": name,
        "params": traj.params,
        "theta": traj.thetas,
        "entire": [s.entire for s in traj.sets],
        "collisions": [float(traj.params[k]) for k in traj.collisions],
        "collision_points": {fmt(float(traj.params[k])): traj.sets[k].collisions for k in traj.collisions},
        "discontinuities": list(traj.discontinuities),
    }
    if cfg.wants("csv"):
        write_csv(cfg.out / "bpl.csv", ("param", "index", "re", "im", "theta"), locus_rows(traj))
    if cfg.wants("json"):
        write_json(cfg.out / "bpl.json", report)
    if cfg.wants("svg"):
        finite = traj.thetas[np.isfinite(traj.thetas)]
        strip = float(finite.min()) if finite.size else None
        svg_locus(cfg.out / "bpl.svg", traj, strip=strip)
        if name is not None:
            svg_lines(cfg.out / "bpl_theta.svg", [("theta", traj.params, traj.thetas)],
                      title="decay rate", xlabel=name, ylabel="theta", markers=True)
    log(f"bpl: {len(traj.params)} parameter values, min theta {fmt(np.nanmin(traj.thetas))}, "
        f"collisions at {report['collisions']}")
    return 0


def cmd_perf(cfg: RunConfig, log=print, sweep=None) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    name, values = sweep if sweep is not None else cfg.sweep()
    pts = [None] if name is None else list(values)
    rows, var, scaled = [], [], []
    closed = []
    for v in pts:
        over = {} if v is None else {name: v}
        plant = cfg.plant(**over)
        rep = error_variance(plant, cfg.rtol)
        var.append(rep.var_e)
        rows.append((np.nan if v is None else v, rep.var_e, rep.method, rep.abs_err))
        if cfg.case is not None:
            dim = casestudies.nondimensionalize(cfg.case_study(**over))
            scaled.append(error_variance(dim.plant, cfg.rtol).var_e)
            if cfg.case == "diffusion-white":
                p = cfg.case_study(**over).params
                closed.append(closed_form_diffusion(p["kappa"], p["sigma_w"], p["sigma_v"]))
    report = {"param": name, "params": [] if name is None else list(values), "var_e": var,
              "abs_err": [r[3] for r in rows], "rtol": cfg.rtol}
    if scaled:
        report["var_e_dimensionless"] = scaled
    if closed:
        report["closed_form"] = closed
        report["closed_form_rel_err"] = [abs(a - b) / b for a, b in zip(var, closed)]
    if name is not None and len(pts) >= 3:
        curve = scaled if scaled else var
        mono = classify_monotonicity(values, curve)
        report["monotonicity"] = mono.verdict
        report["first_violation"] = mono.first_violation
    if cfg.wants("csv"):
        write_csv(cfg.out / "perf.csv", ("param", "var_e", "method", "err_estimate"), rows)
    if cfg.wants("json"):
        write_json(cfg.out / "perf.json", report)
    if cfg.wants("svg") and name is not None and len(pts) >= 2:
        curve = scaled if scaled else var
        svg_lines(cfg.out / "perf.svg", [("var(e)", np.asarray(values), np.asarray(curve))],
                  title="steady-state error variance", xlabel=name,
                  ylabel="dimensionless var(e)" if scaled else "var(e)", markers=True)
    msg = f"perf: var(e) = {fmt(var[0])}" if name is None else \
        f"perf: {len(var)} values, {report.get('monotonicity', 'n/a')}"
    log(msg)
    return 0


def cmd_match(cfg: RunConfig, log=print) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    plant = cfg.plant()
    res = matching_test(plant, cfg.grid(plant))
    report = {"matched": res.matched, "ell": res.ell, "max_residual": res.max_residual,
              "status": "completely decentralized" if res.matched else "not matched"}
    if cfg.wants("json"):
        write_json(cfg.out / "match.json", report)
    if cfg.wants("csv"):
        write_csv(cfg.out / "match_residual.csv", ("lambda", "residual"), zip(res.lam, res.residuals))
    log(f"match: {report['status']}, ell={fmt(res.ell) if res.ell is not None else 'none'}, "
        f"max residual {res.max_residual:.3g}")
    return 0


def cmd_casestudy(cfg: RunConfig, log=print) -> int:
    sweep = cfg.sweep()
    if cfg.case == "diffusion-white":
        cmd_synth(cfg, log, sweep=sweep)
    else:
        cmd_synth(cfg, log, sweep=(None, ()))
    cmd_bpl(cfg, log, sweep=sweep)
    cmd_perf(cfg, log, sweep=sweep)
    return 0


_HANDLERS = {"validate": cmd_validate, "synth": cmd_synth, "bpl": cmd_bpl,
             "perf": cmd_perf, "match": cmd_match, "casestudy": cmd_casestudy}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return _HANDLERS[cfg.command](cfg)
    except KFLocalError as exc:
        print(f"kflocal: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
