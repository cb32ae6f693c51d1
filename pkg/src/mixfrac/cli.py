"""Command-line entry point.

Commands: ``solve``, ``linear``, ``bounds``, ``sweep``, ``sequences``, ``verify``.
Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 violated
hypothesis (including loss of certification), 4 non-convergence.

Config files are INI: a ``[run]`` section with :class:`RunConfig` keys, an
optional ``[scenario]`` section (``base``, ``name``, ``s1``, ``s2``,
``regime``, ``n``, ``box``) and optional ``[f]``, ``[kernel]``, ``[g]``
sections holding family parameters, e.g.::

    [run]
    command = solve
    eps = 5e-4

    [scenario]
    base = gauss-quadratic
    s2 = 0.8

    [kernel]
    kind = gaussian
    width = 0.6
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .analysis import compute_norms, h2_norm
from .exceptions import (
    AssumptionError,
    BallExitError,
    ConfigError,
    IntervalExitError,
    NonContractiveError,
    NonConvergenceError,
)
from .experiments import (
    analytic_corpus,
    embedding_violations,
    empirical_constants,
    eps_grid,
    radius_split_table,
    run_sequences,
    run_sweep,
)
from .fixed_point import FixedPointConfig, fixed_point_residual, picard_solve
from .io import (
    emit_contraction_csv,
    emit_convergence_csv,
    emit_sequences_csv,
    emit_sweep_csv,
    write_json,
)
from .linear import check_orthogonality, identity_residual
from .scenarios import ScenarioSpec, build_scenario, get_scenario, list_scenarios
from .spectral import FracExponents, GridSpec
from . import verify as verify_mod

log = logging.getLogger("mixfrac")

COMMANDS = ("solve", "linear", "bounds", "sweep", "sequences", "verify")
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_ASSUMPTION, EXIT_NONCONVERGENCE = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str = "solve"
    scenario: object = "gauss-quadratic"
    n: int | None = None
    box: float | None = None
    eps: float | None = None
    eps_fraction: float = 0.5
    rho: float = 1.0
    tol: float = 1e-10
    max_iters: int = 200
    c_e: float = 1.0
    output_dir: str = "out"
    seed: int = 0
    sweep_points: int = 8
    sweep_factor: float = 1.0
    sweep_decades: float = 3.0
    probe_trials: int = 10
    sequence_count: int = 12
    workers: int | None = None

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        if self.eps is not None and not self.eps >= 0:
            raise ConfigError(f"eps must be nonnegative, got {self.eps}")
        if not 0 < self.rho <= 1:
            raise ConfigError(f"rho must lie in (0, 1], got {self.rho}")
        if not self.tol > 0 or not self.c_e > 0:
            raise ConfigError("tol and c_e must be positive")
        for name in ("max_iters", "sweep_points", "sequence_count"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.probe_trials < 0:
            raise ConfigError("probe_trials must be >= 0")
        return self

    def to_dict(self) -> dict:
        out = asdict(self)
        if isinstance(self.scenario, ScenarioSpec):
            out["scenario"] = self.scenario.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if isinstance(data.get("scenario"), dict):
            data["scenario"] = spec_from_dict(data["scenario"])
        return cls(**data).validate()


def spec_from_dict(d: dict) -> ScenarioSpec:
    """Inverse of :meth:`ScenarioSpec.to_dict`."""
    try:
        return ScenarioSpec(
            name=d["name"],
            f_def=dict(d["f"]),
            k_def=dict(d["kernel"]),
            g_def=dict(d["g"]),
            exps=FracExponents(d["s1"], d["s2"], d.get("regime", "nonlinear")),
            grid=GridSpec(d["n"], d["box"]),
            c_e=d.get("c_e", 1.0),
            rho=d.get("rho", 1.0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid inline scenario: {exc}") from exc


def _coerce(text: str):
    text = text.strip()
    if text.lower() in ("none", "null", ""):
        return None
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if "," in text:
        return tuple(_coerce(t) for t in text.split(","))
    for typ in (int, float):
        try:
            return typ(text)
        except ValueError:
            pass
    return text


def load_config_file(path) -> dict:
    """Parse an INI config into ``RunConfig.from_dict`` input."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    data = {k: _coerce(v) for k, v in parser["run"].items()} if parser.has_section("run") else {}
    if any(parser.has_section(s) for s in ("scenario", "f", "kernel", "g")):
        sc = {k: _coerce(v) for k, v in parser["scenario"].items()} if parser.has_section("scenario") else {}
        base_name = sc.pop("base", None) or (data.get("scenario") if isinstance(data.get("scenario"), str) else "gauss-quadratic")
        try:
            base = get_scenario(base_name).to_dict()
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        base["name"] = f"{base_name}+custom"
        base.update(sc)
        for section, key in (("f", "f"), ("kernel", "kernel"), ("g", "g")):
            if parser.has_section(section):
                base[key] = {k: _coerce(v) for k, v in parser[section].items()}
        data["scenario"] = base
    return data


def resolve_spec(config: RunConfig) -> ScenarioSpec:
    if isinstance(config.scenario, ScenarioSpec):
        spec = config.scenario
    else:
        try:
            spec = get_scenario(config.scenario)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    if config.n is not None or config.box is not None:
        try:
            spec = spec.with_grid(config.n, config.box)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return replace(spec, c_e=config.c_e, rho=config.rho)


def _build(config):
    spec = resolve_spec(config)
    sc = build_scenario(spec)
    for w in sc.warnings:
        log.warning(w)
    return sc


def _require_bounds(sc):
    if sc.bounds is None:
        raise AssumptionError(
            f"scenario {sc.spec.name!r} has s1 outside (1/4, 3/4); the nonlinear problem is not covered",
            clause="1/4 < s1 < 3/4",
        )


def _fp_config(config, sc, eps):
    policy = "reject" if eps <= sc.bounds.eps_max else "warn"
    return FixedPointConfig(eps=eps, rho=config.rho, max_iters=config.max_iters, tol=config.tol, ball_policy=policy)


def _base_report(config, sc):
    return {"config": config.to_dict(), "scenario": sc.spec.to_dict(), "warnings": list(sc.warnings)}


def cmd_solve(config: RunConfig, out: Path) -> int:
    sc = _build(config)
    _require_bounds(sc)
    eps = config.eps if config.eps is not None else config.eps_fraction * sc.bounds.eps_max
    fp = _fp_config(config, sc, eps)
    report = _base_report(config, sc)
    report.update(eps=eps, certified=eps <= sc.bounds.eps_max, bounds=sc.bounds.to_dict())
    try:
        trace = picard_solve(sc, fp)
    except NonConvergenceError as exc:
        emit_convergence_csv(out / "trace.csv", exc.trace)
        report.update(converged=False, iterations=exc.trace.iterations, residual_h2=exc.trace.residual_h2)
        write_json(out / "report.json", report)
        raise
    emit_convergence_csv(out / "trace.csv", trace)
    report.update(
        converged=True,
        iterations=trace.iterations,
        residual_h2=trace.residual_h2,
        up_h2=h2_norm(trace.u_p),
        u_h2=h2_norm(trace.u),
        u0_h2=sc.bounds.u0_h2,
        in_ball=trace.in_ball,
        fixed_point_residual_l2=fixed_point_residual(trace.u_p, sc, fp),
        max_contraction_ratio=max(trace.contraction_ratios, default=0.0),
        analytic_contraction=eps * sc.bounds.sigma,
    )
    write_json(out / "report.json", report)
    print(f"solve: {trace.iterations} iterations, ||u_p||_H2 = {report['up_h2']:.6e}")
    return EXIT_OK


def cmd_linear(config: RunConfig, out: Path) -> int:
    sc = _build(config)
    rep = sc.u0_report
    ip, ip_ok = check_orthogonality(sc.f)
    report = _base_report(config, sc)
    report.update(
        regime=rep.regime,
        residual_l2=rep.residual_l2,
        zero_mode_mass=rep.zero_mode_mass,
        orthogonality_satisfied=rep.orthogonality_satisfied,
        orthogonality_violation=rep.orthogonality_violation,
        integral_f=ip,
        integral_f_vanishes=ip_ok,
        identity_residual_l2=identity_residual(sc.u0, sc.f, sc.exps),
        f_norms=compute_norms(sc.f, sc.exps).to_dict(),
        u0_norms=compute_norms(sc.u0, sc.exps).to_dict(),
    )
    write_json(out / "report.json", report)
    print(f"linear: residual {rep.residual_l2:.3e}, zero-mode mass {rep.zero_mode_mass:.3e}")
    return EXIT_OK


def cmd_bounds(config: RunConfig, out: Path) -> int:
    sc = _build(config)
    _require_bounds(sc)
    corpus = analytic_corpus(sc.grid, config.seed) + [("u0", sc.u0)]
    est = empirical_constants(corpus, sc.exps)
    report = _base_report(config, sc)
    report.update(sc.bounds.to_dict())
    report.update(
        contraction_at_eps_max=sc.bounds.contraction_at_eps_max,
        radius_minimizer_table=radius_split_table(sc.bounds, sc.exps),
        empirical=asdict(est),
        embedding_violations=[{"field": k, "min_c_e": v} for k, v in embedding_violations(corpus, config.c_e)],
    )
    write_json(out / "report.json", report)
    b = sc.bounds
    print(f"bounds: Q={b.q:.6g} M={b.m:.6g} H={b.h_constant:.6g} eps_max={b.eps_max:.6g} sigma={b.sigma:.6g}")
    return EXIT_OK


def cmd_sweep(config: RunConfig, out: Path) -> int:
    sc = _build(config)
    _require_bounds(sc)
    eps_values = eps_grid(sc.bounds.eps_max, config.sweep_points, config.sweep_factor, config.sweep_decades)
    fp = FixedPointConfig(rho=config.rho, max_iters=config.max_iters, tol=config.tol)
    pts = run_sweep(sc, fp, eps_values, config.probe_trials, config.seed, config.workers)
    emit_sweep_csv(out / "sweep.csv", pts)
    emit_contraction_csv(out / "contraction.csv", pts)
    report = _base_report(config, sc)
    report.update(
        bounds=sc.bounds.to_dict(),
        points=[{k: v for k, v in asdict(p).items() if k != "ratios"} for p in pts],
    )
    write_json(out / "report.json", report)
    print(f"sweep: {len(pts)} eps points written to {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_sequences(config: RunConfig, out: Path) -> int:
    sc = _build(config)
    items = run_sequences(sc, config.sequence_count)
    emit_sequences_csv(out / "sequences.csv", items)
    report = _base_report(config, sc)
    report.update(items=[asdict(it) for it in items], any_flagged=any(it.flagged for it in items))
    write_json(out / "report.json", report)
    print(f"sequences: {len(items)} items, final ||u_n - u|| = {items[-1].u_gap_h2s2:.3e}")
    return EXIT_OK


def cmd_verify(config: RunConfig, out: Path) -> int:
    results = verify_mod.run_all(config.seed, out_dir=out)
    for r in results:
        print(r.line())
    report = {
        "config": config.to_dict(),
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail, "metrics": r.metrics} for r in results],
        "all_passed": all(r.passed for r in results),
    }
    write_json(out / "report.json", report)
    return EXIT_OK if report["all_passed"] else EXIT_VERIFY


DISPATCH = {
    "solve": cmd_solve,
    "linear": cmd_linear,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "sequences": cmd_sequences,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixfrac", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", metavar="PATH", help="INI config file")
    p.add_argument("--scenario", metavar="NAME", help=f"preset name ({', '.join(list_scenarios())})")
    p.add_argument("--command", choices=COMMANDS)
    p.add_argument("--eps", type=float, metavar="X")
    p.add_argument("--rho", type=float, metavar="X")
    p.add_argument("--n", type=int, metavar="N", help="samples per axis")
    p.add_argument("--box", type=float, metavar="L", help="box side length")
    p.add_argument("--seed", type=int, metavar="S")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> RunConfig:
    data = load_config_file(args.config) if args.config else {}
    overrides = {
        "scenario": args.scenario,
        "command": args.command,
        "eps": args.eps,
        "rho": args.rho,
        "n": args.n,
        "box": args.box,
        "seed": args.seed,
        "output_dir": args.out,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def run(config: RunConfig) -> int:
    """Execute one command and map failures to exit codes."""
    out = Path(config.output_dir)
    try:
        return DISPATCH[config.command](config, out)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (AssumptionError, NonContractiveError, BallExitError, IntervalExitError) as exc:
        log.error("assumption violated: %s", exc)
        return EXIT_ASSUMPTION
    except NonConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NONCONVERGENCE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        config = config_from_args(args)
    except (ConfigError, ValueError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
