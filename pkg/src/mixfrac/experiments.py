"""Experiment drivers shared by the CLI and the acceptance checks."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import (
    MinimizationProblem,
    embedding_ratio,
    h2_norm,
    radius_split_minimizer,
    sobolev_ratio,
)
from .exceptions import NonConvergenceError
from .fixed_point import FixedPointConfig, contraction_probe, picard_solve
from .linear import geometric_perturbations, sequences_experiment
from .scenarios import Scenario, gaussian, odd_gaussian
from .spectral import Field, FracExponents, GridSpec


def analytic_corpus(grid: GridSpec, seed: int = 0, count: int = 50, min_width: float = 1.0) -> list[tuple[str, Field]]:
    """Deterministic mix of Gaussian-type fields.

    Parameters are drawn from ``seed`` alone, so the same analytic functions
    are sampled whatever the grid resolution.  Every third entry is a
    nonnegative centred Gaussian.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        width = rng.uniform(min_width, 2.5)
        amp = rng.uniform(0.2, 3.0) * rng.choice([-1.0, 1.0])
        center = tuple(rng.uniform(-2.0, 2.0, size=3))
        kind = i % 3
        if kind == 0:
            out.append((f"gauss[w={width:.3f}]", gaussian(grid, abs(amp), width)))
        elif kind == 1:
            out.append((f"odd[w={width:.3f},axis={i % 2}]", odd_gaussian(grid, amp, width, axis=i % 2)))
        else:
            w2 = rng.uniform(min_width, 2.5)
            a = gaussian(grid, amp, width, center)
            b = gaussian(grid, 0.5 * amp, w2, tuple(-c for c in center))
            out.append((f"pair[w={width:.3f},{w2:.3f}]", a - b))
    return out


@dataclass(frozen=True)
class EmpiricalConstants:
    c_e: float
    c_e_field: str
    c_s1: float
    c_s1_field: str
    n_fields: int


def empirical_constants(fields, exps: FracExponents) -> EmpiricalConstants:
    """Largest ``||u||_inf / ||u||_{H^2}`` and Sobolev ratio over ``fields``."""
    best_e = (-1.0, "")
    best_s = (-1.0, "")
    for label, fld in fields:
        best_e = max(best_e, (embedding_ratio(fld), label))
        best_s = max(best_s, (sobolev_ratio(fld, exps), label))
    return EmpiricalConstants(best_e[0], best_e[1], best_s[0], best_s[1], len(fields))


def embedding_violations(fields, c_e: float) -> list[tuple[str, float]]:
    """Fields with ``||u||_inf > c_e ||u||_{H^2}``, paired with their minimal admissible ``c_e``."""
    out = []
    for label, fld in fields:
        r = embedding_ratio(fld)
        if r > c_e:
            out.append((label, r))
    return out


def radius_split_table(bounds, exps: FracExponents, extra_alphas=(0.01, 0.1, 1.0, 10.0, 100.0)) -> list[dict]:
    """Minimiser rows for the radius split used by the bounds, plus generic alphas.

    The size bound splits at ``R`` with ``alpha = a^2 / (8 pi^2 (3 - 4 s1))`` and
    the Lipschitz bound with ``alpha = a^2 / (2 pi^2 (3 - 4 s1))``, where
    ``a = ||u0||_{H^2} + 1``.
    """
    s1 = exps.s1
    rows = []
    named = []
    if bounds is not None:
        a = bounds.u0_h2 + 1.0
        named = [
            ("size_bound", a * a / (8.0 * math.pi**2 * (3.0 - 4.0 * s1))),
            ("lipschitz_bound", a * a / (2.0 * math.pi**2 * (3.0 - 4.0 * s1))),
        ]
    for label, alpha in named + [(f"alpha={x:g}", x) for x in extra_alphas]:
        r_star, phi_min = radius_split_minimizer(MinimizationProblem(s1, alpha))
        rows.append({"label": label, "s1": s1, "alpha": alpha, "r_star": r_star, "phi_min": phi_min})
    return rows


def eps_grid(eps_max: float, n_points: int = 8, factor: float = 1.0, decades: float = 3.0) -> np.ndarray:
    """``n_points`` log-spaced values ending at ``factor * eps_max``."""
    top = factor * eps_max
    return top * np.logspace(-decades, 0.0, n_points)


@dataclass(frozen=True)
class SweepPoint:
    eps: float
    iterations: int
    converged: bool
    residual_h2: float
    up_h2: float
    max_trace_ratio: float
    analytic_bound: float
    probe_max_ratio: float
    ratios: tuple


def _sweep_one(scenario, config, eps, probe_trials, seed_seq):
    cfg = config.with_eps(eps)
    if eps > scenario.bounds.eps_max:
        cfg = FixedPointConfig(eps=eps, rho=cfg.rho, max_iters=cfg.max_iters, tol=cfg.tol,
                               ball_policy="warn", interval_slack=cfg.interval_slack)
    try:
        trace = picard_solve(scenario, cfg)
    except NonConvergenceError as exc:
        trace = exc.trace
    probe = contraction_probe(scenario, cfg, probe_trials, rng=np.random.default_rng(seed_seq)) if probe_trials else []
    ratios = tuple(r for r, _ in probe)
    bound = eps * scenario.bounds.sigma
    return SweepPoint(
        eps=float(eps),
        iterations=trace.iterations,
        converged=trace.converged,
        residual_h2=trace.residual_h2,
        up_h2=h2_norm(trace.u_p),
        max_trace_ratio=max(trace.contraction_ratios, default=0.0),
        analytic_bound=bound,
        probe_max_ratio=max(ratios, default=0.0),
        ratios=ratios,
    )


def run_sweep(
    scenario: Scenario,
    config: FixedPointConfig,
    eps_values,
    probe_trials: int = 10,
    seed: int = 0,
    workers: int | None = None,
) -> list[SweepPoint]:
    """Picard solve plus contraction probe at each epsilon, in a thread pool.

    Each point draws from its own child seed, so results do not depend on
    scheduling.
    """
    seeds = np.random.SeedSequence(seed).spawn(len(eps_values))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(lambda args: _sweep_one(scenario, config, args[0], probe_trials, args[1]),
                     zip(eps_values, seeds))
        )


def default_sequence_inputs(scenario: Scenario, count: int = 12):
    """Target ``f`` of the scenario and zero-mass perturbations ``phi / 2^n``."""
    grid = scenario.grid
    phi = odd_gaussian(grid, 1.0, 1.5, axis=1)
    return scenario.f, geometric_perturbations(phi, count)


def run_sequences(scenario: Scenario, count: int = 12):
    f, perts = default_sequence_inputs(scenario, count)
    return sequences_experiment(f, perts, scenario.exps)
