"""Auxiliary map ``t_g``, Picard iteration and empirical contraction checks.

For a perturbation ``v`` the map returns the solution ``u`` of

    [(-Delta)^s1 + (-Delta)^s2] u = eps * K * g(u0 + v)

and its fixed point ``u_p`` gives the stationary solution ``u0 + u_p``.
Functions here accept any *scenario* object exposing ``u0``, ``kernel``,
``g``, ``exps`` and ``bounds`` (see :mod:`mixfrac.scenarios`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable

import numpy as np

from .analysis import c2_norm, contraction_constant, h2_norm, l2_norm, sigma_and_continuity
from .exceptions import AssumptionError, BallExitError, IntervalExitError, NonConvergenceError
from .linear import project_zero_mode, solve_poisson
from .spectral import Field, GridSpec, apply_mixed_operator, apply_symbol, convolve

BALL_SLACK = 1e-8


@dataclass(frozen=True)
class NonlinearityDef:
    """``g`` together with its first two derivatives.

    ``params`` records how the function was built so configs and reports can
    reproduce it.
    """

    g: Callable
    g_prime: Callable
    g_double_prime: Callable
    label: str = "g"
    params: dict = dc_field(default_factory=dict, compare=False)

    def __call__(self, z):
        return self.g(z)

    def validate(self, tol: float = 1e-12):
        """Check ``g(0) = 0`` and ``g'(0) = 0``; raise :class:`AssumptionError` otherwise."""
        g0, gp0 = float(self.g(0.0)), float(self.g_prime(0.0))
        if abs(g0) > tol:
            raise AssumptionError(f"{self.label}: g(0) = {g0} != 0", clause="g(0) = 0", value=g0)
        if abs(gp0) > tol:
            raise AssumptionError(f"{self.label}: g'(0) = {gp0} != 0", clause="g'(0) = 0", value=gp0)
        return self

    @classmethod
    def power(cls, degree: int, coeff: float = 1.0) -> "NonlinearityDef":
        """``coeff * z^degree``."""
        d, c = int(degree), float(coeff)
        if d != degree or d < 0:
            raise ValueError(f"degree must be a nonnegative integer, got {degree}")
        label = f"{c:g}*z^{d}" if c != 1.0 else f"z^{d}"
        return cls(
            g=lambda z: c * np.power(z, d),
            g_prime=lambda z: c * d * np.power(z, d - 1) if d >= 1 else 0.0 * np.asarray(z),
            g_double_prime=lambda z: c * d * (d - 1) * np.power(z, d - 2) if d >= 2 else 0.0 * np.asarray(z),
            label=label,
            params={"kind": "power", "degree": d, "coeff": c},
        )

    def scaled(self, factor: float) -> "NonlinearityDef":
        f = float(factor)
        params = dict(self.params)
        if "coeff" in params:
            params["coeff"] = params["coeff"] * f
        return NonlinearityDef(
            g=lambda z: f * self.g(z),
            g_prime=lambda z: f * self.g_prime(z),
            g_double_prime=lambda z: f * self.g_double_prime(z),
            label=f"{f:g}*({self.label})",
            params=params,
        )

    def __sub__(self, other: "NonlinearityDef") -> "NonlinearityDef":
        return NonlinearityDef(
            g=lambda z: self.g(z) - other.g(z),
            g_prime=lambda z: self.g_prime(z) - other.g_prime(z),
            g_double_prime=lambda z: self.g_double_prime(z) - other.g_double_prime(z),
            label=f"({self.label})-({other.label})",
        )


@dataclass(frozen=True)
class FixedPointConfig:
    eps: float = 0.0
    rho: float = 1.0
    max_iters: int = 200
    tol: float = 1e-10
    ball_policy: str = "reject"
    interval_slack: float = 0.01

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")
        if not 0 < self.rho <= 1:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if self.ball_policy not in ("reject", "warn"):
            raise ValueError(f"ball_policy must be 'reject' or 'warn', got {self.ball_policy!r}")

    def with_eps(self, eps: float) -> "FixedPointConfig":
        return replace(self, eps=float(eps))


@dataclass(eq=False)
class PicardTrace:
    h2_norms: list = dc_field(default_factory=list)
    h2_distances: list = dc_field(default_factory=list)
    contraction_ratios: list = dc_field(default_factory=list)
    u_p: Field | None = None
    u: Field | None = None
    residual_h2: float = float("nan")
    in_ball: bool = True
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.h2_distances)


def apply_map_tg(v: Field, scenario, config: FixedPointConfig, g: NonlinearityDef | None = None) -> Field:
    """One application of the auxiliary map to the perturbation ``v``."""
    g = scenario.g if g is None else g
    total = scenario.u0 + v
    hw = scenario.bounds.interval_halfwidth
    peak = float(np.abs(total.samples).max())
    if peak > hw * (1.0 + config.interval_slack):
        raise IntervalExitError(
            f"max |u0 + v| = {peak:.6g} exceeds the interval half-width {hw:.6g}"
        )
    G = total.map(g.g)
    rhs = config.eps * convolve(scenario.kernel, G)
    return solve_poisson(rhs, scenario.exps).solution


def _ball_check(norm, config, what):
    if norm <= config.rho + BALL_SLACK:
        return True
    msg = f"{what} has H^2 norm {norm:.6g} > rho = {config.rho}"
    if config.ball_policy == "reject":
        raise BallExitError(msg)
    warnings.warn(msg, RuntimeWarning, stacklevel=3)
    return False


def picard_solve(
    scenario,
    config: FixedPointConfig,
    v0: Field | None = None,
    g: NonlinearityDef | None = None,
) -> PicardTrace:
    """Iterate ``v_{k+1} = t_g(v_k)`` from ``v0`` (default zero).

    Stops once ``||v_{k+1} - v_k||_{H^2} <= tol``.  Raises
    :class:`NonConvergenceError` (carrying the partial trace) after
    ``max_iters`` applications otherwise.
    """
    v = Field.zeros(scenario.u0.grid) if v0 is None else v0
    trace = PicardTrace()
    trace.in_ball = _ball_check(h2_norm(v), config, "start iterate")
    for _ in range(int(config.max_iters)):
        v_new = apply_map_tg(v, scenario, config, g)
        dist = h2_norm(v_new - v)
        norm = h2_norm(v_new)
        if trace.h2_distances and trace.h2_distances[-1] > 0:
            trace.contraction_ratios.append(dist / trace.h2_distances[-1])
        trace.h2_distances.append(dist)
        trace.h2_norms.append(norm)
        trace.in_ball = _ball_check(norm, config, f"iterate {trace.iterations}") and trace.in_ball
        v = v_new
        if dist <= config.tol:
            trace.converged = True
            break
    trace.u_p = v
    trace.u = scenario.u0 + v
    trace.residual_h2 = trace.h2_distances[-1]
    if not trace.converged:
        raise NonConvergenceError(
            f"no convergence after {config.max_iters} iterations "
            f"(residual {trace.residual_h2:.3e} > tol {config.tol:.1e})",
            trace=trace,
        )
    return trace


def fixed_point_residual(u_p: Field, scenario, config: FixedPointConfig, g: NonlinearityDef | None = None) -> float:
    """``|| l u_p - eps P(K * g(u0 + u_p)) ||_{L^2}`` with ``P`` removing the zero mode."""
    g = scenario.g if g is None else g
    rhs = config.eps * convolve(scenario.kernel, (scenario.u0 + u_p).map(g.g))
    return l2_norm(apply_mixed_operator(u_p, scenario.exps) - project_zero_mode(rhs))


def sample_ball(grid: GridSpec, rho: float, rng: np.random.Generator, radius: float | None = None) -> Field:
    """Random smooth field with H^2 norm ``radius`` (default uniform in ``(0, rho]``).

    White noise is filtered by ``(1 + |p|^2)^(-2)``, which keeps the sample
    real and gives it H^2-regular decay.
    """
    noise = Field(grid, rng.standard_normal(grid.shape))
    smooth = apply_symbol(noise, (1.0 + grid.p_squared) ** -2)
    if radius is None:
        radius = rho * (1.0 - rng.random())
    return smooth * (radius / h2_norm(smooth))


def scenario_sigma(scenario, m: float | None = None) -> float:
    b = scenario.bounds
    return contraction_constant(b.q, b.m if m is None else m, b.u0_h2, b.kernel_l1, scenario.exps)


def contraction_probe(scenario, config: FixedPointConfig, trials: int, rng=None) -> list[tuple[float, float]]:
    """Measured Lipschitz ratios of ``t_g`` on random pairs in the ball.

    Each entry is ``(||t v1 - t v2|| / ||v1 - v2||, eps * sigma)`` in H^2.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng)
    bound = config.eps * scenario_sigma(scenario)
    grid = scenario.u0.grid
    out = []
    while len(out) < trials:
        v1 = sample_ball(grid, config.rho, rng)
        v2 = sample_ball(grid, config.rho, rng)
        denom = h2_norm(v1 - v2)
        if denom == 0:
            continue
        num = h2_norm(apply_map_tg(v1, scenario, config) - apply_map_tg(v2, scenario, config))
        out.append((num / denom, bound))
    return out


@dataclass(frozen=True)
class ContinuityResult:
    lhs: float
    rhs: float
    sigma: float
    g_diff_c2: float
    m: float


def continuity_experiment(scenario, g1: NonlinearityDef, g2: NonlinearityDef, config: FixedPointConfig) -> ContinuityResult:
    """Compare ``||u_1 - u_2||_{H^2}`` with its bound for two nonlinearities.

    ``sigma`` uses the larger of the two C^2(I) norms.
    """
    g1.validate()
    g2.validate()
    b = scenario.bounds
    hw = b.interval_halfwidth
    m1 = c2_norm(g1.g, g1.g_prime, g1.g_double_prime, hw)
    m2 = c2_norm(g2.g, g2.g_prime, g2.g_double_prime, hw)
    if m1 == 0 or m2 == 0:
        raise AssumptionError("g vanishes identically on I", clause="g nontrivial on I")
    m = max(m1, m2)
    diff = g1 - g2
    diff_c2 = c2_norm(diff.g, diff.g_prime, diff.g_double_prime, hw)
    sigma, rhs = sigma_and_continuity(b.q, m, b.u0_h2, b.kernel_l1, scenario.exps, config.eps, diff_c2)
    u1 = picard_solve(scenario, config, g=g1).u
    u2 = picard_solve(scenario, config, g=g2).u
    return ContinuityResult(lhs=h2_norm(u1 - u2), rhs=rhs, sigma=sigma, g_diff_c2=diff_c2, m=m)
