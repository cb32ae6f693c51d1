"""Norms, the C^2 budget of the nonlinearity, and the closed-form constants
behind existence, contraction and continuity of the stationary solution.

Two bracket forms appear and they are *not* identical:

* ``H`` (smallness threshold) and the continuity estimate use
  ``[B * 3 / (3 - 4 s1) + Q^2 / 4]`` with ``B`` carrying ``2^(4 s1 + 8 s1 / 3)``;
* the contraction constant ``sigma`` uses ``[B' * 3 / (3 - 4 s1) + Q^2]`` with
  ``B'`` carrying only ``2^(4 s1)``.

Each is kept in its own form; see :func:`smallness_threshold`,
:func:`contraction_constant` and :func:`sigma_and_continuity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .exceptions import AssumptionError, NonContractiveError
from .spectral import Field, FracExponents, apply_fractional_laplacian, apply_symbol


@dataclass(frozen=True)
class NormReport:
    l1: float
    l2: float
    linf: float
    lp_frs: float
    h2: float
    h2s2: float
    moment_l1: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class MinimizationProblem:
    """``phi(R) = alpha R^(3 - 4 s1) + R^(-4 s1)`` on ``R > 0``."""

    s1: float
    alpha: float

    def __post_init__(self):
        if not 0.25 < self.s1 < 0.75:
            raise ValueError(f"s1 must lie in (1/4, 3/4), got {self.s1}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        return self.alpha * r ** (3 - 4 * self.s1) + r ** (-4 * self.s1)


@dataclass(frozen=True)
class BoundsReport:
    q: float
    m: float
    u0_h2: float
    interval_halfwidth: float
    h_constant: float
    eps_max: float
    sigma: float
    continuity_rhs: float | None
    kernel_l1: float
    rho: float
    c_e: float

    @property
    def contraction_at_eps_max(self) -> float:
        return self.eps_max * self.sigma

    def to_dict(self):
        return asdict(self)


def lp_norm(field: Field, p: float) -> float:
    """Riemann-sum ``L^p`` norm; ``p = inf`` gives the sample maximum."""
    a = np.abs(field.samples)
    if math.isinf(p):
        return float(a.max())
    return float((np.sum(a**p) * field.grid.cell_volume) ** (1.0 / p))


def l2_norm(field: Field) -> float:
    return float(np.sqrt(np.sum(field.samples**2) * field.grid.cell_volume))


def frs_exponent(s1: float) -> float:
    """Lebesgue exponent ``6 / (4 s1 - 1)`` of the fractional Sobolev inequality."""
    if s1 <= 0.25:
        return math.nan
    return 6.0 / (4.0 * s1 - 1.0)


def h2_norm(field: Field) -> float:
    """``(||u||^2 + ||Delta u||^2)^(1/2)``."""
    lap = apply_symbol(field, field.grid.p_squared)
    return float(np.hypot(l2_norm(field), l2_norm(lap)))


def h2s2_norm(field: Field, s2: float) -> float:
    """``(||u||^2 + ||(-Delta)^s2 u||^2)^(1/2)``."""
    return float(np.hypot(l2_norm(field), l2_norm(apply_fractional_laplacian(field, s2))))


def moment_l1(field: Field) -> float:
    """``|| |x| f ||_{L^1}`` with ``|x|`` measured from the box centre."""
    return float(np.sum(field.grid.radius * np.abs(field.samples)) * field.grid.cell_volume)


def compute_norms(field: Field, exps: FracExponents) -> NormReport:
    p = frs_exponent(exps.s1)
    return NormReport(
        l1=lp_norm(field, 1),
        l2=l2_norm(field),
        linf=lp_norm(field, math.inf),
        lp_frs=lp_norm(field, p) if not math.isnan(p) else math.nan,
        h2=h2_norm(field),
        h2s2=h2s2_norm(field, exps.s2),
        moment_l1=moment_l1(field),
    )


def compute_Q(kernel: Field, exps: FracExponents) -> float:
    """``|| (-Delta)^(1 - s1) K ||_{L^2}``, required to be positive."""
    q = l2_norm(apply_fractional_laplacian(kernel, 1.0 - exps.s1))
    if not q > 0:
        raise AssumptionError("kernel gives Q = 0; Q > 0 is required", clause="Q > 0", value=q)
    return q


def radius_split_minimizer(prob: MinimizationProblem) -> tuple[float, float]:
    """Closed-form minimiser ``R*`` of ``phi`` and the minimum ``phi(R*)``."""
    s1, alpha = prob.s1, prob.alpha
    a = 3.0 - 4.0 * s1
    r_star = (4.0 * s1 / (alpha * a)) ** (1.0 / 3.0)
    phi_min = 3.0 * a ** (4.0 * s1 / 3.0 - 1.0) * (4.0 * s1) ** (-4.0 * s1 / 3.0) * alpha ** (4.0 * s1 / 3.0)
    return r_star, phi_min


def c2_norm(g, g_prime, g_double_prime, halfwidth: float, n_points: int = 10_000) -> float:
    """``sup|g| + sup|g'| + sup|g''|`` over ``[-halfwidth, halfwidth]`` by dense sampling."""
    z = np.linspace(-halfwidth, halfwidth, n_points)
    sups = []
    for fn in (g, g_prime, g_double_prime):
        vals = np.abs(np.broadcast_to(np.asarray(fn(z), dtype=float), z.shape))
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite derivative sample on the interval")
        sups.append(float(vals.max()))
    return float(sum(sups))


def interval_halfwidth(u0_h2: float, c_e: float) -> float:
    return c_e * u0_h2 + c_e


def interval_and_M(g, u0_h2: float, c_e: float, n_points: int = 10_000) -> tuple[float, float]:
    """Half-width of the interval ``I`` and the C^2(I) norm of ``g``.

    ``g`` is any object with ``g``, ``g_prime`` and ``g_double_prime``
    callables (see :class:`mixfrac.fixed_point.NonlinearityDef`).
    """
    if u0_h2 < 0:
        raise ValueError("u0_h2 must be nonnegative")
    if not c_e > 0:
        raise ValueError("c_e must be positive")
    hw = interval_halfwidth(u0_h2, c_e)
    m = c2_norm(g.g, g.g_prime, g.g_double_prime, hw, n_points)
    if m == 0:
        raise AssumptionError(
            "g vanishes identically on the interval I", clause="g nontrivial on I", value=m
        )
    return hw, m


def _low_mode_term(kernel_l1, u0_h2, s1, two_power):
    a = u0_h2 + 1.0
    return (
        kernel_l1**2
        * a ** (8.0 * s1 / 3.0 - 2.0)
        * 3.0
        / ((3.0 - 4.0 * s1) * s1 ** (4.0 * s1 / 3.0) * math.pi ** (8.0 * s1 / 3.0) * 2.0**two_power)
    )


def _check_s1(exps):
    s1 = exps.s1 if isinstance(exps, FracExponents) else float(exps)
    if not 0 < s1 < 0.75:
        raise ValueError(f"s1 must be below 3/4 for the threshold constants, got {s1}")
    return s1


def smallness_threshold(q, m, u0_h2, kernel_l1, exps, rho=1.0) -> tuple[float, float]:
    """Smallness constant ``H`` and the admissible range ``eps <= rho / H``.

    ``H = 2 M (a)^2 [ ||K||_1^2 a^(8 s1/3 - 2) 3 / ((3 - 4 s1) s1^(4 s1/3)
    pi^(8 s1/3) 2^(4 s1 + 8 s1/3)) + Q^2 / 4 ]^(1/2)`` with ``a = ||u0||_{H^2} + 1``.
    """
    s1 = _check_s1(exps)
    if not 0 < rho <= 1:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    a = u0_h2 + 1.0
    bracket = _low_mode_term(kernel_l1, u0_h2, s1, 4.0 * s1 + 8.0 * s1 / 3.0) + q**2 / 4.0
    h = 2.0 * m * a**2 * math.sqrt(bracket)
    return h, rho / h


def contraction_constant(q, m, u0_h2, kernel_l1, exps) -> float:
    """``sigma``: the Lipschitz constant of the auxiliary map divided by ``eps``.

    Its bracket uses ``Q^2`` and ``2^(4 s1)``, unlike ``H``.
    """
    s1 = _check_s1(exps)
    a = u0_h2 + 1.0
    bracket = _low_mode_term(kernel_l1, u0_h2, s1, 4.0 * s1) + q**2
    return m * a * math.sqrt(bracket)


def sigma_and_continuity(q, m, u0_h2, kernel_l1, exps, eps, g1_minus_g2_c2) -> tuple[float, float]:
    """``sigma`` and the right side of the continuity estimate in ``g``.

    Raises :class:`NonContractiveError` when ``eps * sigma >= 1``.
    """
    s1 = _check_s1(exps)
    sigma = contraction_constant(q, m, u0_h2, kernel_l1, exps)
    if eps * sigma >= 1.0:
        raise NonContractiveError(f"eps * sigma = {eps * sigma:.6g} >= 1")
    a = u0_h2 + 1.0
    bracket = _low_mode_term(kernel_l1, u0_h2, s1, 4.0 * s1 + 8.0 * s1 / 3.0) + q**2 / 4.0
    rhs = eps / (1.0 - eps * sigma) * a**2 * math.sqrt(bracket) * g1_minus_g2_c2
    return sigma, rhs


def sobolev_ratio(field: Field, exps: FracExponents) -> float:
    """``||f||_{L^(6/(4 s1 - 1))} / ||(-Delta)^(1 - s1) f||_{L^2}``."""
    denom = l2_norm(apply_fractional_laplacian(field, 1.0 - exps.s1))
    if denom == 0:
        raise ZeroDivisionError("(-Delta)^(1 - s1) f vanishes")
    return lp_norm(field, frs_exponent(exps.s1)) / denom


def embedding_ratio(field: Field) -> float:
    """``||u||_inf / ||u||_{H^2}``; its maximum over a corpus estimates ``c_e``."""
    return lp_norm(field, math.inf) / h2_norm(field)
