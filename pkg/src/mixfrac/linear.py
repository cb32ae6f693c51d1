"""Symbol-division solver for ``[(-Delta)^s1 + (-Delta)^s2] u = f``.

The symbol vanishes at ``p = 0``.  On the periodic box the zero mode of the
solution is always set to zero and the zero mode of ``f`` is projected out;
its size is recorded.  For ``s1 >= 3/4`` the whole-space problem is solvable
only when ``f`` integrates to zero, so that case additionally reports whether
the projected mass was negligible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import h2s2_norm, l2_norm, lp_norm
from .spectral import (
    Field,
    FracExponents,
    SpectralField,
    apply_fractional_laplacian,
    apply_mixed_operator,
    apply_symbol,
    forward_transform,
    inverse_transform,
)

TOL_ORTH = 1e-8


@dataclass(frozen=True, eq=False)
class LinearSolveReport:
    solution: Field
    residual_l2: float
    zero_mode_mass: float
    regime: str
    orthogonality_satisfied: bool

    @property
    def orthogonality_violation(self) -> bool:
        """True when the right side breaks the zero-mass condition in ``linear-b``."""
        return self.regime == "linear-b" and not self.orthogonality_satisfied


def project_zero_mode(f: Field) -> Field:
    """``f`` minus its mean: the discrete projection onto zero-mass fields."""
    return f - float(f.samples.mean())


def solve_poisson(f: Field, exps: FracExponents, tol_orth: float = TOL_ORTH) -> LinearSolveReport:
    """Solve for ``u`` with ``u_hat = f_hat / (|p|^(2 s1) + |p|^(2 s2))`` and ``u_hat(0) = 0``.

    ``orthogonality_satisfied`` compares ``|f_hat(0)|`` with ``tol_orth``.  It
    is only a solvability verdict in the ``linear-b`` regime, where a
    violation is flagged through :attr:`LinearSolveReport.orthogonality_violation`
    rather than raised.
    """
    grid = f.grid
    f_hat = forward_transform(f).coeffs
    zero_mass = float(abs(f_hat[0, 0, 0]))
    symbol = exps.symbol(grid)
    symbol[0, 0, 0] = 1.0
    u_hat = f_hat / symbol
    u_hat[0, 0, 0] = 0.0
    u = inverse_transform(SpectralField(grid, u_hat))
    residual = l2_norm(apply_mixed_operator(u, exps) - project_zero_mode(f))
    return LinearSolveReport(
        solution=u,
        residual_l2=residual,
        zero_mode_mass=zero_mass,
        regime=exps.linear_regime,
        orthogonality_satisfied=zero_mass <= tol_orth,
    )


def check_orthogonality(f: Field, tol_orth: float = TOL_ORTH) -> tuple[float, bool]:
    """Quadrature of ``(f, 1)`` and whether it vanishes to ``tol_orth``."""
    ip = f.integral()
    return ip, abs(ip) <= tol_orth


def identity_residual(u0: Field, f: Field, exps: FracExponents) -> float:
    """``|| [-Delta + (-Delta)^(1 + s2 - s1)] u0 - (-Delta)^(1 - s1) f ||_{L^2}``.

    The identity follows from applying ``(-Delta)^(1 - s1)`` to the linear
    equation; the zero mode drops out on both sides.
    """
    grid = u0.grid
    lhs_symbol = grid.p_squared + grid.symbol_power(1.0 + exps.s2 - exps.s1)
    lhs = apply_symbol(u0, lhs_symbol)
    rhs = apply_fractional_laplacian(f, 1.0 - exps.s1)
    return l2_norm(lhs - rhs)


@dataclass(frozen=True)
class SequenceItem:
    n: int
    f_gap_l2: float
    f_gap_l1: float
    u_gap_h2s2: float
    spectral_gap: float
    orthogonality_satisfied: bool
    flagged: bool


def sequences_experiment(
    f_target: Field,
    perturbations,
    exps: FracExponents,
    tol_orth: float = TOL_ORTH,
) -> list[SequenceItem]:
    """Solve ``l u_n = f + perturbation_n`` and ``l u = f`` and report the gaps.

    ``spectral_gap`` is ``||(-Delta)^s2 (u_n - u)||_{L^2}``; on zero-mass right
    sides it is bounded by ``||f_n - f||_{L^2}``.  In ``linear-b`` every item
    whose ``f_n`` fails the zero-mass test is flagged; the others are unaffected.
    """
    u = solve_poisson(f_target, exps, tol_orth).solution
    items = []
    for n, pert in enumerate(perturbations, start=1):
        f_n = f_target + pert
        rep = solve_poisson(f_n, exps, tol_orth)
        diff = rep.solution - u
        gap = f_n - f_target
        items.append(
            SequenceItem(
                n=n,
                f_gap_l2=l2_norm(gap),
                f_gap_l1=lp_norm(gap, 1),
                u_gap_h2s2=h2s2_norm(diff, exps.s2),
                spectral_gap=l2_norm(apply_fractional_laplacian(diff, exps.s2)),
                orthogonality_satisfied=rep.orthogonality_satisfied,
                flagged=rep.orthogonality_violation,
            )
        )
    return items


def geometric_perturbations(phi: Field, count: int) -> list[Field]:
    """``phi / 2^n`` for ``n = 1..count``."""
    return [phi * 0.5**n for n in range(1, count + 1)]
