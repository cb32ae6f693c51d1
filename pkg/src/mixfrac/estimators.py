"""Estimator-style wrappers so the solvers compose with scikit-learn tooling.

:class:`MixedFractionalPoisson` is a transformer mapping right sides ``f`` to
solutions ``u`` (``inverse_transform`` applies the operator back).
:class:`StationarySolver` fits the full nonlinear problem for one scenario;
``get_params``/``set_params``/``clone`` make epsilon sweeps one-liners.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_exponent, check_field_array
from .analysis import h2_norm
from .fixed_point import FixedPointConfig, picard_solve
from .linear import TOL_ORTH, solve_poisson
from .scenarios import Scenario, ScenarioSpec, build_scenario, get_scenario
from .spectral import Field, FracExponents, apply_mixed_operator


class MixedFractionalPoisson(TransformerMixin, BaseEstimator):
    """Solve ``[(-Delta)^s1 + (-Delta)^s2] u = f`` on a periodic cube.

    Parameters
    ----------
    s1, s2 : float
        Fractional powers, ``0 < s1 < s2 < 1``.
    regime : {"linear-a", "linear-b"}
        Declared solvability window of ``s1``; never inferred.
    box_length : float
        Side of the box when plain arrays are passed.
    tol_orth : float
        Zero-mode tolerance for the ``linear-b`` orthogonality verdict.
    """

    def __init__(self, s1=0.5, s2=0.75, regime="linear-a", box_length=20.0, tol_orth=TOL_ORTH):
        self.s1 = s1
        self.s2 = s2
        self.regime = regime
        self.box_length = box_length
        self.tol_orth = tol_orth

    def fit(self, X, y=None):
        check_exponent(self.s1, "s1")
        check_exponent(self.s2, "s2")
        _, grid = check_field_array(X, box_length=self.box_length)
        self.exps_ = FracExponents(self.s1, self.s2, self.regime)
        self.grid_ = grid
        return self

    def solve(self, X):
        """Full :class:`~mixfrac.linear.LinearSolveReport` for right side ``X``."""
        check_is_fitted(self, "grid_")
        samples, grid = check_field_array(X, self.grid_)
        return solve_poisson(Field(grid, samples), self.exps_, self.tol_orth)

    def transform(self, X):
        return np.array(self.solve(X).solution.samples)

    def inverse_transform(self, X):
        check_is_fitted(self, "grid_")
        samples, grid = check_field_array(X, self.grid_)
        return np.array(apply_mixed_operator(Field(grid, samples), self.exps_).samples)


class StationarySolver(BaseEstimator):
    """Fixed-point solver for the stationary nonlocal problem of one scenario.

    ``fit`` accepts a preset name, a :class:`ScenarioSpec` or a built
    :class:`Scenario`.  When ``eps`` is None it is set to
    ``eps_fraction * eps_max``.

    Attributes
    ----------
    scenario_ : Scenario
    bounds_ : BoundsReport
    eps_ : float
    trace_ : PicardTrace
    u_p_, u_ : Field
        Perturbation and full stationary solution.
    n_iter_ : int
    """

    def __init__(self, eps=None, eps_fraction=0.5, rho=1.0, tol=1e-10, max_iters=200,
                 c_e=1.0, ball_policy="reject"):
        self.eps = eps
        self.eps_fraction = eps_fraction
        self.rho = rho
        self.tol = tol
        self.max_iters = max_iters
        self.c_e = c_e
        self.ball_policy = ball_policy

    def _scenario(self, X):
        if isinstance(X, Scenario):
            return X
        spec = get_scenario(X) if isinstance(X, str) else X
        if not isinstance(spec, ScenarioSpec):
            raise TypeError(f"expected a scenario name, ScenarioSpec or Scenario, got {type(X).__name__}")
        return build_scenario(replace(spec, c_e=self.c_e, rho=self.rho))

    def fit(self, X, y=None):
        sc = self._scenario(X)
        if sc.bounds is None:
            raise ValueError(f"scenario {sc.spec.name!r} is not in the nonlinear regime")
        eps = self.eps_fraction * sc.bounds.eps_max if self.eps is None else float(self.eps)
        config = FixedPointConfig(eps=eps, rho=self.rho, max_iters=self.max_iters, tol=self.tol,
                                  ball_policy=self.ball_policy)
        trace = picard_solve(sc, config)
        self.scenario_ = sc
        self.bounds_ = sc.bounds
        self.eps_ = eps
        self.config_ = config
        self.trace_ = trace
        self.u_p_ = trace.u_p
        self.u_ = trace.u
        self.n_iter_ = trace.iterations
        return self

    def predict(self, X=None):
        """Samples of the stationary solution ``u0 + u_p``."""
        check_is_fitted(self, "u_")
        return np.array(self.u_.samples)

    @property
    def perturbation_norm_(self):
        check_is_fitted(self, "u_p_")
        return h2_norm(self.u_p_)
