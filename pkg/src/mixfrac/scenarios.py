"""Admissible (f, K, g) families and their assembly into solvable problems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .analysis import (
    BoundsReport,
    compute_Q,
    h2_norm,
    interval_and_M,
    contraction_constant,
    lp_norm,
    smallness_threshold,
    l2_norm,
)
from .exceptions import AssumptionError
from .fixed_point import NonlinearityDef
from .linear import LinearSolveReport, solve_poisson
from .spectral import Field, FracExponents, GridSpec, apply_fractional_laplacian

BOUNDARY_WARN = 1e-8


def gaussian(grid, amplitude=1.0, width=1.0, center=(0.0, 0.0, 0.0)):
    cx, cy, cz = center
    w2 = 2.0 * width * width
    return grid.sample(
        lambda x, y, z: amplitude * np.exp(-((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2) / w2)
    )


def odd_gaussian(grid, amplitude=1.0, width=1.0, axis=0):
    g = gaussian(grid, 1.0, width)
    return Field(grid, amplitude * grid.mesh[int(axis)] / width * g.samples)


FAMILIES = {"gaussian": gaussian, "odd_gaussian": odd_gaussian}


def sample_family(grid: GridSpec, definition: dict) -> Field:
    """Materialise ``{"kind": ..., **params}`` on ``grid``."""
    params = dict(definition)
    kind = params.pop("kind", "gaussian")
    try:
        builder = FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown function family {kind!r}; known: {sorted(FAMILIES)}") from None
    if "center" in params:
        params["center"] = tuple(float(c) for c in params["center"])
    return builder(grid, **params)


def nonlinearity_from_def(definition) -> NonlinearityDef:
    if isinstance(definition, NonlinearityDef):
        return definition
    params = dict(definition)
    kind = params.pop("kind", "power")
    if kind != "power":
        raise ValueError(f"unknown nonlinearity family {kind!r}")
    return NonlinearityDef.power(int(params.get("degree", 2)), float(params.get("coeff", 1.0)))


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    f_def: dict
    k_def: dict
    g_def: object
    exps: FracExponents
    grid: GridSpec = GridSpec()
    c_e: float = 1.0
    rho: float = 1.0

    def with_grid(self, n_per_axis=None, box_length=None) -> "ScenarioSpec":
        grid = GridSpec(
            n_per_axis or self.grid.n_per_axis,
            box_length or self.grid.box_length,
        )
        return replace(self, grid=grid)

    def to_dict(self) -> dict:
        g = nonlinearity_from_def(self.g_def)
        return {
            "name": self.name,
            "f": dict(self.f_def),
            "kernel": dict(self.k_def),
            "g": dict(g.params) or {"label": g.label},
            "s1": self.exps.s1,
            "s2": self.exps.s2,
            "regime": self.exps.regime,
            "n": self.grid.n_per_axis,
            "box": self.grid.box_length,
            "c_e": self.c_e,
            "rho": self.rho,
        }


@dataclass(eq=False)
class Scenario:
    """A built problem: sampled fields, the linear solution ``u0`` and its bounds."""

    spec: ScenarioSpec
    f: Field
    kernel: Field
    g: NonlinearityDef
    u0_report: LinearSolveReport
    bounds: BoundsReport | None
    warnings: list = dc_field(default_factory=list)

    @property
    def u0(self) -> Field:
        return self.u0_report.solution

    @property
    def exps(self) -> FracExponents:
        return self.spec.exps

    @property
    def grid(self) -> GridSpec:
        return self.spec.grid

    @property
    def sigma(self) -> float:
        b = self.bounds
        return contraction_constant(b.q, b.m, b.u0_h2, b.kernel_l1, self.exps)


def build_scenario(spec: ScenarioSpec) -> Scenario:
    """Sample f and K, solve for ``u0`` and evaluate every bound.

    All violated hypotheses are collected and raised together as one
    :class:`AssumptionError` whose ``items`` lists ``(clause, message)`` pairs.
    Bounds are only defined in the ``nonlinear`` regime; other regimes get
    ``bounds=None``.
    """
    grid, exps = spec.grid, spec.exps
    items = []
    warns = []
    f = sample_family(grid, spec.f_def)
    kernel = sample_family(grid, spec.k_def)
    g = nonlinearity_from_def(spec.g_def)

    if not np.abs(f.samples).max() > 0:
        items.append(("f nontrivial", "f vanishes identically"))
    frac_f = apply_fractional_laplacian(f, 1.0 - exps.s1)
    if not math.isfinite(l2_norm(frac_f)) or not math.isfinite(lp_norm(f, 1)):
        items.append(("f in L^1, (-Delta)^(1-s1) f in L^2", "norm not finite"))
    q = None
    try:
        q = compute_Q(kernel, exps)
    except AssumptionError as exc:
        items.append((exc.clause, str(exc)))
    try:
        g.validate()
    except AssumptionError as exc:
        items.append((exc.clause, str(exc)))

    for label, fld in (("f", f), ("K", kernel)):
        peak = float(np.abs(fld.samples).max())
        edge = fld.boundary_max()
        if peak > 0 and edge > BOUNDARY_WARN * peak:
            warns.append(f"{label} reaches {edge:.3e} on the box boundary (peak {peak:.3e})")

    u0_report = solve_poisson(f, exps)
    if u0_report.orthogonality_violation:
        items.append(("(f, 1) = 0", f"zero-mode mass {u0_report.zero_mode_mass:.3e} with s1 >= 3/4"))

    bounds = None
    if not items and exps.regime == "nonlinear":
        u0_h2 = h2_norm(u0_report.solution)
        try:
            hw, m = interval_and_M(g, u0_h2, spec.c_e)
        except AssumptionError as exc:
            items.append((exc.clause, str(exc)))
        else:
            k_l1 = lp_norm(kernel, 1)
            h, eps_max = smallness_threshold(q, m, u0_h2, k_l1, exps, spec.rho)
            bounds = BoundsReport(
                q=q,
                m=m,
                u0_h2=u0_h2,
                interval_halfwidth=hw,
                h_constant=h,
                eps_max=eps_max,
                sigma=contraction_constant(q, m, u0_h2, k_l1, exps),
                continuity_rhs=None,
                kernel_l1=k_l1,
                rho=spec.rho,
                c_e=spec.c_e,
            )

    if items:
        text = "; ".join(f"[{clause}] {msg}" for clause, msg in items)
        err = AssumptionError(f"scenario {spec.name!r} violates: {text}", clause=items[0][0])
        err.items = items
        raise err
    return Scenario(spec=spec, f=f, kernel=kernel, g=g, u0_report=u0_report, bounds=bounds, warnings=warns)


def _preset(name, f_def, k_def, g_def, s1, s2, regime="nonlinear", n=32, box=20.0):
    return ScenarioSpec(
        name=name,
        f_def=f_def,
        k_def=k_def,
        g_def=g_def,
        exps=FracExponents(s1, s2, regime),
        grid=GridSpec(n, box),
    )


_GAUSS_F = {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
_GAUSS_K = {"kind": "gaussian", "amplitude": 1.0, "width": 0.8}
_QUAD = {"kind": "power", "degree": 2, "coeff": 1.0}

PRESETS = {
    "gauss-quadratic": _preset("gauss-quadratic", _GAUSS_F, _GAUSS_K, _QUAD, 0.5, 0.75),
    "gauss-cubic": _preset(
        "gauss-cubic", _GAUSS_F, _GAUSS_K, {"kind": "power", "degree": 3, "coeff": 1.0}, 0.5, 0.75
    ),
    "narrow-kernel": _preset(
        "narrow-kernel", _GAUSS_F, {"kind": "gaussian", "amplitude": 1.0, "width": 0.3}, _QUAD, 0.5, 0.75, n=96
    ),
    "regime-b-linear": _preset(
        "regime-b-linear",
        {"kind": "odd_gaussian", "amplitude": 1.0, "width": 1.0, "axis": 0},
        _GAUSS_K,
        _QUAD,
        0.8,
        0.9,
        regime="linear-b",
    ),
}


def list_scenarios() -> dict[str, ScenarioSpec]:
    return dict(PRESETS)


def get_scenario(name: str) -> ScenarioSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(PRESETS)}") from None
