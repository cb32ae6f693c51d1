import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixfrac.linear import (
    check_orthogonality,
    geometric_perturbations,
    identity_residual,
    project_zero_mode,
    sequences_experiment,
    solve_poisson,
)
from mixfrac.scenarios import gaussian, odd_gaussian
from mixfrac.spectral import TWO_PI_3_2, Field, FracExponents, GridSpec, apply_mixed_operator

EXPS = FracExponents(0.5, 0.75)
EXPS_B = FracExponents(0.8, 0.9, "linear-b")
TWO_PI_GRID = GridSpec(16, 2 * math.pi)


class TestSolvePoisson:
    @pytest.mark.parametrize("exps", [EXPS, FracExponents(0.1, 0.3, "linear-a"), EXPS_B])
    def test_manufactured_solution(self, grid32, exps):
        bump = gaussian(grid32, 1.0, 1.3)
        u = project_zero_mode(bump) + odd_gaussian(grid32, 0.7, 1.1, axis=2)
        rec = solve_poisson(apply_mixed_operator(u, exps), exps).solution
        np.testing.assert_allclose(rec.samples, u.samples, atol=1e-10 * np.abs(u.samples).max())

    @pytest.mark.parametrize("k", [(1, 0, 0), (1, 1, 0), (2, 1, 2)])
    def test_plane_wave(self, k):
        kx, ky, kz = k
        f = TWO_PI_GRID.sample(lambda x, y, z: np.cos(kx * x + ky * y + kz * z))
        p = math.sqrt(kx * kx + ky * ky + kz * kz)
        u = solve_poisson(f, EXPS).solution
        np.testing.assert_allclose(u.samples, f.samples / (p**1.0 + p**1.5), atol=1e-14)

    def test_unit_cosine_halves(self):
        f = TWO_PI_GRID.sample(lambda x, y, z: np.cos(x))
        np.testing.assert_allclose(solve_poisson(f, EXPS).solution.samples, f.samples / 2, atol=1e-15)

    def test_zero_rhs(self, grid32):
        rep = solve_poisson(Field.zeros(grid32), EXPS)
        assert np.all(rep.solution.samples == 0)
        assert rep.zero_mode_mass == 0.0 and rep.residual_l2 == 0.0

    def test_residual_small(self, grid32):
        rep = solve_poisson(gaussian(grid32, 2.0, 1.1), EXPS)
        assert rep.residual_l2 < 1e-12

    @settings(max_examples=20, deadline=None)
    @given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 1000))
    def test_superposition(self, a, b, seed):
        grid = GridSpec(8, 6.0)
        rng = np.random.default_rng(seed)
        f1, f2 = Field(grid, rng.standard_normal(grid.shape)), Field(grid, rng.standard_normal(grid.shape))
        lhs = solve_poisson(a * f1 + b * f2, EXPS).solution.samples
        rhs = (a * solve_poisson(f1, EXPS).solution + b * solve_poisson(f2, EXPS).solution).samples
        np.testing.assert_allclose(lhs, rhs, atol=1e-11)


class TestOrthogonality:
    def test_gaussian_mass(self, grid32):
        f = gaussian(grid32)
        ip, ok = check_orthogonality(f)
        assert ip == pytest.approx(TWO_PI_3_2, rel=1e-12)
        assert not ok
        rep = solve_poisson(f, EXPS_B)
        assert rep.zero_mode_mass == pytest.approx(1.0, rel=1e-12)
        assert rep.orthogonality_violation

    def test_odd_field_satisfies(self, grid32):
        f = odd_gaussian(grid32, 1.0, 1.0, axis=0)
        assert check_orthogonality(f)[1]
        rep = solve_poisson(f, EXPS_B)
        assert rep.orthogonality_satisfied and not rep.orthogonality_violation

    def test_mean_removed_field_satisfies(self, grid32):
        rep = solve_poisson(project_zero_mode(gaussian(grid32)), EXPS_B)
        assert rep.orthogonality_satisfied

    def test_violation_only_flagged_in_linear_b(self, grid32):
        rep = solve_poisson(gaussian(grid32), EXPS)
        assert not rep.orthogonality_satisfied
        assert not rep.orthogonality_violation


class TestIdentity:
    @pytest.mark.parametrize("exps", [EXPS, FracExponents(0.3, 0.6), FracExponents(0.7, 0.95)])
    def test_residual(self, grid32, exps):
        f = gaussian(grid32, 1.0, 1.2)
        u0 = solve_poisson(f, exps).solution
        assert identity_residual(u0, f, exps) <= 1e-9

    def test_scenario_residual(self, gauss_quadratic):
        sc = gauss_quadratic
        assert identity_residual(sc.u0, sc.f, sc.exps) <= 1e-9


class TestSequences:
    def test_geometric_gaps_halve(self, grid32):
        f = gaussian(grid32)
        items = sequences_experiment(f, geometric_perturbations(odd_gaussian(grid32, 1.0, 1.5, axis=1), 10), EXPS)
        gaps = np.array([it.u_gap_h2s2 for it in items])
        np.testing.assert_allclose(gaps[1:] / gaps[:-1], 0.5, rtol=1e-10)
        for it in items:
            assert it.spectral_gap <= it.f_gap_l2 + 1e-10
            assert not it.flagged

    def test_zero_perturbations(self, grid32):
        items = sequences_experiment(gaussian(grid32), [Field.zeros(grid32)] * 3, EXPS)
        assert all(it.u_gap_h2s2 == 0 and it.f_gap_l2 == 0 for it in items)

    def test_single_flagged_item(self, grid32):
        f = odd_gaussian(grid32, 1.0, 1.0, axis=0)
        phi = odd_gaussian(grid32, 1.0, 1.5, axis=1)
        perts = geometric_perturbations(phi, 5)
        perts[2] = perts[2] + gaussian(grid32, 0.1, 1.0)
        items = sequences_experiment(f, perts, EXPS_B)
        assert [it.flagged for it in items] == [False, False, True, False, False]
        assert [it.orthogonality_satisfied for it in items] == [True, True, False, True, True]

    def test_geometric_perturbations(self, grid32):
        phi = gaussian(grid32)
        perts = geometric_perturbations(phi, 3)
        assert [p.samples[16, 16, 16] for p in perts] == [0.5, 0.25, 0.125]
