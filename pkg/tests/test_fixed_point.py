import warnings

import numpy as np
import pytest

from mixfrac.analysis import h2_norm
from mixfrac.exceptions import AssumptionError, BallExitError, IntervalExitError, NonConvergenceError
from mixfrac.fixed_point import (
    FixedPointConfig,
    NonlinearityDef,
    apply_map_tg,
    continuity_experiment,
    contraction_probe,
    fixed_point_residual,
    picard_solve,
    sample_ball,
    scenario_sigma,
)
from mixfrac.spectral import Field

TOL = 1e-10


def straight_line_map(v, sc, eps):
    """The auxiliary map written directly with numpy's unnormalised FFT."""
    grid = sc.grid
    h3 = grid.cell_volume
    total = sc.u0.samples + v.samples
    g = sc.g.g(total)
    k0 = np.fft.ifftshift(sc.kernel.samples)  # kernel origin moved to index 0
    conv = np.real(np.fft.ifftn(np.fft.fftn(k0) * np.fft.fftn(g))) * h3
    p = grid.p_abs
    sym = p ** (2 * sc.exps.s1) + p ** (2 * sc.exps.s2)
    sym[0, 0, 0] = 1.0
    u_hat = np.fft.fftn(eps * conv) / sym
    u_hat[0, 0, 0] = 0.0
    return np.real(np.fft.ifftn(u_hat))


@pytest.fixture(scope="module")
def eps_max(gauss_quadratic):
    return gauss_quadratic.bounds.eps_max


class TestMap:
    def test_matches_straight_line_pipeline(self, gauss_quadratic, eps_max):
        rng = np.random.default_rng(5)
        v = sample_ball(gauss_quadratic.grid, 0.5, rng)
        out = apply_map_tg(v, gauss_quadratic, FixedPointConfig(eps=eps_max))
        ref = straight_line_map(v, gauss_quadratic, eps_max)
        np.testing.assert_allclose(out.samples, ref, atol=1e-14 * np.abs(ref).max() + 1e-300)
        assert np.abs(ref).max() > 0

    def test_zero_eps_gives_zero(self, gauss_quadratic):
        v = sample_ball(gauss_quadratic.grid, 1.0, np.random.default_rng(0))
        assert np.all(apply_map_tg(v, gauss_quadratic, FixedPointConfig(eps=0.0)).samples == 0)

    def test_linear_in_eps(self, gauss_quadratic, eps_max):
        v = sample_ball(gauss_quadratic.grid, 1.0, np.random.default_rng(1))
        a = apply_map_tg(v, gauss_quadratic, FixedPointConfig(eps=eps_max / 3)).samples
        b = apply_map_tg(v, gauss_quadratic, FixedPointConfig(eps=eps_max)).samples
        np.testing.assert_allclose(3 * a, b, atol=1e-15)

    def test_zero_nonlinearity(self, gauss_quadratic, eps_max):
        zero = NonlinearityDef.power(2, 0.0)
        v = Field.zeros(gauss_quadratic.grid)
        out = apply_map_tg(v, gauss_quadratic, FixedPointConfig(eps=eps_max), g=zero)
        assert np.all(out.samples == 0)

    def test_maps_ball_into_ball(self, gauss_quadratic, eps_max):
        rng = np.random.default_rng(2)
        cfg = FixedPointConfig(eps=eps_max)
        for _ in range(10):
            v = sample_ball(gauss_quadratic.grid, 1.0, rng, radius=1.0)
            assert h2_norm(apply_map_tg(v, gauss_quadratic, cfg)) <= 1.0

    def test_interval_exit(self, gauss_quadratic, eps_max):
        hw = gauss_quadratic.bounds.interval_halfwidth
        v = Field(gauss_quadratic.grid, np.full(gauss_quadratic.grid.shape, 2 * hw))
        with pytest.raises(IntervalExitError):
            apply_map_tg(v, gauss_quadratic, FixedPointConfig(eps=eps_max))


class TestPicard:
    def test_zero_eps(self, gauss_quadratic):
        tr = picard_solve(gauss_quadratic, FixedPointConfig(eps=0.0))
        assert tr.iterations == 1 and tr.converged
        assert h2_norm(tr.u_p) == 0
        np.testing.assert_array_equal(tr.u.samples, gauss_quadratic.u0.samples)

    def test_ratios_below_analytic_constant(self, gauss_quadratic, eps_max):
        eps = eps_max / 2
        tr = picard_solve(gauss_quadratic, FixedPointConfig(eps=eps, tol=TOL))
        assert tr.converged and tr.in_ball
        assert max(tr.contraction_ratios) <= eps * scenario_sigma(gauss_quadratic)
        assert all(d2 <= d1 for d1, d2 in zip(tr.h2_distances, tr.h2_distances[1:]))

    def test_geometric_convergence(self, gauss_quadratic, eps_max):
        tr = picard_solve(gauss_quadratic, FixedPointConfig(eps=eps_max, tol=1e-14))
        ratios = tr.contraction_ratios[:-1]
        assert len(ratios) >= 2
        assert max(ratios) < 0.01

    @pytest.mark.parametrize("fraction", [0.1, 0.5, 1.0])
    def test_steps_within_geometric_envelope(self, gauss_quadratic, eps_max, fraction):
        eps = fraction * eps_max
        q = eps * scenario_sigma(gauss_quadratic)
        d = picard_solve(gauss_quadratic, FixedPointConfig(eps=eps, tol=TOL)).h2_distances
        for k, dist in enumerate(d):
            assert dist <= d[0] * q**k * (1 + 1e-6)

    def test_unique_from_random_starts(self, gauss_quadratic, eps_max):
        cfg = FixedPointConfig(eps=eps_max, tol=TOL)
        ref = picard_solve(gauss_quadratic, cfg).u_p
        rng = np.random.default_rng(11)
        for _ in range(3):
            v0 = sample_ball(gauss_quadratic.grid, 1.0, rng)
            assert h2_norm(picard_solve(gauss_quadratic, cfg, v0=v0).u_p - ref) <= 10 * TOL

    def test_fixed_point_residual(self, gauss_quadratic, eps_max):
        cfg = FixedPointConfig(eps=eps_max, tol=TOL)
        tr = picard_solve(gauss_quadratic, cfg)
        assert fixed_point_residual(tr.u_p, gauss_quadratic, cfg) < 1e-9
        assert h2_norm(tr.u_p) > 0

    def test_perturbation_scales_with_eps(self, gauss_quadratic, eps_max):
        small = [h2_norm(picard_solve(gauss_quadratic, FixedPointConfig(eps=e)).u_p) / e
                 for e in (eps_max * 1e-3, eps_max * 2e-3)]
        assert small[0] == pytest.approx(small[1], rel=1e-3)

    def test_nonconvergence_carries_trace(self, gauss_quadratic, eps_max):
        with pytest.raises(NonConvergenceError) as info:
            picard_solve(gauss_quadratic, FixedPointConfig(eps=eps_max, max_iters=2, tol=1e-30))
        assert info.value.trace.iterations == 2

    def test_ball_policy(self, gauss_quadratic, eps_max):
        # ||u_p|| is about 2.5e-3 at eps_max, so a ball of radius 1e-3 is left
        eps = eps_max
        with pytest.raises(BallExitError):
            picard_solve(gauss_quadratic, FixedPointConfig(eps=eps, rho=0.001))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            tr = picard_solve(gauss_quadratic, FixedPointConfig(eps=eps, rho=0.001, ball_policy="warn"))
        assert not tr.in_ball
        assert any("rho" in str(w.message) for w in caught)


class TestProbe:
    def test_zero_eps(self, gauss_quadratic):
        probe = contraction_probe(gauss_quadratic, FixedPointConfig(eps=0.0), 3, rng=0)
        assert all(r == 0 and b == 0 for r, b in probe)

    def test_ratios_below_bound(self, gauss_quadratic, eps_max):
        probe = contraction_probe(gauss_quadratic, FixedPointConfig(eps=eps_max), 10, rng=3)
        assert len(probe) == 10
        assert all(r <= b + 1e-8 and r < 1 for r, b in probe)

    def test_sample_ball_radius(self, grid32):
        rng = np.random.default_rng(0)
        for _ in range(5):
            assert h2_norm(sample_ball(grid32, 0.7, rng)) <= 0.7 * (1 + 1e-12)
        assert h2_norm(sample_ball(grid32, 1.0, rng, radius=0.3)) == pytest.approx(0.3)


class TestContinuity:
    def test_identical_nonlinearities(self, gauss_quadratic, eps_max):
        g = gauss_quadratic.g
        res = continuity_experiment(gauss_quadratic, g, g, FixedPointConfig(eps=eps_max / 2))
        assert res.lhs == 0 and res.rhs == 0

    def test_zero_eps(self, gauss_quadratic):
        g = gauss_quadratic.g
        res = continuity_experiment(gauss_quadratic, g, g.scaled(1.01), FixedPointConfig(eps=0.0))
        assert res.lhs == 0 and res.rhs == 0

    @pytest.mark.parametrize("fraction", [0.25, 1.0])
    def test_bound_holds(self, gauss_quadratic, eps_max, fraction):
        g = gauss_quadratic.g
        cfg = FixedPointConfig(eps=fraction * eps_max, tol=TOL)
        res = continuity_experiment(gauss_quadratic, g, g.scaled(1.01), cfg)
        assert 0 < res.lhs <= res.rhs + 1e-8
        assert res.g_diff_c2 == pytest.approx(0.01 * gauss_quadratic.bounds.m, rel=1e-12)


class TestNonlinearityDef:
    @pytest.mark.parametrize("degree,clause", [(0, "g(0) = 0"), (1, "g'(0) = 0")])
    def test_rejects_low_degree(self, degree, clause):
        with pytest.raises(AssumptionError) as info:
            NonlinearityDef.power(degree).validate()
        assert info.value.clause == clause

    def test_power_derivatives(self):
        g = NonlinearityDef.power(3, 2.0)
        z = np.array([-1.5, 0.0, 2.0])
        np.testing.assert_allclose(g.g(z), 2 * z**3)
        np.testing.assert_allclose(g.g_prime(z), 6 * z**2)
        np.testing.assert_allclose(g.g_double_prime(z), 12 * z)
        assert g.params == {"kind": "power", "degree": 3, "coeff": 2.0}

    def test_difference(self):
        g = NonlinearityDef.power(2) - NonlinearityDef.power(2, 0.5)
        assert g.g(2.0) == pytest.approx(2.0)

    def test_config_validation(self):
        for kwargs in ({"eps": -1.0}, {"rho": 0.0}, {"rho": 1.5}, {"tol": 0.0}, {"max_iters": 0},
                       {"ball_policy": "ignore"}):
            with pytest.raises(ValueError):
                FixedPointConfig(**kwargs)
