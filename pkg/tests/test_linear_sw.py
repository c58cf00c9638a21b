import numpy as np
import pytest

from wavelab.grid import Field, Grid1D, deriv, spectral_shift
from wavelab.linear_sw import SurfaceProfile, evolve_dalembert, reconstruct_irrotational


def gaussian_profile(grid, amp=0.1, width=1.0, center=0.0):
    return Field.from_function(grid, lambda x: amp * np.exp(-(((x - center) / width) ** 2)))


@pytest.fixture
def grid():
    return Grid1D(256, 40.0)


class TestEvolveDalembert:
    def test_time_zero_is_sum(self, grid):
        f = gaussian_profile(grid)
        g = gaussian_profile(grid, center=5.0)
        prof = SurfaceProfile(f=f, g_left=g)
        eta = evolve_dalembert(prof, 0.0)
        np.testing.assert_allclose(eta.values, f.values + g.values, atol=1e-14)

    def test_right_mover_translates(self, grid):
        prof = SurfaceProfile(f=gaussian_profile(grid))
        eta = evolve_dalembert(prof, 1.0)
        expected = gaussian_profile(grid, center=1.0)
        assert np.max(np.abs(eta.values - expected.values)) < 1e-12

    def test_left_mover_translates_backwards(self, grid):
        prof = SurfaceProfile(f=Field.zeros(grid), g_left=gaussian_profile(grid))
        eta = evolve_dalembert(prof, 2.0)
        expected = gaussian_profile(grid, center=-2.0)
        assert np.max(np.abs(eta.values - expected.values)) < 1e-12

    def test_wave_equation_residual_second_order(self, grid):
        """Centered-FD residual eta_tt - eta_xx shrinks ~4x under dt halving."""
        prof = SurfaceProfile(f=gaussian_profile(grid), g_left=gaussian_profile(grid, center=3.0))
        t0 = 0.7

        def residual(dt):
            em = evolve_dalembert(prof, t0 - dt).values
            e0 = evolve_dalembert(prof, t0)
            ep = evolve_dalembert(prof, t0 + dt).values
            eta_tt = (ep - 2.0 * e0.values + em) / dt**2
            eta_xx = deriv(e0, 2).values
            return np.max(np.abs(eta_tt - eta_xx))

        r1, r2 = residual(0.02), residual(0.01)
        assert r1 < 1e-3
        assert r1 / r2 == pytest.approx(4.0, rel=0.1)

    def test_semigroup_property(self, grid):
        prof = SurfaceProfile(f=gaussian_profile(grid))
        direct = evolve_dalembert(prof, 1.3 + 2.4)
        stage = evolve_dalembert(prof, 1.3)
        chained = evolve_dalembert(SurfaceProfile(f=stage), 2.4)
        assert np.max(np.abs(direct.values - chained.values)) < 1e-12

    def test_mismatched_grids_rejected(self, grid):
        other = Grid1D(128, 40.0)
        with pytest.raises(ValueError):
            SurfaceProfile(f=gaussian_profile(grid), g_left=Field.zeros(other))


class TestReconstructIrrotational:
    def test_flat_surface(self, grid):
        eta = Field.zeros(grid)
        u, v = reconstruct_irrotational(eta, Field.zeros(grid), c0=0.4, z=0.5)
        assert np.max(np.abs(u.values - 0.4)) == 0.0
        assert np.max(np.abs(v.values)) == 0.0

    def test_bottom_kinematic_condition(self, grid):
        eta = gaussian_profile(grid)
        _, v = reconstruct_irrotational(eta, deriv(eta, 1), c0=0.0, z=0.0)
        assert np.max(np.abs(v.values)) == 0.0

    def test_surface_kinematic_condition_chain_rule(self, grid):
        """For a right-mover, v at z=1 equals eta_t = -eta_x analytically."""
        t = 1.7
        prof = SurfaceProfile(f=gaussian_profile(grid))
        eta = evolve_dalembert(prof, t)
        eta_x = deriv(eta, 1)
        _, v = reconstruct_irrotational(eta, eta_x, c0=0.0, z=1.0)
        # analytic eta_t for f(x - t), with f a Gaussian
        x = grid.x
        amp, width = 0.1, 1.0
        eta_t_exact = amp * (2.0 * (x - t) / width**2) * np.exp(-(((x - t) / width) ** 2))
        assert np.max(np.abs(v.values - eta_t_exact)) < 1e-12

    def test_divergence_free(self, grid):
        eta = gaussian_profile(grid)
        eta_x = deriv(eta, 1)
        dz = 1e-6
        for z in (0.3, 0.8):
            u, v_lo = reconstruct_irrotational(eta, eta_x, 0.2, z - dz)
            _, v_hi = reconstruct_irrotational(eta, eta_x, 0.2, z + dz)
            v_z = (v_hi.values - v_lo.values) / (2.0 * dz)
            u_x = deriv(u, 1).values
            assert np.max(np.abs(u_x + v_z)) < 1e-9

    def test_vertical_velocity_linear_in_z(self, grid):
        eta = gaussian_profile(grid)
        eta_x = deriv(eta, 1)
        _, v1 = reconstruct_irrotational(eta, eta_x, 0.0, 1.0)
        _, vz = reconstruct_irrotational(eta, eta_x, 0.0, 0.37)
        np.testing.assert_array_equal(vz.values, 0.37 * v1.values)

    @pytest.mark.parametrize("z", [-0.1, 1.1])
    def test_rejects_z_outside_column(self, grid, z):
        eta = Field.zeros(grid)
        with pytest.raises(ValueError):
            reconstruct_irrotational(eta, eta, 0.0, z)
