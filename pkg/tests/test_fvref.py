"""Upwind finite-volume oracle."""

import numpy as np
import pytest

from wavefront_psa.fvref import (CflError, compare, front_slope, fv_run, godunov_flux,
                                 physical_flux, riemann_profile)
from wavefront_psa.riemann import solve_boundary_rp


def const(c, u):
    return lambda t: (np.full_like(t, c), np.full_like(t, u))


@pytest.fixture(scope="module")
def shock_run(cvx_fns):
    return fv_run(cvx_fns, const(0.2, 1.0), lambda x: 0.8, 2e-3, 1.0, 4.0)


@pytest.fixture(scope="module")
def rar_run(cvx_fns):
    return fv_run(cvx_fns, const(0.8, 1.0), lambda x: 0.2, 2e-3, 1.0, 4.0)


class TestFlux:
    def test_upwind(self, cvx_fns):
        h, i = godunov_flux(cvx_fns, (2.0, 1.6), (1.0, 0.2))
        assert (h, i) == (pytest.approx(0.22, abs=1e-14), pytest.approx(0.8, abs=1e-14))
        assert godunov_flux(cvx_fns, (5.0, 4.0), (1.0, 0.2)) == (h, i)

    def test_vectorized(self, cvx_fns):
        h, i = physical_flux(cvx_fns, np.array([0.2, 0.8]))
        assert h.shape == (2,) and i[1] == pytest.approx(0.8)


class TestMarch:
    def test_constant_stays_constant(self, cvx_fns):
        f = fv_run(cvx_fns, const(0.4, 1.3), lambda x: 0.4, 1e-2, 1.0, 1.0)
        np.testing.assert_allclose(f.c, 0.4, atol=1e-14)
        np.testing.assert_allclose(f.u, 1.3, atol=1e-13)

    def test_cfl(self, shock_run):
        assert 0.85 < shock_run.grid.nu <= 0.9 + 1e-12
        assert shock_run.min_u >= shock_run.grid.u_floor

    def test_conservation(self, shock_run, rar_run):
        assert shock_run.conservation_defect < 1e-12
        assert rar_run.conservation_defect < 1e-12

    def test_shock_slope(self, shock_run):
        assert front_slope(shock_run, 0.5, x_min=0.3) == pytest.approx(2.2, abs=5e-3)

    def test_rarefaction_edges(self, rar_run, cvx_fns):
        fan = solve_boundary_rp(cvx_fns, 0.2, 0.8, 1.0).wave
        assert fan.z0 == pytest.approx(0.796, abs=1e-3) and fan.z_plus == pytest.approx(1.96)
        mid = front_slope(rar_run, 0.5, x_min=0.3)
        assert fan.z0 < mid < fan.z_plus

    def test_keep(self, cvx_fns):
        f = fv_run(cvx_fns, const(0.2, 1.0), lambda x: 0.8, 1e-2, 1.0, 1.0, keep=[0.5, 1.0])
        assert len(f.xs) == 2 and f.xs[-1] == pytest.approx(1.0)
        with pytest.raises(ValueError):
            f.slice(0.7)

    def test_nu_range(self, cvx_fns):
        with pytest.raises(ValueError):
            fv_run(cvx_fns, const(0.2, 1.0), lambda x: 0.8, 1e-2, 1.0, 1.0, nu=1.5)

    def test_cfl_guard(self, cvx_fns, monkeypatch):
        # a bound above the true minimum of u must trip the guard
        from wavefront_psa import fvref
        monkeypatch.setattr(fvref, "_u_floor", lambda *a: 0.95)
        with pytest.raises(CflError):
            fv_run(cvx_fns, const(0.2, 1.0), lambda x: 0.8, 1e-2, 1.0, 1.0)

    def test_bad_inputs(self, cvx_fns):
        with pytest.raises(ValueError):
            fv_run(cvx_fns, const(0.2, 1.0), lambda x: 0.8, 0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            fv_run(cvx_fns, const(0.2, -1.0), lambda x: 0.8, 1e-2, 1.0, 1.0)


class TestCompare:
    def test_shock_oracle(self, cvx_fns, shock_run):
        fan = solve_boundary_rp(cvx_fns, 0.8, 0.2, 1.0)
        l1c, l1u = compare(fan, shock_run, 1.0, (0.0, 4.0))
        assert l1c == pytest.approx(7.58e-4, rel=0.02)
        assert l1u < 1e-2

    def test_first_order(self, cvx_fns):
        fan = solve_boundary_rp(cvx_fns, 0.8, 0.2, 1.0)
        errs = [compare(fan, fv_run(cvx_fns, const(0.2, 1.0), lambda x: 0.8, dt, 1.0, 4.0, keep=[1.0]),
                        1.0, (0.0, 4.0))[0] for dt in (4e-3, 2e-3)]
        assert errs[1] / errs[0] == pytest.approx(0.5, abs=0.05)

    def test_profile_matches_itself(self, cvx_fns, rar_run):
        fan = solve_boundary_rp(cvx_fns, 0.2, 0.8, 1.0)
        ts = rar_run.grid.t_centers
        c, u = riemann_profile(cvx_fns, fan, 1.0, ts)
        assert c[0] == 0.2 and c[-1] == 0.8
        assert np.all(np.diff(c) >= 0.0)

    def test_window_errors(self, cvx_fns, shock_run):
        fan = solve_boundary_rp(cvx_fns, 0.8, 0.2, 1.0)
        with pytest.raises(ValueError):
            compare(fan, shock_run, 1.0, (0.0, 5.0))
        with pytest.raises(ValueError):
            riemann_profile(cvx_fns, fan, 0.0, [1.0])
