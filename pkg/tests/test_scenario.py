"""Alternating data, growth law, Temple classification and the blow-up table."""

import math

import numpy as np
import pytest

from wavefront_psa import fronttrack as ft
from wavefront_psa.model import functions_for, make_model
from wavefront_psa.riemann import AmplificationError
from wavefront_psa.scenario import (Scenario, ScenarioError, blowup_study, build_alternating,
                                    classify_temple, geometric_points, predict_growth,
                                    strip_horizon, verify_growth)

R_CVX = 1.009370645905147


class TestGeometricPoints:
    def test_values(self):
        assert geometric_points(1.0, 0.5, 2) == [0.0, 0.5, 0.75, 0.875]
        assert geometric_points(1.0, 0.97, 1) == pytest.approx([0.0, 0.03])

    def test_below_limit(self):
        xs = geometric_points(2.0, 0.97, 100)
        assert all(b > a for a, b in zip(xs, xs[1:])) and xs[-1] < 2.0

    @pytest.mark.parametrize("args", [(0.0, 0.5, 2), (1.0, 1.0, 2), (1.0, 0.5, 0)])
    def test_errors(self, args):
        with pytest.raises(ScenarioError):
            geometric_points(*args)

    def test_strip_horizon(self):
        xs = geometric_points(1.0, 0.97, 25)
        assert strip_horizon(1.0, 0.97, 25) == pytest.approx(7.0 * (xs[-1] - xs[-2]))


class TestBuildAlternating:
    def test_cvx_orientation(self, cvx):
        sc = build_alternating(cvx, 0.2, 0.8, 1.0, [0.0, 0.1, 0.2, 0.3], 1.0, 0.5, 0.01)
        assert sc.boundary_c == 0.2
        assert [c for _, c in sc.segments] == [0.8, 0.2, 0.8, 0.2]
        assert sc.n_pairs == 2

    def test_concave_orientation(self):
        # with f'' < 0 on the range the roles swap
        m = make_model("binary-langmuir", Q1=1.0, K1=2.0, Q2=1.0, K2=1.0)
        assert functions_for(m).f(0.5)[2] < 0.0
        sc = build_alternating(m, 0.2, 0.8, 1.0, [0.0, 0.1], 1.0, 0.5, 0.01, allow_decay=True)
        assert sc.boundary_c == 0.8 and sc.segments[0][1] == 0.2
        tags = [e.rule_tag for e in ft.run(sc).events if e.kind == "emission"]
        assert tags == ["emission-shock", "emission-rarefaction"]

    def test_empty(self, cvx):
        sc = build_alternating(cvx, 0.2, 0.8, 1.0, [], 1.0, 0.5, 0.01)
        assert sc.segments == ()
        sol = ft.run(sc)
        assert sol.n_fronts == 0

    def test_decay_rejected(self, lng):
        with pytest.raises(AmplificationError):
            build_alternating(lng, 0.2, 0.8, 1.0, [0.0, 0.1], 1.0, 0.5, 0.01)
        build_alternating(lng, 0.2, 0.8, 1.0, [0.0, 0.1], 1.0, 0.5, 0.01, allow_decay=True)

    def test_bad_range(self, cvx):
        with pytest.raises(ScenarioError):
            build_alternating(cvx, 0.8, 0.2, 1.0, [0.0], 1.0, 0.5, 0.01)

    def test_scenario_validation(self, cvx):
        with pytest.raises(ScenarioError):
            Scenario(cvx, -1.0, 0.2, (), 1.0, 1.0, 0.1)
        with pytest.raises(ScenarioError):
            Scenario(cvx, 1.0, 0.2, ((0.2, 0.8), (0.1, 0.2)), 1.0, 1.0, 0.1)
        with pytest.raises(ScenarioError):
            Scenario(cvx, 1.0, 0.2, (), 1.0, 1.0, 0.0)


class TestGrowth:
    def test_predict(self, cvx_fns, lin_fns):
        assert predict_growth(cvx_fns, 0.2, 0.8, 1.5, 0) == 1.5
        assert predict_growth(lin_fns, 0.2, 0.8, 1.0, 40) == pytest.approx(1.0, abs=1e-10)
        assert predict_growth(cvx_fns, 0.2, 0.8, 1.0, 74) == pytest.approx(2.0, rel=0.05)
        with pytest.raises(ValueError):
            predict_growth(cvx_fns, 0.2, 0.8, 1.0, -1)

    def test_one_pair(self, cvx, cvx_fns):
        sc = build_alternating(cvx, 0.2, 0.8, 1.0, [0.0, 0.5], 10.0, 1.0, 0.05)
        rep = verify_growth(ft.run(sc), cvx_fns, sc)
        assert rep.passed and rep.rows[0]["measured"] == pytest.approx(R_CVX, rel=1e-12)

    def test_six_pairs(self, cvx, cvx_fns):
        xs = geometric_points(1.0, 0.97, 6)
        sc = build_alternating(cvx, 0.2, 0.8, 1.0, xs, strip_horizon(1.0, 0.97, 6), 1.0 - 0.97**12, 5e-3)
        rep = verify_growth(ft.run(sc), cvx_fns, sc)
        assert rep.passed
        logs = [math.log(r["measured"]) for r in rep.rows]
        assert np.allclose(np.diff(logs), math.log(R_CVX), atol=1e-8)

    def test_lin_flat(self, lin, lin_fns):
        xs = geometric_points(1.0, 0.9, 3)
        sc = build_alternating(lin, 0.2, 0.8, 1.0, xs, 1.0, 1.0 - 0.9**6, 0.01)
        rep = verify_growth(ft.run(sc), lin_fns, sc)
        assert rep.passed and all(r["measured"] == pytest.approx(1.0, abs=1e-12) for r in rep.rows)

    def test_empty(self, cvx, cvx_fns):
        sc = build_alternating(cvx, 0.2, 0.8, 1.0, [], 1.0, 0.5, 0.01)
        rep = verify_growth(ft.run(sc), cvx_fns, sc)
        assert rep.passed and rep.rows == []

    def test_x_stop_too_small(self, cvx, cvx_fns):
        sc = build_alternating(cvx, 0.2, 0.8, 1.0, [0.0, 0.5, 0.7, 0.9], 1.0, 0.6, 0.05)
        with pytest.raises(ScenarioError):
            verify_growth(ft.run(sc), cvx_fns, sc)


class TestTemple:
    def test_lin(self, lin_fns):
        v = classify_temple(lin_fns)
        assert v.verdict == "temple"
        assert v.max_deviation <= 1e-10 and v.affine_residual <= 1e-10

    def test_cvx(self, cvx_fns):
        v = classify_temple(cvx_fns)
        assert v.verdict == "not-temple" and v.max_deviation >= 5e-3
        assert v.sign_Gpp == "negative"

    def test_linear_active_isotherm(self):
        v = classify_temple(functions_for(make_model("inert-convex-quadratic", a=1.0, b=0.0)))
        assert v.verdict == "temple"

    def test_grid_too_small(self, cvx_fns):
        with pytest.raises(ValueError):
            classify_temple(cvx_fns, grid_n=4)

    def test_dict(self, cvx_fns):
        d = classify_temple(cvx_fns, grid_n=8).to_dict()
        assert set(d) >= {"verdict", "max_deviation", "alpha", "beta", "affine_residual", "sign_Gpp"}


class TestBlowup:
    def test_single_pair(self, cvx):
        rows, ok = blowup_study(cvx, 0.2, 0.8, 1.0, 1.0, 0.97, 5e-3, None, [1])
        assert ok and rows[0]["max_u"] == pytest.approx(R_CVX, rel=1e-12)

    def test_small_table(self, cvx):
        rows, ok = blowup_study(cvx, 0.2, 0.8, 1.0, 1.0, 0.97, 5e-3, None, [2, 4, 8])
        assert ok
        for r in rows:
            assert r["max_u"] == pytest.approx(R_CVX ** r["N"], rel=1e-10)

    def test_lin_flat(self, lin):
        rows, ok = blowup_study(lin, 0.2, 0.8, 1.0, 1.0, 0.9, 0.01, 1.0, [1, 2, 3])
        assert ok and all(r["max_u"] == pytest.approx(1.0, abs=1e-12) for r in rows)
