import numpy as np
import pytest

from etlqg import (
    Ellipsoid,
    EllipsoidBound,
    GridBoundary,
    NonFiniteState,
    Periodic,
    ResetSystem,
    SimConfig,
    h2_cost_lyapunov,
    periodic_cost,
    periodic_cost_reset,
    extract_boundary,
    simulate,
    solve_riccati_like,
    stefan_solve,
    tradeoff_sweep,
)
from etlqg.simulate import periodic_cost_quadrature
from etlqg.stefan import GridSpec

from conftest import (
    INTEGRATOR_GAMMA0,
    INTEGRATOR_J_E,
    UNSTABLE_JH_05,
)
from etlqg import build_reset_system, design_lqg


def scalar_sys():
    return ResetSystem(A=np.zeros((1, 1)), Q=np.eye(1), R=np.eye(1))


def scalar_bound(rho=1.0):
    return EllipsoidBound(P=solve_riccati_like(np.eye(1), np.eye(1)), rho=rho)


class TestSimConfig:
    def test_horizon_floor(self):
        with pytest.raises(ValueError):
            SimConfig(h_nom=1e-3, T=1.0)

    def test_bad_values(self):
        with pytest.raises(ValueError):
            SimConfig(h_nom=0.0, T=100.0)
        with pytest.raises(ValueError):
            SimConfig(T=100.0, n_reps=0)
        with pytest.raises(ValueError):
            SimConfig(T=100.0, seed=-1)

    def test_periodic_step_ratio_enforced(self):
        cfg = SimConfig(h_nom=1e-3, T=20.0, n_reps=1)
        with pytest.raises(ValueError):
            simulate(scalar_sys(), Periodic(0.005), cfg)


class TestSimulateBasics:
    def test_seed_determinism(self):
        cfg = SimConfig(h_nom=1e-3, T=20.0, seed=42, n_reps=3)
        p1 = simulate(scalar_sys(), Ellipsoid(scalar_bound()), cfg)
        p2 = simulate(scalar_sys(), Ellipsoid(scalar_bound()), cfg)
        assert p1 == p2  # bit-identical dataclass equality

    def test_different_seed_differs(self):
        cfg1 = SimConfig(h_nom=1e-3, T=20.0, seed=1, n_reps=3)
        cfg2 = SimConfig(h_nom=1e-3, T=20.0, seed=2, n_reps=3)
        p1 = simulate(scalar_sys(), Ellipsoid(scalar_bound()), cfg1)
        p2 = simulate(scalar_sys(), Ellipsoid(scalar_bound()), cfg2)
        assert p1.J_H_hat != p2.J_H_hat

    def test_no_noise_means_no_cost_or_samples(self):
        sys = ResetSystem(A=np.zeros((1, 1)), Q=np.eye(1), R=np.zeros((1, 1)))
        cfg = SimConfig(h_nom=1e-3, T=20.0, seed=0, n_reps=2)
        pt = simulate(sys, Ellipsoid(scalar_bound()), cfg)
        assert pt.J_H_hat == 0.0
        assert pt.n_samples == 0
        assert pt.h_avg == np.inf

    def test_nonfinite_state_detected(self):
        # unstable drift with a reset period long enough for overflow
        sys = ResetSystem(A=np.array([[20.0]]), Q=np.eye(1), R=np.eye(1))
        cfg = SimConfig(h_nom=1e-3, T=30.0, seed=0, n_reps=1)
        with pytest.raises(NonFiniteState):
            simulate(sys, Periodic(30.0), cfg)

    def test_hurwitz_no_fire_matches_lyapunov(self):
        sys = ResetSystem(A=-np.eye(2), Q=np.eye(2), R=np.eye(2))
        # threshold far beyond the stationary covariance: trigger never fires
        never = EllipsoidBound(P=np.eye(2), rho=1e6)
        cfg = SimConfig(h_nom=1e-3, T=150.0, seed=3, n_reps=8)
        pt = simulate(sys, Ellipsoid(never), cfg)
        assert pt.n_samples == 0
        assert pt.J_H_hat == pytest.approx(h2_cost_lyapunov(sys), rel=0.05)

    def test_gamma0_offset_passthrough(self):
        cfg = SimConfig(h_nom=1e-3, T=20.0, seed=5, n_reps=2)
        pt = simulate(scalar_sys(), Ellipsoid(scalar_bound()), cfg, gamma0=7.0)
        assert pt.J_z_hat == pytest.approx(7.0 + pt.J_H_hat)


class TestScalarIntegratorAnalytics:
    def test_cost_and_rate_match_closed_form(self):
        # J_H = rho f = sqrt(rho) Tr(RP) / 2 = sqrt(2/3)/2 at rho = 1
        target = np.sqrt(2.0 / 3.0) / 2.0
        cfg = SimConfig(h_nom=1e-3, T=400.0, seed=11, n_reps=10)
        pt = simulate(scalar_sys(), Ellipsoid(scalar_bound(1.0)), cfg)
        assert pt.J_H_hat == pytest.approx(target, rel=0.05)
        f_hat = 1.0 / pt.h_avg
        assert 1.0 * f_hat == pytest.approx(target, rel=0.05)

    def test_step_halving_within_mc_error(self):
        base = dict(T=200.0, seed=19, n_reps=10)
        p1 = simulate(
            scalar_sys(), Ellipsoid(scalar_bound()), SimConfig(h_nom=1e-3, **base)
        )
        p2 = simulate(
            scalar_sys(), Ellipsoid(scalar_bound()), SimConfig(h_nom=5e-4, **base)
        )
        assert abs(p1.J_H_hat - p2.J_H_hat) <= 3.0 * (p1.stderr + p2.stderr)


class TestPeriodicCost:
    def test_driftless_closed_form(self, integrator_reset):
        tr = np.trace(integrator_reset.R @ integrator_reset.Q)
        for h in (0.1, 1.0):
            assert periodic_cost_reset(integrator_reset, h) == pytest.approx(
                tr * h / 2.0, rel=1e-12
            )

    def test_scalar_constant_integrand(self):
        sys = ResetSystem(A=np.zeros((1, 1)), Q=[[4.0]], R=[[9.0]])
        assert periodic_cost_reset(sys, 0.25) == pytest.approx(
            36.0 * 0.25 / 2.0, rel=1e-12
        )

    def test_matches_quadrature_with_drift(self, unstable_plant):
        d = design_lqg(unstable_plant)
        sys = build_reset_system(unstable_plant, d)
        for h in (0.1, 0.5, 1.0):
            exact = periodic_cost_reset(sys, h)
            quad_val = periodic_cost_quadrature(sys, h)
            assert exact == pytest.approx(quad_val, rel=1e-8)

    def test_unstable_example_value(self, unstable_plant):
        d = design_lqg(unstable_plant)
        assert periodic_cost(unstable_plant, d, 0.5) == pytest.approx(
            UNSTABLE_JH_05, rel=1e-9
        )

    def test_periodic_simulation_consistency(self, integrator_reset):
        h = 0.2
        cfg = SimConfig(h_nom=2e-3, T=400.0, seed=29, n_reps=10)
        pt = simulate(integrator_reset, Periodic(h), cfg)
        exact = periodic_cost_reset(integrator_reset, h)
        slack = 3.0 * pt.stderr + 0.03 * exact  # MC error plus O(h_nom) bias
        assert abs(pt.J_H_hat - exact) <= slack
        assert pt.h_avg == pytest.approx(h, rel=1e-9)


class TestTradeoffSweep:
    def test_periodic_points_analytic(self, integrator_reset):
        cfg = SimConfig(h_nom=1e-3, T=20.0, n_reps=2)
        res = tradeoff_sweep(integrator_reset, "periodic", [0.3, 0.1, 0.2], cfg, 5.0)
        assert not res.failures
        hs = [p.h_avg for p in res.points]
        assert hs == sorted(hs)
        for p in res.points:
            assert p.stderr == 0.0 and p.n_samples == 0
            assert p.scheme == "periodic"
            assert p.J_z_hat == pytest.approx(5.0 + p.J_H_hat)

    def test_ellipsoid_sweep_on_slope_line(self, integrator_reset):
        cfg = SimConfig(h_nom=1e-3, T=300.0, seed=7, n_reps=10)
        res = tradeoff_sweep(
            integrator_reset, "ellipsoid", [0.04, 0.16, 0.64], cfg, INTEGRATOR_GAMMA0
        )
        assert not res.failures
        for p in res.points:
            line = INTEGRATOR_GAMMA0 + INTEGRATOR_J_E * p.h_avg
            assert p.J_z_hat == pytest.approx(line, rel=0.05)

    def test_grid_sweep_matches_closed_form(self):
        sys = ResetSystem(A=np.zeros((2, 2)), Q=np.eye(2), R=np.eye(2))
        spec = GridSpec(
            half_width=np.array([4.0, 4.0]),
            n_cells=np.array([128, 128]),
            dt=0.004,
            stationarity_tol=1e-6,
            max_steps=200000,
        )
        cfg = SimConfig(h_nom=1e-3, T=200.0, seed=13, n_reps=8)
        res = tradeoff_sweep(sys, "grid", [np.sqrt(2.0)], cfg, 0.0, grid_spec=spec)
        assert not res.failures
        pt = res.points[0]
        # closed form at J = sqrt(2): J_H = J/2, f = J_H / rho with rho = 1
        assert pt.J_H_hat == pytest.approx(np.sqrt(2.0) / 2.0, rel=0.10)
        assert pt.h_avg == pytest.approx(2.0 / np.sqrt(2.0), rel=0.10)

    def test_failures_recorded_and_sweep_continues(self, integrator_reset):
        cfg = SimConfig(h_nom=1e-3, T=20.0, n_reps=2)
        res = tradeoff_sweep(integrator_reset, "periodic", [-1.0, 0.2], cfg)
        assert len(res.points) == 1
        assert len(res.failures) == 1
        assert res.failures[0].param == -1.0

    def test_unknown_scheme_rejected(self, integrator_reset):
        cfg = SimConfig(h_nom=1e-3, T=20.0, n_reps=2)
        with pytest.raises(ValueError):
            tradeoff_sweep(integrator_reset, "nonsense", [1.0], cfg)

    def test_grid_trigger_simulation_matches_ellipsoid_trigger(self):
        # both kernels should induce the same sampled behavior when they
        # encode the same firing surface; the ellipsoid threshold is fitted
        # to the stored mask boundary so the O(dx) placement of the mask
        # cancels out of the comparison
        sys = ResetSystem(A=np.zeros((2, 2)), Q=np.eye(2), R=np.eye(2))
        grid = stefan_solve(
            sys,
            np.sqrt(2.0),
            GridSpec(
                half_width=np.array([4.0, 4.0]),
                n_cells=np.array([128, 128]),
                dt=0.004,
                stationarity_tol=1e-6,
                max_steps=200000,
            ),
        )
        P = solve_riccati_like(np.eye(2), np.eye(2))
        poly = extract_boundary(grid)
        thresh = np.einsum("ki,ij,kj->k", poly.points, P, poly.points).mean()
        bound = EllipsoidBound(P=P, rho=(thresh / 2.0) ** 2)
        cfg = SimConfig(h_nom=1e-3, T=150.0, seed=23, n_reps=6)
        pt_grid = simulate(sys, GridBoundary(grid), cfg)
        pt_ell = simulate(sys, Ellipsoid(bound), cfg)
        assert pt_grid.J_H_hat == pytest.approx(pt_ell.J_H_hat, rel=0.04)
        assert pt_grid.h_avg == pytest.approx(pt_ell.h_avg, rel=0.04)
