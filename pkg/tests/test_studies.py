"""Study drivers: manufactured-solution forcing (sympy oracle), order fits,
self-convergence, and the regularization continuation."""

import numpy as np
import pytest
import sympy as sp

from lagflow.errors import StructuralError
from lagflow.grid1d import Grid, ThetaBC
from lagflow.model import InitialData, PhysicalParams
from lagflow.stepper import SchemeConfig, run
from lagflow.studies import (
    ManufacturedSolution,
    eps_continuation,
    fit_orders,
    manufactured_dirichlet,
    manufactured_neumann,
    mms_run,
    refinement_study,
)


@pytest.fixture(scope="module")
def params():
    return PhysicalParams(mu=0.8, kappa=1.2, R=1.1, c_v=0.9)


def _sympy_sources(params, theta_expr_builder):
    """Independent derivation of the forcing terms by symbolic calculus."""
    y, t = sp.symbols("y t", real=True)
    k = sp.pi / params.L
    v = sp.sin(k * y) * sp.sin(t)
    J = 1 + k * sp.cos(k * y) * (1 - sp.cos(t))
    theta = theta_expr_builder(y, t, k)
    pi = params.R * theta / J  # unit density
    S_v = (sp.diff(v, t) - params.mu * sp.diff(sp.diff(v, y) / J, y)
           + sp.diff(pi, y))
    S_th = (params.c_v * sp.diff(theta, t) + sp.diff(v, y) * pi
            - params.kappa * sp.diff(sp.diff(theta, y) / J, y)
            - params.mu * sp.diff(v, y) ** 2 / J)
    return (sp.lambdify((y, t), sp.simplify(S_v), "numpy"),
            sp.lambdify((y, t), sp.simplify(S_th), "numpy"))


@pytest.mark.parametrize("builder,variant", [
    (lambda y, t, k: 2 + sp.cos(k * y) * sp.cos(t), "neumann"),
    (lambda y, t, k: sp.sin(k * y) * (1 + sp.Rational(1, 2) * sp.cos(t)),
     "dirichlet"),
])
def test_manufactured_sources_match_sympy_oracle(params, builder, variant):
    ms = (manufactured_neumann(params) if variant == "neumann"
          else manufactured_dirichlet(params))
    sv, sth = _sympy_sources(params, builder)
    ys = np.linspace(0.013, 0.987, 23)
    for t in (0.0, 0.21, 0.5):
        np.testing.assert_allclose(ms.source_v(ys, t), sv(ys, t),
                                   rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(ms.source_theta(ys, t), sth(ys, t),
                                   rtol=1e-10, atol=1e-12)


def test_manufactured_jacobian_is_strain_integral(params):
    # dJ*/dt == dv*/dy, and J*(., 0) == 1
    ms = manufactured_neumann(params)
    ys = np.linspace(0.0, params.L, 11)
    np.testing.assert_allclose(ms.J(ys, 0.0), 1.0, atol=1e-15)
    h = 1e-6
    for t in (0.1, 0.4):
        dJ_dt = (ms.J(ys, t + h) - ms.J(ys, t - h)) / (2 * h)
        dv_dy = np.pi / params.L * np.cos(np.pi * ys / params.L) * np.sin(t)
        np.testing.assert_allclose(dJ_dt, dv_dy, atol=1e-8)


def test_manufactured_bc_violation_rejected(params):
    bad = ManufacturedSolution(
        name="bad", bc=ThetaBC.NEUMANN_NEUMANN,
        v=lambda y, t: np.cos(np.pi * y) * np.sin(t),  # nonzero at the ends
        theta=lambda y, t: np.full_like(np.asarray(y, dtype=float), 2.0),
        J=lambda y, t: np.ones_like(np.asarray(y, dtype=float)),
        source_v=lambda y, t: np.zeros_like(np.asarray(y, dtype=float)),
        source_theta=lambda y, t: np.zeros_like(np.asarray(y, dtype=float)),
        theta0_y=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        theta0_yy=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
    )
    with pytest.raises(StructuralError):
        mms_run(bad, params, SchemeConfig(), 0.3, 16, 1e-2)


def test_trivial_manufactured_solution_reports_exact(params):
    # Constant fields solve the unforced system; every error is round-off.
    const = ManufacturedSolution(
        name="trivial", bc=ThetaBC.NEUMANN_NEUMANN,
        v=lambda y, t: np.zeros_like(np.asarray(y, dtype=float)),
        theta=lambda y, t: np.full_like(np.asarray(y, dtype=float), 2.0),
        J=lambda y, t: np.ones_like(np.asarray(y, dtype=float)),
        source_v=lambda y, t: np.zeros_like(np.asarray(y, dtype=float)),
        source_theta=lambda y, t: np.zeros_like(np.asarray(y, dtype=float)),
        theta0_y=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        theta0_yy=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
    )
    report = mms_run(const, params, SchemeConfig(), 0.2, 8, 1e-2, levels=3)
    assert all(v == "exact" for v in report.orders.values())


def test_mms_requires_unshifted_density(params):
    from dataclasses import replace

    ms = manufactured_neumann(params)
    with pytest.raises(StructuralError):
        mms_run(ms, replace(params, eps=1e-3), SchemeConfig(), 0.3, 16, 1e-2)


def test_mms_orders(params):
    ms = manufactured_neumann(params)
    rep = mms_run(ms, params, SchemeConfig(), 0.5, 32, 2e-2, levels=3,
                  mode="spatial")
    assert rep.axis == "dy"
    assert all(o >= 1.9 for o in rep.orders.values()), rep.orders
    rep = mms_run(ms, params, SchemeConfig(), 0.5, 256, 2.5e-2, levels=3,
                  mode="temporal")
    assert rep.axis == "dt"
    assert all(o >= 0.9 for o in rep.orders.values()), rep.orders


def test_mms_dirichlet_variant_converges(params):
    ms = manufactured_dirichlet(params)
    rep = mms_run(ms, params, SchemeConfig(), 0.5, 32, 2e-2, levels=3,
                  mode="spatial")
    assert all(o >= 1.8 for o in rep.orders.values()), rep.orders


def test_fit_orders_slope_and_exact():
    h = [0.1, 0.05, 0.025]
    out = fit_orders(h, {"quad": [1e-2, 2.5e-3, 6.25e-4],
                         "flat": [1e-14, 9e-15, 8e-15]})
    assert out["quad"] == pytest.approx(2.0, abs=1e-6)
    assert out["flat"] == "exact"


def test_refinement_study_stationary_is_exact(params):
    def profile(grid):
        return InitialData(rho0=np.ones(grid.N), v0=np.zeros(grid.N + 1),
                           theta0=np.ones(grid.N))
    rep = refinement_study(profile, params, SchemeConfig(), ThetaBC.NEUMANN_NEUMANN,
                           0.1, base_N=8, base_dt=5e-3, levels=3)
    for name in ("field_J", "field_v", "field_theta", "energy_drift",
                 "h_spread", "mass_defect"):
        assert rep.orders[name] == "exact", (name, rep.errors[name])
    # the stationary strain-history residual is pure time-quadrature error
    assert rep.orders["ks_residual"] == "exact" \
        or rep.orders["ks_residual"] >= 1.9


def test_refinement_study_orders_on_smooth_run():
    params = PhysicalParams()

    def profile(grid):
        v0 = 0.5 * np.sin(np.pi * grid.nodes)
        v0[0] = v0[-1] = 0.0
        return InitialData(rho0=np.ones(grid.N), v0=v0, theta0=np.ones(grid.N))

    rep = refinement_study(profile, params, SchemeConfig(), ThetaBC.NEUMANN_NEUMANN,
                           0.24, base_N=25, base_dt=4e-3, levels=4)
    assert rep.orders["field_v"] >= 1.0
    assert rep.orders["field_theta"] >= 1.0
    assert rep.orders["energy_drift"] >= 0.9
    assert rep.orders["ks_residual"] >= 0.9
    assert rep.orders["mass_defect"] == "exact"


def test_eps_continuation_validates_ladder(params):
    grid = Grid(1.0, 16)
    data = InitialData(rho0=np.ones(16), v0=np.zeros(17), theta0=np.ones(16))
    with pytest.raises(StructuralError):
        eps_continuation(data, params, SchemeConfig(), ThetaBC.NEUMANN_NEUMANN,
                         0.1, [0.1, 0.2])  # increasing
    with pytest.raises(StructuralError):
        eps_continuation(data, params, SchemeConfig(), ThetaBC.NEUMANN_NEUMANN,
                         0.1, [1.0, 0.1])  # outside (0,1)


def test_eps_continuation_nondegenerate_scales_linearly():
    # Away from vacuum the solution is smooth in the regularization, so
    # successive differences track the eps increments.
    params = PhysicalParams()
    grid = Grid(1.0, 32)
    v0 = 0.3 * np.sin(np.pi * grid.nodes)
    v0[0] = v0[-1] = 0.0
    data = InitialData(rho0=np.full(32, 0.8), v0=v0, theta0=np.ones(32))
    cfg = SchemeConfig(dt_initial=1e-3, dt_min=1e-3, dt_max=1e-3)
    rep = eps_continuation(data, params, cfg, ThetaBC.NEUMANN_NEUMANN, 0.1,
                           [0.2, 0.1, 0.05])
    assert not rep.failed and not rep.cap_violations
    assert rep.diffs_strictly_decreasing
    for series in rep.diffs.values():
        if series[1] > 1e-12:  # ratio of gaps is 2
            assert 1.4 < series[0] / series[1] < 2.8


def test_eps_continuation_interior_zero_density():
    # One interior vacuum point; the regularized runs form a Cauchy ladder.
    params = PhysicalParams()
    grid = Grid(1.0, 64)
    y = grid.centers
    rho0 = 4.0 * (y - 0.5) ** 2
    rho0[np.argmin(rho0)] = 0.0
    data = InitialData(rho0=rho0, v0=np.zeros(65), theta0=np.ones(64),
                       rho0_y=8.0 * (y - 0.5), rho0_yy=np.full(64, 8.0),
                       theta0_y=np.zeros(64), theta0_yy=np.zeros(64),
                       v0_y=np.zeros(64), v0_yy=np.zeros(64))
    cfg = SchemeConfig(dt_initial=1e-4, dt_min=1e-8, dt_max=1e-3)
    rep = eps_continuation(data, params, cfg, ThetaBC.NEUMANN_NEUMANN, 0.2,
                           [1e-1, 1e-2, 1e-3])
    assert not rep.failed
    assert rep.diffs_strictly_decreasing
    assert all(m > b for m, b in zip(rep.min_J, rep.j_lower_bounds))


def test_eps_continuation_partial_report_on_aborts():
    params = PhysicalParams(mu=0.05)
    grid = Grid(1.0, 16)
    v0 = 3.0 * np.sin(np.pi * grid.nodes)
    v0[0] = v0[-1] = 0.0
    data = InitialData(rho0=np.ones(16), v0=v0, theta0=np.ones(16))
    cfg = SchemeConfig(dt_initial=0.5, dt_min=0.3, dt_max=0.5)
    rep = eps_continuation(data, params, cfg, ThetaBC.NEUMANN_NEUMANN, 0.9,
                           [0.1, 0.01])
    assert len(rep.failed) == 2
    assert not rep.ok
