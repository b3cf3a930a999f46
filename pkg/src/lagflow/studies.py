"""Experiment drivers: manufactured-solution verification, refinement order
measurement, and the regularization continuation toward vacuum data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .audit import ks_fields, ks_identity_residual
from .errors import StructuralError
from .grid1d import Grid, ThetaBC, cell_l1, cell_l2, node_l2, sup_norm
from .model import (
    InitialData,
    PhysicalParams,
    apriori_constants,
    total_energy,
)
from .stepper import SchemeConfig, Trajectory, run


@dataclass(eq=False)
class OrderReport:
    """Error table over a resolution ladder plus fitted observed orders.

    `axis` names the refinement variable ("dy" or "dt"); `errors` maps a
    quantity to its per-resolution values; `orders` holds the least-squares
    log-log slope, or the string "exact" when every error sits at round-off.
    """

    study: str
    axis: str
    resolutions: list[float]
    errors: dict[str, list[float]]
    orders: dict[str, float | str] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def fit_orders(resolutions, errors, floor: float = 1e-12) -> dict[str, float | str]:
    """Least-squares observed order for each error series."""
    out: dict[str, float | str] = {}
    h = np.asarray(resolutions, dtype=float)
    for name, series in errors.items():
        e = np.asarray(series, dtype=float)
        if e.shape != h.shape:
            raise StructuralError(f"error series {name} does not match the ladder")
        if np.all(e <= floor):
            out[name] = "exact"
            continue
        e = np.maximum(e, 1e-300)
        out[name] = float(np.polyfit(np.log(h), np.log(e), 1)[0])
    return out


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ManufacturedSolution:
    """Closed-form fields with analytically derived forcing terms.

    The fields assume unit density (so runs must use eps = 0); the Jacobian
    is the exact time integral of the strain.  Callbacks are vectorized over
    the space argument.
    """

    name: str
    bc: ThetaBC
    v: Callable[[np.ndarray, float], np.ndarray]
    theta: Callable[[np.ndarray, float], np.ndarray]
    J: Callable[[np.ndarray, float], np.ndarray]
    source_v: Callable[[np.ndarray, float], np.ndarray]
    source_theta: Callable[[np.ndarray, float], np.ndarray]
    theta0_y: Callable[[np.ndarray], np.ndarray]
    theta0_yy: Callable[[np.ndarray], np.ndarray]

    def initial_data(self, grid: Grid) -> InitialData:
        v0 = self.v(grid.nodes, 0.0)
        v0[0] = 0.0
        v0[-1] = 0.0
        n = grid.N
        return InitialData(
            rho0=np.ones(n),
            v0=v0,
            theta0=self.theta(grid.centers, 0.0),
            rho0_y=np.zeros(n),
            rho0_yy=np.zeros(n),
            theta0_y=self.theta0_y(grid.centers),
            theta0_yy=self.theta0_yy(grid.centers),
            v0_y=np.zeros(n),
            v0_yy=np.zeros(n),
        )

    def check_bc(self, L: float, t_end: float, tol: float = 1e-8) -> None:
        """Verify the fields satisfy the declared boundary conditions."""
        h = 1e-6 * L
        for t in np.linspace(0.0, t_end, 5):
            for yb, tag in ((0.0, "left"), (L, "right")):
                if abs(float(self.v(np.array([yb]), t)[0])) > tol:
                    raise StructuralError(f"manufactured v nonzero at {tag} end, t={t}")
                dirichlet = (self.bc.left_dirichlet if tag == "left"
                             else self.bc.right_dirichlet)
                if dirichlet:
                    if abs(float(self.theta(np.array([yb]), t)[0])) > tol:
                        raise StructuralError(
                            f"manufactured theta nonzero at {tag} Dirichlet end, t={t}")
                else:
                    # Central difference straddling the endpoint; the closed
                    # forms extend smoothly past the boundary.
                    th = self.theta(np.array([yb - h, yb + h]), t)
                    slope = (th[1] - th[0]) / (2.0 * h)
                    if abs(float(slope)) > tol:
                        raise StructuralError(
                            f"manufactured theta slope {slope:.3e} at {tag} "
                            f"Neumann end, t={t}")


def manufactured_neumann(params: PhysicalParams) -> ManufacturedSolution:
    """Traveling-in-time standing-wave fields with insulated temperature ends."""
    k = math.pi / params.L
    mu, kap, R, c_v = params.mu, params.kappa, params.R, params.c_v

    def v(y, t):
        return np.sin(k * y) * math.sin(t)

    def theta(y, t):
        return 2.0 + np.cos(k * y) * math.cos(t)

    def jac(y, t):
        return 1.0 + k * np.cos(k * y) * (1.0 - math.cos(t))

    def source_v(y, t):
        s, c = np.sin(k * y), np.cos(k * y)
        A, C = math.sin(t), math.cos(t)
        W = 1.0 - C
        J2 = (1.0 + k * c * W) ** 2
        return s * C + mu * k * k * s * A / J2 + R * k * s * (2.0 * k * W - C) / J2

    def source_theta(y, t):
        s, c = np.sin(k * y), np.cos(k * y)
        A, C = math.sin(t), math.cos(t)
        W = 1.0 - C
        J = 1.0 + k * c * W
        return (-c_v * c * A
                + R * k * c * A * (2.0 + c * C) / J
                + kap * k * k * C * (c + k * W) / (J * J)
                - mu * k * k * c * c * A * A / J)

    return ManufacturedSolution(
        name="mms-neumann",
        bc=ThetaBC.NEUMANN_NEUMANN,
        v=v, theta=theta, J=jac,
        source_v=source_v, source_theta=source_theta,
        theta0_y=lambda y: -k * np.sin(k * y),
        theta0_yy=lambda y: -k * k * np.cos(k * y),
    )


def manufactured_dirichlet(params: PhysicalParams) -> ManufacturedSolution:
    """Same velocity with a temperature profile pinned to zero at both ends."""
    k = math.pi / params.L
    mu, kap, R, c_v = params.mu, params.kappa, params.R, params.c_v

    def q(t):
        return 1.0 + 0.5 * math.cos(t)

    def v(y, t):
        return np.sin(k * y) * math.sin(t)

    def theta(y, t):
        return np.sin(k * y) * q(t)

    def jac(y, t):
        return 1.0 + k * np.cos(k * y) * (1.0 - math.cos(t))

    def source_v(y, t):
        s, c = np.sin(k * y), np.cos(k * y)
        A, C = math.sin(t), math.cos(t)
        W = 1.0 - C
        J2 = (1.0 + k * c * W) ** 2
        return s * C + mu * k * k * s * A / J2 + R * q(t) * k * (c + k * W) / J2

    def source_theta(y, t):
        s, c = np.sin(k * y), np.cos(k * y)
        A, C = math.sin(t), math.cos(t)
        W = 1.0 - C
        J = 1.0 + k * c * W
        return (-0.5 * c_v * s * A
                + R * k * c * A * s * q(t) / J
                + kap * k * k * s * q(t) / (J * J)
                - mu * k * k * c * c * A * A / J)

    return ManufacturedSolution(
        name="mms-dirichlet",
        bc=ThetaBC.DIRICHLET_DIRICHLET,
        v=v, theta=theta, J=jac,
        source_v=source_v, source_theta=source_theta,
        theta0_y=lambda y: 1.5 * k * np.cos(k * y),
        theta0_yy=lambda y: -1.5 * k * k * np.sin(k * y),
    )


def _fixed_dt_config(cfg: SchemeConfig, dt: float, ms: ManufacturedSolution | None):
    return replace(cfg, dt_initial=dt, dt_min=dt, dt_max=dt,
                   source_v=ms.source_v if ms else cfg.source_v,
                   source_theta=ms.source_theta if ms else cfg.source_theta)


def _mms_errors(traj: Trajectory, ms: ManufacturedSolution, t_end: float):
    state = traj.snapshots[-1]
    grid = traj.grid
    return {
        "v": sup_norm(state.v - ms.v(grid.nodes, t_end)),
        "theta": sup_norm(state.theta - ms.theta(grid.centers, t_end)),
        "J": sup_norm(state.J - ms.J(grid.centers, t_end)),
    }


def mms_run(
    ms: ManufacturedSolution,
    params: PhysicalParams,
    cfg: SchemeConfig,
    t_end: float,
    base_N: int,
    base_dt: float,
    levels: int = 3,
    mode: str = "spatial",
) -> OrderReport:
    """Discretization-order measurement against a manufactured solution.

    mode="spatial" halves dy per level with dt scaled like dy^2 (so the
    first-order time error stays subordinate); mode="temporal" halves dt at
    fixed dy.  Errors are sup norms against the closed-form fields at t_end.
    """
    if levels < 3:
        raise StructuralError("order fits need at least 3 resolutions")
    if params.eps != 0.0:
        raise StructuralError("manufactured sources assume eps = 0 (unit density)")
    ms.check_bc(params.L, t_end)

    resolutions: list[float] = []
    errors: dict[str, list[float]] = {"v": [], "theta": [], "J": []}
    for k in range(levels):
        if mode == "spatial":
            N = base_N * 2 ** k
            dt = base_dt / 4.0 ** k
            h = params.L / N
        elif mode == "temporal":
            N = base_N
            dt = base_dt / 2.0 ** k
            h = dt
        else:
            raise StructuralError(f"unknown mms mode {mode!r}")
        grid = Grid(params.L, N)
        data = ms.initial_data(grid)
        traj = run(data, params, _fixed_dt_config(cfg, dt, ms), ms.bc,
                   t_end, [t_end])
        lvl = _mms_errors(traj, ms, t_end)
        resolutions.append(h)
        for name in errors:
            errors[name].append(lvl[name])
    report = OrderReport(study=f"mms-{mode}", axis="dy" if mode == "spatial" else "dt",
                         resolutions=resolutions, errors=errors,
                         meta={"solution": ms.name, "t_end": t_end,
                               "base_N": base_N, "base_dt": base_dt})
    report.orders = fit_orders(resolutions, errors)
    return report


# ---------------------------------------------------------------------------
# Self-convergence refinement study
# ---------------------------------------------------------------------------

def _restrict_cells(fine: np.ndarray, ratio: int) -> np.ndarray:
    return fine.reshape(-1, ratio).mean(axis=1)


def refinement_study(
    profile: Callable[[Grid], InitialData],
    params: PhysicalParams,
    cfg: SchemeConfig,
    bc: ThetaBC,
    t_end: float,
    base_N: int,
    base_dt: float,
    levels: int = 4,
) -> OrderReport:
    """Simultaneous (dy, dt) -> (dy/2, dt/2) self-convergence measurement.

    Field errors are sup norms against the finest level (restricted by cell
    averaging / node subsampling); the identity defects (energy drift,
    strain-history residual, constancy spread, mass defect) are per-level
    scalars and get their own order fits over the full ladder.
    """
    if levels < 3:
        raise StructuralError("order fits need at least 3 resolutions")
    trajs: list[Trajectory] = []
    hs: list[float] = []
    scalar_errors: dict[str, list[float]] = {
        "energy_drift": [], "ks_residual": [], "h_spread": [], "mass_defect": []}
    for k in range(levels):
        N = base_N * 2 ** k
        dt = base_dt / 2.0 ** k
        grid = Grid(params.L, N)
        data = profile(grid)
        traj = run(data, params, _fixed_dt_config(cfg, dt, None), bc, t_end, [t_end])
        trajs.append(traj)
        hs.append(params.L / N)

        state = traj.snapshots[-1]
        consts = apriori_constants(traj.data, params, grid)
        fields = ks_fields(state, traj.data, params, grid)
        res = ks_identity_residual(state, traj.data, params, grid, fields)
        energy = total_energy(state.v, state.theta, traj.data.rho0, params.c_v, grid)
        scalar_errors["energy_drift"].append(abs(energy - consts.E0))
        scalar_errors["ks_residual"].append(sup_norm(res))
        scalar_errors["h_spread"].append(fields.h_spread / (1.0 + abs(fields.h)))
        scalar_errors["mass_defect"].append(traj.max_mass_err)

    finest = trajs[-1].snapshots[-1]
    field_errors: dict[str, list[float]] = {"J": [], "v": [], "theta": []}
    for k in range(levels - 1):
        ratio = 2 ** (levels - 1 - k)
        state = trajs[k].snapshots[-1]
        field_errors["J"].append(sup_norm(state.J - _restrict_cells(finest.J, ratio)))
        field_errors["theta"].append(
            sup_norm(state.theta - _restrict_cells(finest.theta, ratio)))
        field_errors["v"].append(sup_norm(state.v - finest.v[::ratio]))

    errors = {**{f"field_{k}": v for k, v in field_errors.items()}, **scalar_errors}
    report = OrderReport(study="refinement", axis="dy", resolutions=hs,
                         errors=errors,
                         meta={"t_end": t_end, "base_N": base_N,
                               "base_dt": base_dt, "levels": levels})
    report.orders = {f"field_{k}": v
                     for k, v in fit_orders(hs[:-1], field_errors).items()}
    report.orders.update(fit_orders(hs, scalar_errors))
    return report


# ---------------------------------------------------------------------------
# Regularization continuation toward vacuum
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ContinuationReport:
    """Per-regularization runs on a common grid with Cauchy differences.

    `constants` holds the explicitly computable numbers for each shifted
    dataset; `caps` their regularization-independent bounds (monotone
    quantities capped by their eps=1 values, composite bounds otherwise).
    """

    eps_list: list[float]
    times: list[float]
    final_states: list[dict[str, np.ndarray]]
    diffs: dict[str, list[float]]
    constants: list[dict[str, float]]
    caps: dict[str, float]
    min_J: list[float]
    j_lower_bounds: list[float]
    cap_violations: list[str]
    failed: list[tuple[float, str]]

    @property
    def diffs_strictly_decreasing(self) -> bool:
        return all(
            all(a > b for a, b in zip(series, series[1:]))
            for series in self.diffs.values()
        )

    @property
    def ok(self) -> bool:
        return (not self.failed and not self.cap_violations
                and all(m > b for m, b in zip(self.min_J, self.j_lower_bounds)))


def _continuation_caps(data: InitialData, params: PhysicalParams, grid: Grid) -> dict:
    """Regularization-independent caps built from the eps=0 and eps=1 data."""
    c0 = apriori_constants(data, params, grid)
    c1 = apriori_constants(data.shifted(1.0), params, grid)
    v0_l2_sq = node_l2(data.v0, grid) ** 2
    E0_cap_chain = (c0.E0 + v0_l2_sq
                    + params.c_v * (cell_l1(data.rho0, grid)
                                    + cell_l1(data.theta0, grid) + params.L))
    # Composite caps for the non-monotone aggregates.
    drho_sup = sup_norm(data.d_rho0(grid))
    N1_cap = (c1.E0 / params.c_v + (c0.rho_bar + 1.0) + 1.0 / c0.rho_bar
              + params.L + 1.0 / params.L + 1.0 / c0.omega0 + drho_sup)
    defined = ~np.isnan(c0.g0)
    g0_l2 = math.sqrt(grid.dy * float(np.sum(c0.g0[defined] ** 2)))
    h0_l2 = math.sqrt(grid.dy * float(np.sum(c0.h0[defined] ** 2)))
    N3_cap = ((g0_l2 + cell_l2(data.d_rho0(grid), grid)
               + cell_l2(data.d_theta0(grid), grid))
              + (h0_l2 + params.R * cell_l2(data.d_v0(grid), grid)
                 * (sup_norm(data.rho0) + sup_norm(data.theta0) + 1.0))
              + cell_l2(data.dd_rho0(grid), grid))
    return {
        "E0_lower": c0.E0,
        "E0_upper": E0_cap_chain,
        "E0_eps1": c1.E0,
        "m1_lower": c0.m1,
        "m1_upper": c1.m1,
        "N1_upper": N1_cap,
        "N2_upper": c1.N2,
        "N3_upper": N3_cap,
    }


def eps_continuation(
    data: InitialData,
    params: PhysicalParams,
    cfg: SchemeConfig,
    bc: ThetaBC,
    t_end: float,
    eps_list: list[float],
) -> ContinuationReport:
    """Solve the shifted problems for a decreasing regularization ladder.

    Convergence toward the vacuum problem is judged by the Cauchy criterion
    on successive runs; each run's constants are checked against the
    regularization-independent caps and its Jacobian against the per-run
    lower envelope.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(not (0 < e < 1) for e in eps_list):
        raise StructuralError("eps_list must lie in (0, 1)")
    if any(a <= b for a, b in zip(eps_list, eps_list[1:])):
        raise StructuralError("eps_list must be strictly decreasing")

    grid = Grid(params.L, np.asarray(data.rho0).shape[0])
    data.check_shapes(grid)
    caps = _continuation_caps(data, params, grid)

    finals: list[dict[str, np.ndarray]] = []
    consts: list[dict[str, float]] = []
    min_Js: list[float] = []
    j_bounds: list[float] = []
    violations: list[str] = []
    failed: list[tuple[float, str]] = []
    done_eps: list[float] = []

    for eps in eps_list:
        p_eps = replace(params, eps=eps)
        try:
            traj = run(data, p_eps, cfg, bc, t_end, [t_end])
        except Exception as exc:  # aborted runs produce a partial report
            failed.append((eps, f"{type(exc).__name__}: {exc}"))
            continue
        state = traj.snapshots[-1]
        c = apriori_constants(traj.data, p_eps, grid)
        finals.append({"J": state.J, "v": state.v, "theta": state.theta})
        consts.append({
            "eps": eps, "E0": c.E0, "m1": c.m1,
            "N1": c.N1, "N2": c.N2, "N2_alt": c.N2_alt, "N3": c.N3,
        })
        min_Js.append(traj.min_J)
        j_bounds.append(float(c.j_lower_bound(t_end)))
        done_eps.append(eps)

        checks = (
            ("E0", c.E0, caps["E0_lower"], caps["E0_upper"]),
            ("m1", c.m1, caps["m1_lower"], caps["m1_upper"]),
            ("N1", c.N1, None, caps["N1_upper"]),
            ("N2", c.N2, None, caps["N2_upper"]),
            ("N3", c.N3, None, caps["N3_upper"]),
        )
        slack = 1e-12
        for name, value, lo, hi in checks:
            if lo is not None and value < lo * (1.0 - slack) - slack:
                violations.append(f"eps={eps}: {name}={value:.6g} below cap {lo:.6g}")
            if value > hi * (1.0 + slack) + slack:
                violations.append(f"eps={eps}: {name}={value:.6g} above cap {hi:.6g}")

    diffs: dict[str, list[float]] = {"J": [], "v": [], "theta": []}
    for a, b in zip(finals, finals[1:]):
        for name in diffs:
            diffs[name].append(sup_norm(a[name] - b[name]))

    return ContinuationReport(
        eps_list=done_eps,
        times=[t_end],
        final_states=finals,
        diffs=diffs,
        constants=consts,
        caps=caps,
        min_J=min_Js,
        j_lower_bounds=j_bounds,
        cap_violations=violations,
        failed=failed,
    )
