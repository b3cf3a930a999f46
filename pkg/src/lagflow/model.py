"""Pointwise constitutive formulas, initial-data hypotheses, and the explicitly
computable constants that the bound audits compare against.

Conventions: density and temperature samples live on cell centers, velocity
samples on nodes.  Norms of cell fields use the midpoint rule, norms of node
fields the composite trapezoid rule (the same quadratures the grid uses
everywhere else).  Mixed-placement integrands such as rho0*v0^2 are formed
cellwise with the trapezoid value of the node factor inside each cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateDataError,
    DegenerateJacobianError,
    NumericalError,
    StructuralError,
)
from .grid1d import Grid, ThetaBC, cell_gradient, cell_l1, cell_l2, sup_norm


@dataclass(frozen=True)
class PhysicalParams:
    """Constant material and domain parameters.

    mu: viscosity, kappa: heat conductivity, R: gas constant, c_v: specific
    heat at constant volume, L: domain length, eps: vacuum regularization
    offset added to the initial density and temperature before solving.
    """

    mu: float = 1.0
    kappa: float = 1.0
    R: float = 1.0
    c_v: float = 1.0
    L: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        for name in ("mu", "kappa", "R", "c_v", "L"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise StructuralError(f"parameter {name} must be positive, got {v!r}")
        if not (np.isfinite(self.eps) and self.eps >= 0):
            raise StructuralError(f"parameter eps must be nonnegative, got {self.eps!r}")


@dataclass(frozen=True)
class InitialData:
    """Initial samples: rho0 and theta0 on cells, v0 on nodes.

    The optional derivative arrays (all on cells) are used instead of finite
    differences when present; without them, compatibility functions and the
    derivative-bearing constants carry O(dy^2) discretization error.
    """

    rho0: np.ndarray
    v0: np.ndarray
    theta0: np.ndarray
    rho0_y: np.ndarray | None = None
    rho0_yy: np.ndarray | None = None
    theta0_y: np.ndarray | None = None
    theta0_yy: np.ndarray | None = None
    v0_y: np.ndarray | None = None
    v0_yy: np.ndarray | None = None

    def __post_init__(self):
        for name in ("rho0", "v0", "theta0", "rho0_y", "rho0_yy",
                     "theta0_y", "theta0_yy", "v0_y", "v0_yy"):
            arr = getattr(self, name)
            if arr is not None:
                object.__setattr__(self, name, np.asarray(arr, dtype=float))

    def check_shapes(self, grid: Grid) -> None:
        grid.check_cells(self.rho0, "rho0")
        grid.check_cells(self.theta0, "theta0")
        grid.check_nodes(self.v0, "v0")
        for name in ("rho0_y", "rho0_yy", "theta0_y", "theta0_yy", "v0_y", "v0_yy"):
            arr = getattr(self, name)
            if arr is not None:
                grid.check_cells(arr, name)
                if not np.all(np.isfinite(arr)):
                    raise StructuralError(f"non-finite values in {name}")
        for name in ("rho0", "v0", "theta0"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise StructuralError(f"non-finite values in {name}")

    def shifted(self, eps: float) -> "InitialData":
        """Regularized data (rho0+eps, v0, theta0+eps); derivatives unchanged."""
        if eps == 0.0:
            return self
        return replace(self, rho0=self.rho0 + eps, theta0=self.theta0 + eps)

    # -- derivative samples on cells, analytic when supplied ----------------

    def d_rho0(self, grid: Grid) -> np.ndarray:
        if self.rho0_y is not None:
            return self.rho0_y
        return np.gradient(self.rho0, grid.dy, edge_order=2)

    def dd_rho0(self, grid: Grid) -> np.ndarray:
        if self.rho0_yy is not None:
            return self.rho0_yy
        return np.gradient(self.d_rho0(grid), grid.dy, edge_order=2)

    def d_theta0(self, grid: Grid) -> np.ndarray:
        if self.theta0_y is not None:
            return self.theta0_y
        return np.gradient(self.theta0, grid.dy, edge_order=2)

    def dd_theta0(self, grid: Grid) -> np.ndarray:
        if self.theta0_yy is not None:
            return self.theta0_yy
        return np.gradient(self.d_theta0(grid), grid.dy, edge_order=2)

    def d_v0(self, grid: Grid) -> np.ndarray:
        if self.v0_y is not None:
            return self.v0_y
        return cell_gradient(self.v0, grid)

    def dd_v0(self, grid: Grid) -> np.ndarray:
        if self.v0_yy is not None:
            return self.v0_yy
        return np.gradient(self.d_v0(grid), grid.dy, edge_order=2)


def pressure(rho0_cell, theta_cell, J_cell, R: float):
    """Ideal-gas pressure in flow-map variables: R * rho0 * theta / J."""
    J = np.asarray(J_cell, dtype=float)
    if np.any(J <= 0):
        raise DegenerateJacobianError("pressure requires J > 0")
    return R * np.asarray(rho0_cell, dtype=float) * np.asarray(theta_cell, dtype=float) / J


def effective_viscous_flux(dv_dy, J, pi, mu: float):
    """Effective viscous flux: mu * strain / J - pressure."""
    J = np.asarray(J, dtype=float)
    if np.any(J <= 0):
        raise DegenerateJacobianError("effective flux requires J > 0")
    return mu * np.asarray(dv_dy, dtype=float) / J - np.asarray(pi, dtype=float)


def specific_energy(v, theta, c_v: float):
    """Specific total energy density: v^2/2 + c_v * theta."""
    v = np.asarray(v, dtype=float)
    return 0.5 * v * v + c_v * np.asarray(theta, dtype=float)


VIOLATION_NEGATIVE_DENSITY = "negative_density"
VIOLATION_NEGATIVE_TEMPERATURE = "negative_temperature"
VIOLATION_ENDPOINT_VELOCITY = "endpoint_velocity_nonzero"
VIOLATION_THETA_NEUMANN = "theta_slope_nonzero_at_neumann_end"


@dataclass
class ValidationReport:
    """Outcome of the hypothesis checks plus the compatibility functions.

    g0 and h0 are the compatibility quotients on cells; they are NaN on
    flagged cells, i.e. where rho0 = 0 but the quotient numerator does not
    vanish (the continuum hypothesis fails there).
    """

    violations: list[tuple[str, str]] = field(default_factory=list)
    g0: np.ndarray | None = None
    h0: np.ndarray | None = None
    flagged_cells: np.ndarray | None = None
    vacuum_cells: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def has_vacuum_flags(self) -> bool:
        return self.flagged_cells is not None and self.flagged_cells.size > 0


def _compatibility_quotients(data: InitialData, params: PhysicalParams, grid: Grid):
    """g0, h0 on cells plus the indices where the quotient is undefined."""
    rho = data.rho0
    theta = data.theta0
    dv = data.d_v0(grid)
    ddv = data.dd_v0(grid)
    drho = data.d_rho0(grid)
    dtheta = data.d_theta0(grid)
    ddtheta = data.dd_theta0(grid)

    num_g = params.mu * ddv - params.R * (drho * theta + rho * dtheta)
    num_h = params.mu * dv * dv + params.kappa * ddtheta - params.R * dv * rho * theta

    g0 = np.zeros(grid.N)
    h0 = np.zeros(grid.N)
    positive = rho > 0
    sqrt_rho = np.sqrt(rho[positive])
    g0[positive] = num_g[positive] / sqrt_rho
    h0[positive] = num_h[positive] / sqrt_rho

    vacuum = np.flatnonzero(~positive)
    scale_g = max(1.0, sup_norm(num_g))
    scale_h = max(1.0, sup_norm(num_h))
    bad = (~positive) & ((np.abs(num_g) > 1e-10 * scale_g) | (np.abs(num_h) > 1e-10 * scale_h))
    flagged = np.flatnonzero(bad)
    g0[bad] = np.nan
    h0[bad] = np.nan
    return g0, h0, flagged, vacuum


def validate_initial_data(
    data: InitialData,
    params: PhysicalParams,
    bc: ThetaBC,
    grid: Grid,
) -> ValidationReport:
    """Check the well-posedness hypotheses and form the compatibility functions.

    Raises StructuralError on inconsistent array lengths or non-finite
    samples.  Hypothesis violations (sign conditions, endpoint conditions)
    are collected in the report, not raised.  The endpoint slope check for
    Neumann sides is asymptotic: the one-sided difference of the cell
    samples must vanish like O(dy), so it is compared against a
    sqrt(dy/L)-scaled threshold.
    """
    data.check_shapes(grid)
    report = ValidationReport()

    if np.any(data.rho0 < 0):
        idx = int(np.argmin(data.rho0))
        report.violations.append(
            (VIOLATION_NEGATIVE_DENSITY,
             f"rho0 < 0 (min {data.rho0[idx]:.6g} at cell {idx})"))
    if np.any(data.theta0 < 0):
        idx = int(np.argmin(data.theta0))
        report.violations.append(
            (VIOLATION_NEGATIVE_TEMPERATURE,
             f"theta0 < 0 (min {data.theta0[idx]:.6g} at cell {idx})"))

    v_tol = 1e-12 * max(1.0, sup_norm(data.v0))
    for side, value in (("left", data.v0[0]), ("right", data.v0[-1])):
        if abs(value) > v_tol:
            report.violations.append(
                (VIOLATION_ENDPOINT_VELOCITY,
                 f"endpoint velocity nonzero at {side} end: v0 = {value:.6g}"))

    slope_tol = math.sqrt(grid.dy / grid.L) * max(1.0, sup_norm(data.theta0)) / grid.L
    if data.theta0_y is not None:
        # Linear extrapolation of the analytic slope samples to the endpoints.
        left_slope = 1.5 * data.theta0_y[0] - 0.5 * data.theta0_y[1]
        right_slope = 1.5 * data.theta0_y[-1] - 0.5 * data.theta0_y[-2]
    else:
        left_slope = (data.theta0[1] - data.theta0[0]) / grid.dy
        right_slope = (data.theta0[-1] - data.theta0[-2]) / grid.dy
    if not bc.left_dirichlet and abs(left_slope) > slope_tol:
        report.violations.append(
            (VIOLATION_THETA_NEUMANN,
             f"one-sided theta0 slope {left_slope:.6g} at left Neumann end"))
    if not bc.right_dirichlet and abs(right_slope) > slope_tol:
        report.violations.append(
            (VIOLATION_THETA_NEUMANN,
             f"one-sided theta0 slope {right_slope:.6g} at right Neumann end"))

    report.g0, report.h0, report.flagged_cells, report.vacuum_cells = \
        _compatibility_quotients(data, params, grid)
    return report


@dataclass(frozen=True, eq=False)
class AprioriConstants:
    """Explicitly computable constants entering the proven bounds.

    f1(t) = m1 * exp(f1_rate * t) with f1_rate = R m1^2 E0 / (mu c_v L) is
    the growth envelope for the strain history factor; m_lower = 1/m1.
    N3 is taken over the cells where the compatibility quotients are
    defined; n_flagged > 0 means the continuum value is not finite.
    """

    E0: float
    rho_bar: float
    omega0: float
    m1: float
    m_lower: float
    f1_rate: float
    N1: float
    N2: float
    N2_alt: float
    N3: float
    g0: np.ndarray
    h0: np.ndarray
    n_flagged: int

    def f1(self, t):
        return self.m1 * np.exp(self.f1_rate * np.asarray(t, dtype=float))

    def j_lower_bound(self, t):
        return 1.0 / (self.m1 * self.f1(t))


def cell_average_of_node_square(v: np.ndarray, power: int = 2) -> np.ndarray:
    """Trapezoid-in-cell value of v**power for a node field."""
    w = v.astype(float) ** power
    return 0.5 * (w[:-1] + w[1:])


def total_energy(v: np.ndarray, theta: np.ndarray, rho0: np.ndarray,
                 c_v: float, grid: Grid) -> float:
    """Integral of rho0 v^2/2 + c_v rho0 theta with the grid's quadrature."""
    v2 = cell_average_of_node_square(v)
    return grid.dy * float(np.sum(rho0 * (0.5 * v2 + c_v * theta)))


def apriori_constants(data: InitialData, params: PhysicalParams, grid: Grid) -> AprioriConstants:
    """Evaluate every closed-form constant for the given (possibly shifted) data."""
    data.check_shapes(grid)
    rho = data.rho0
    rho_bar = float(np.max(rho))
    if rho_bar <= 0:
        raise DegenerateDataError("rho0 is identically zero; omega0 = 0")
    omega0 = grid.dy * float(np.count_nonzero(rho >= 0.5 * rho_bar))

    E0 = total_energy(data.v0, data.theta0, rho, params.c_v, grid)
    rho_l1 = cell_l1(rho, grid)
    m1_exponent = (2.0 / params.mu) * math.sqrt(2.0 * rho_l1 * E0)
    if m1_exponent > 700.0:  # exp would overflow double precision
        raise NumericalError(
            f"strain-history constant exponent {m1_exponent:.3g} exceeds float range")
    m1 = math.exp(m1_exponent)
    f1_rate = params.R * m1 * m1 * E0 / (params.mu * params.c_v * params.L)

    drho_sup = sup_norm(data.d_rho0(grid))
    N1 = (E0 / params.c_v + rho_bar + 1.0 / rho_bar + params.L + 1.0 / params.L
          + 1.0 / omega0 + drho_sup)

    v2_cells = cell_average_of_node_square(data.v0, 2)
    v4_cells = cell_average_of_node_square(data.v0, 4)
    rho_v2_sq = grid.dy * float(np.sum(rho * v4_cells))       # ||sqrt(rho0) v0^2||_2^2
    rho_v_sq = grid.dy * float(np.sum(rho * v2_cells))        # ||sqrt(rho0) v0||_2^2
    rho_theta_sq = grid.dy * float(np.sum(rho * data.theta0 ** 2))
    dv_l2 = cell_l2(data.d_v0(grid), grid)
    N2 = math.sqrt(rho_v2_sq) + math.sqrt(rho_theta_sq) + dv_l2
    N2_alt = math.sqrt(rho_v2_sq) + math.sqrt(rho_v_sq) + dv_l2

    g0, h0, flagged, _vacuum = _compatibility_quotients(data, params, grid)
    defined = ~np.isnan(g0)
    g0_l2 = math.sqrt(grid.dy * float(np.sum(g0[defined] ** 2)))
    h0_l2 = math.sqrt(grid.dy * float(np.sum(h0[defined] ** 2)))
    N3 = cell_l2(data.dd_rho0(grid), grid) + g0_l2 + h0_l2

    return AprioriConstants(
        E0=E0, rho_bar=rho_bar, omega0=omega0,
        m1=m1, m_lower=1.0 / m1, f1_rate=f1_rate,
        N1=N1, N2=N2, N2_alt=N2_alt, N3=N3,
        g0=g0, h0=h0, n_flagged=int(flagged.size),
    )
