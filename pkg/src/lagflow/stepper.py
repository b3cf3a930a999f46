"""First-order IMEX time stepping for the flow-map system.

Per accepted step, in order: (1) implicit momentum solve with the old
geometry and pressure, (2) local Jacobian update from the new strain,
(3) implicit temperature solve against the new geometry with lagged
pressure work, (4) accumulator updates.  Diffusion is implicit
(tridiagonal solves); the pressure/strain couplings are explicit, so an
adaptive step limiter and a reject-and-halve loop guard positivity.

The displacement accumulator receives the identical increment as the
Jacobian update so that 1 + d(acc_eta)/dy == J holds to round-off at
every step; the remaining accumulators use trapezoid in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import tridiag
from .errors import (
    JACOBIAN_FLOOR,
    NEGATIVE_TEMPERATURE,
    DegenerateDataError,
    DegenerateJacobianError,
    InvalidInitialDataError,
    NumericalError,
    RunAbortedError,
    StepRejected,
    StructuralError,
)
from .grid1d import (
    Grid,
    ThetaBC,
    cell_div_flux,
    cell_gradient,
    cumulative_integral,
    face_average,
    integrate,
    node_average,
)
from .model import InitialData, PhysicalParams, pressure, validate_initial_data

SourceFn = Callable[[np.ndarray, float], np.ndarray]

IMEX_EULER = "imex-euler"
IMEX_CN = "imex-cn"


@dataclass(frozen=True, eq=False)
class State:
    """Immutable snapshot of the discrete solution at time t.

    J, theta and the cell accumulators live on cells; v and acc_eta on
    nodes.  acc_pi integrates the pressure, acc_rho_theta the density-
    weighted temperature, acc_ks the temperature against the strain
    history weights, acc_eta the velocity (flow-map displacement).
    """

    t: float
    J: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    acc_pi: np.ndarray
    acc_rho_theta: np.ndarray
    acc_ks: np.ndarray
    acc_eta: np.ndarray


@dataclass(frozen=True)
class SchemeConfig:
    dt_initial: float = 1e-3
    dt_min: float = 1e-10
    dt_max: float = 1e-2
    safety: float = 0.8
    J_floor: float = 1e-8
    theta_negative_tolerance: float = 1e-11
    variant: str = IMEX_EULER
    source_v: SourceFn | None = None
    source_theta: SourceFn | None = None
    heating_factor: float = 1.0  # fault-injection knob; 1.0 is the physical value

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_initial <= self.dt_max):
            raise StructuralError(
                f"need 0 < dt_min <= dt_initial <= dt_max, got "
                f"({self.dt_min}, {self.dt_initial}, {self.dt_max})")
        if not (0 < self.safety <= 1):
            raise StructuralError(f"safety factor must be in (0, 1], got {self.safety}")
        if self.J_floor <= 0:
            raise StructuralError("J_floor must be positive")
        if self.theta_negative_tolerance < 0:
            raise StructuralError("theta_negative_tolerance must be nonnegative")
        if self.variant not in (IMEX_EULER, IMEX_CN):
            raise StructuralError(f"unknown scheme variant {self.variant!r}")


@dataclass(eq=False)
class Trajectory:
    """Snapshots at the requested times plus run metadata.

    prev_states[i] is the accepted state immediately before snapshots[i]
    (None for a t=0 snapshot); the pair gives the backward time difference
    the flux audits need.  `data` is the regularized initial data that was
    actually solved.
    """

    snapshots: list[State]
    prev_states: list[State | None]
    data: InitialData
    params: PhysicalParams
    bc: ThetaBC
    grid: Grid
    accepted: int = 0
    rejected: int = 0
    min_J: float = math.inf
    max_mass_err: float = 0.0

    @property
    def times(self) -> list[float]:
        return [s.t for s in self.snapshots]


def initial_state(data: InitialData, grid: Grid) -> State:
    N = grid.N
    return State(
        t=0.0,
        J=np.ones(N),
        v=data.v0.copy(),
        theta=data.theta0.copy(),
        acc_pi=np.zeros(N),
        acc_rho_theta=np.zeros(N),
        acc_ks=np.zeros(N),
        acc_eta=np.zeros(N + 1),
    )


def ks_state_fields(
    v: np.ndarray,
    J: np.ndarray,
    acc_pi: np.ndarray,
    data: InitialData,
    params: PhysicalParams,
    grid: Grid,
):
    """Strain-history fields of a state.

    Returns (h_field, h, H, B_nodes, B_cells) where h_field is the
    cellwise evaluation of the quantity that is y-independent for the
    continuum system, h its y-average, H = exp(h/mu), and B the
    exponential of minus the running momentum deficit over mu.
    """
    if np.min(J) <= 0.0:
        raise DegenerateJacobianError("strain-history fields require J > 0")
    dv = v - data.v0
    integrand = data.rho0 * 0.5 * (dv[:-1] + dv[1:])
    C_nodes = cumulative_integral(integrand, grid)
    C_mid = 0.5 * (C_nodes[:-1] + C_nodes[1:])
    h_field = C_mid - params.mu * np.log(J) + acc_pi
    h = float(np.mean(h_field))
    peak = max(abs(h), float(np.max(np.abs(C_nodes)))) / params.mu
    if peak > 700.0:  # exp would overflow double precision
        raise NumericalError(
            f"strain-history weight exponent {peak:.3g} exceeds float range")
    H = math.exp(h / params.mu)
    B_nodes = np.exp(-C_nodes / params.mu)
    B_cells = np.exp(-C_mid / params.mu)
    return h_field, h, H, B_nodes, B_cells


def _solve_momentum(state, dt, rho_node, a_cells, pi_n, params, cfg, grid, t_new):
    """Implicit viscous solve for the interior velocities; endpoints stay 0."""
    mu, dy = params.mu, grid.dy
    lam = mu / (dy * dy)
    w = 1.0 if cfg.variant == IMEX_EULER else 0.5
    diag = rho_node / dt + w * lam * (a_cells[:-1] + a_cells[1:])
    off = -w * lam * a_cells[1:-1]
    rhs = rho_node * state.v[1:-1] / dt - (pi_n[1:] - pi_n[:-1]) / dy
    if cfg.variant == IMEX_CN:
        v = state.v
        rhs += 0.5 * lam * (a_cells[1:] * (v[2:] - v[1:-1]) - a_cells[:-1] * (v[1:-1] - v[:-2]))
    if cfg.source_v is not None:
        t_src = t_new if cfg.variant == IMEX_EULER else t_new - dt / 2
        rhs += cfg.source_v(grid.nodes[1:-1], t_src)
    v_new = np.zeros(grid.N + 1)
    v_new[1:-1] = tridiag.solve(off, diag, off, rhs)
    return v_new


def _solve_temperature(state, dt, rho, J_new, grad_v_new, params, cfg, bc, grid, t_new):
    """Implicit diffusion solve for theta with explicit work and heating."""
    kappa, dy = params.kappa, grid.dy
    lam = kappa / (dy * dy)
    w = 1.0 if cfg.variant == IMEX_EULER else 0.5
    a_face = face_average(1.0 / J_new, grid)

    diag = params.c_v * rho / dt
    diag[1:] += w * lam * a_face[1:-1]
    diag[:-1] += w * lam * a_face[1:-1]
    if bc.left_dirichlet:
        diag[0] += w * lam * 2.0 * a_face[0]
    if bc.right_dirichlet:
        diag[-1] += w * lam * 2.0 * a_face[-1]
    off = -w * lam * a_face[1:-1]

    work = grad_v_new * params.R * rho * state.theta / J_new
    heating = cfg.heating_factor * params.mu * grad_v_new * grad_v_new / J_new
    rhs = params.c_v * rho * state.theta / dt - work + heating
    if cfg.variant == IMEX_CN:
        rhs += 0.5 * kappa * cell_div_flux(a_face, state.theta, grid, bc)
    if cfg.source_theta is not None:
        t_src = t_new if cfg.variant == IMEX_EULER else t_new - dt / 2
        rhs += cfg.source_theta(grid.centers, t_src)
    return tridiag.solve(off, diag, off, rhs)


def step(
    state: State,
    dt: float,
    data: InitialData,
    params: PhysicalParams,
    cfg: SchemeConfig,
    bc: ThetaBC,
    grid: Grid,
) -> State:
    """Advance one step of size dt; raises StepRejected on positivity loss.

    `data` must be the regularized data actually solved (strictly positive
    density); the caller shifts by eps once, before stepping.
    """
    if not (dt > 0 and np.isfinite(dt)):
        raise StructuralError(f"step size must be positive and finite, got {dt}")
    rho = data.rho0
    rho_node = node_average(rho, grid)
    a_cells = 1.0 / state.J
    pi_n = pressure(rho, state.theta, state.J, params.R)
    t_new = state.t + dt

    v_new = _solve_momentum(state, dt, rho_node, a_cells, pi_n, params, cfg, grid, t_new)

    grad_v_new = cell_gradient(v_new, grid)
    if cfg.variant == IMEX_EULER:
        dJ = dt * grad_v_new
        deta = dt * v_new
    else:
        dJ = dt * cell_gradient(0.5 * (state.v + v_new), grid)
        deta = dt * 0.5 * (state.v + v_new)
    J_new = state.J + dJ
    if np.min(J_new) <= cfg.J_floor:
        raise StepRejected(JACOBIAN_FLOOR, f"min J = {np.min(J_new):.3e} at dt = {dt:.3e}")

    theta_new = _solve_temperature(state, dt, rho, J_new, grad_v_new,
                                   params, cfg, bc, grid, t_new)
    if np.min(theta_new) < -cfg.theta_negative_tolerance:
        raise StepRejected(NEGATIVE_TEMPERATURE,
                           f"min theta = {np.min(theta_new):.3e} at dt = {dt:.3e}")

    pi_new = pressure(rho, theta_new, J_new, params.R)
    acc_pi = state.acc_pi + 0.5 * dt * (pi_n + pi_new)
    acc_rho_theta = state.acc_rho_theta + 0.5 * dt * rho * (state.theta + theta_new)
    acc_eta = state.acc_eta + deta

    _, _, H_old, _, B_old = ks_state_fields(state.v, state.J, state.acc_pi,
                                            data, params, grid)
    _, _, H_new, _, B_new = ks_state_fields(v_new, J_new, acc_pi, data, params, grid)
    acc_ks = state.acc_ks + 0.5 * dt * (state.theta * H_old * B_old
                                        + theta_new * H_new * B_new)

    return State(t=t_new, J=J_new, v=v_new, theta=theta_new,
                 acc_pi=acc_pi, acc_rho_theta=acc_rho_theta,
                 acc_ks=acc_ks, acc_eta=acc_eta)


def adaptive_dt(state: State, data: InitialData, params: PhysicalParams,
                cfg: SchemeConfig, grid: Grid) -> float:
    """Step proposal limiting the explicit pressure/strain couplings.

    clamp(safety * min_cells J/(|dv/dy| + c0), dt_min, dt_max) with the
    acoustic-like guard c0 = R rho_bar max(theta) / (mu min J).  Rejection
    halving is handled by the run loop, not here.
    """
    J_min = float(np.min(state.J))
    if J_min <= 0:
        raise DegenerateJacobianError("adaptive step proposal requires J > 0")
    theta_max = max(float(np.max(state.theta)), 0.0)
    rho_bar = float(np.max(data.rho0))
    c0 = params.R * rho_bar * theta_max / (params.mu * J_min)
    strain = np.abs(cell_gradient(state.v, grid))
    denom = strain + c0
    if np.all(denom == 0.0):
        return cfg.dt_max
    with np.errstate(divide="ignore"):
        candidate = float(np.min(np.where(denom > 0, state.J / denom, np.inf)))
    return float(min(max(cfg.safety * candidate, cfg.dt_min), cfg.dt_max))


def _normalized_snapshot_times(snapshot_times, t_end: float) -> list[float]:
    if snapshot_times is None:
        return [t_end]
    times = sorted(float(s) for s in snapshot_times)
    tol = 1e-12 * max(1.0, t_end)
    out: list[float] = []
    for s in times:
        if s < -tol or s > t_end + tol:
            raise StructuralError(f"snapshot time {s} outside [0, {t_end}]")
        s = min(max(s, 0.0), t_end)
        if not out or s - out[-1] > tol:
            out.append(s)
    return out


def run(
    data: InitialData,
    params: PhysicalParams,
    cfg: SchemeConfig,
    bc: ThetaBC,
    t_end: float,
    snapshot_times=None,
) -> Trajectory:
    """Integrate from t=0 to t_end, snapshotting exactly at the requested times.

    Snapshot times are hit by shortening the final step onto them (never by
    interpolation).  Raw-data hypothesis violations abort before stepping;
    vacuum compatibility flags are tolerated only when eps > 0.
    """
    if not (np.isfinite(t_end) and t_end > 0):
        raise StructuralError(f"t_end must be positive, got {t_end!r}")
    grid = Grid(params.L, np.asarray(data.rho0).shape[0])
    report = validate_initial_data(data, params, bc, grid)
    if not report.ok:
        raise InvalidInitialDataError(
            "; ".join(msg for _code, msg in report.violations))
    if report.has_vacuum_flags and params.eps == 0.0:
        raise DegenerateDataError(
            f"{report.flagged_cells.size} vacuum cells with nonvanishing "
            f"compatibility numerator and eps = 0")
    eff = data.shifted(params.eps)
    if np.min(eff.rho0) <= 0.0:
        raise DegenerateDataError("effective density has zeros; set eps > 0")

    times = _normalized_snapshot_times(snapshot_times, t_end)
    tol = 1e-12 * max(1.0, t_end)

    state = initial_state(eff, grid)
    traj = Trajectory(snapshots=[], prev_states=[], data=eff, params=params,
                      bc=bc, grid=grid)
    pending = list(times)
    if pending and pending[0] <= tol:
        traj.snapshots.append(state)
        traj.prev_states.append(None)
        pending.pop(0)

    traj.min_J = 1.0
    dt_next = cfg.dt_initial
    t = 0.0
    while t < t_end - tol:
        target = pending[0] if pending else t_end
        dt_try = min(dt_next, target - t)
        landing = dt_try >= target - t - tol
        prev = state
        try:
            new_state = step(prev, dt_try, eff, params, cfg, bc, grid)
        except StepRejected as rej:
            traj.rejected += 1
            dt_next = 0.5 * dt_try
            if dt_next < cfg.dt_min:
                raise RunAbortedError(
                    f"dt fell below dt_min = {cfg.dt_min:.3e} at t = {t:.6g} "
                    f"after rejection ({rej})") from rej
            continue
        state = replace(new_state, t=target) if landing else new_state
        traj.accepted += 1
        t = state.t
        traj.min_J = min(traj.min_J, float(np.min(state.J)))
        traj.max_mass_err = max(traj.max_mass_err,
                                abs(integrate(state.J, grid) - grid.L))
        if landing and pending and abs(target - pending[0]) <= tol:
            traj.snapshots.append(state)
            traj.prev_states.append(prev)
            pending.pop(0)
        dt_next = adaptive_dt(state, eff, params, cfg, grid)
    return traj
