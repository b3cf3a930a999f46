"""Flow-map reconstruction and transport of solutions back to the fixed frame.

The map is eta(y) = y + accumulated displacement; its strict monotonicity is
equivalent to positivity of the Jacobian.  Transport is a diagnostic/export
path, so piecewise-linear interpolation is all that is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMapError, QueryRangeError, StructuralError
from .grid1d import Grid, cell_gradient, sup_norm
from .model import InitialData
from .stepper import State


@dataclass(eq=False)
class EulerFrame:
    """Fixed-frame samples (rho, u, theta) at the query locations x."""

    eta: np.ndarray
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray


def flow_map(state: State, grid: Grid, identity_tol: float = 1e-9) -> np.ndarray:
    """Node positions of the material map at the state's time.

    Verifies the discrete compatibility 1 + d(acc_eta)/dy = J (the two sides
    receive identical updates while stepping) and strict monotonicity.
    """
    eta = grid.nodes + state.acc_eta
    mismatch = sup_norm(1.0 + cell_gradient(state.acc_eta, grid) - state.J)
    if mismatch > identity_tol:
        raise DegenerateMapError(
            f"flow-map/Jacobian mismatch {mismatch:.3e} exceeds {identity_tol:.1e}")
    if np.any(np.diff(eta) <= 0):
        raise DegenerateMapError("flow map is not strictly increasing")
    return eta


def to_euler(state: State, data: InitialData, grid: Grid,
             x_query: np.ndarray) -> EulerFrame:
    """Sample the solution at fixed-frame positions x_query (sorted).

    Each x is located in the map image by binary search, pulled back
    linearly to a material coordinate, and the fields are interpolated
    there: velocity between nodes, density rho0/J and temperature between
    cell-center values.
    """
    x = np.asarray(x_query, dtype=float)
    if x.ndim != 1:
        raise StructuralError("x_query must be a 1D array")
    if x.size > 1 and np.any(np.diff(x) < 0):
        raise StructuralError("x_query must be sorted")
    eta = flow_map(state, grid)
    tol = 1e-12 * max(1.0, grid.L)
    if x.size and (x[0] < eta[0] - tol or x[-1] > eta[-1] + tol):
        raise QueryRangeError(
            f"x range [{x.min():.6g}, {x.max():.6g}] outside map image "
            f"[{eta[0]:.6g}, {eta[-1]:.6g}]")
    x = np.clip(x, eta[0], eta[-1])

    # Pull back: piecewise-linear inverse of the monotone node map.
    y = np.interp(x, eta, grid.nodes)
    u = np.interp(y, grid.nodes, state.v)
    rho_cells = data.rho0 / state.J
    rho = np.interp(y, grid.centers, rho_cells)
    theta = np.interp(y, grid.centers, state.theta)
    return EulerFrame(eta=eta, x=x, rho=rho, u=u, theta=theta)
