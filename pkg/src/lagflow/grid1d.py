"""Staggered uniform grid on (0, L) and its conservative difference operators.

Layout (N cells, N+1 nodes, dy = L/N):

    node 0      node 1                node N
      |----cell 0----|----cell 1--- ... ---|

Velocities live on nodes; the Jacobian, temperature, density and
pressure live on cell centers.  The placement makes the kinematic
update of the Jacobian a cell-local exact difference, so the discrete
total of the Jacobian is conserved to round-off.

All operators are pure functions of their array arguments.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DegenerateJacobianError, StructuralError


class ThetaBC(Enum):
    """Homogeneous temperature boundary condition variants (left-right)."""

    NEUMANN_NEUMANN = "neumann-neumann"
    DIRICHLET_DIRICHLET = "dirichlet-dirichlet"
    DIRICHLET_NEUMANN = "dirichlet-neumann"
    NEUMANN_DIRICHLET = "neumann-dirichlet"

    @property
    def left_dirichlet(self) -> bool:
        return self in (ThetaBC.DIRICHLET_DIRICHLET, ThetaBC.DIRICHLET_NEUMANN)

    @property
    def right_dirichlet(self) -> bool:
        return self in (ThetaBC.DIRICHLET_DIRICHLET, ThetaBC.NEUMANN_DIRICHLET)


class Grid:
    """Uniform staggered grid: N cells on (0, L), nodes at j*dy."""

    def __init__(self, L: float, N: int):
        if not (isinstance(N, (int, np.integer)) and N >= 2):
            raise StructuralError(f"cell count N must be an integer >= 2, got {N!r}")
        if not (np.isfinite(L) and L > 0):
            raise StructuralError(f"domain length L must be positive, got {L!r}")
        self.L = float(L)
        self.N = int(N)
        self.dy = self.L / self.N
        self.nodes = np.linspace(0.0, self.L, self.N + 1)
        self.centers = 0.5 * (self.nodes[:-1] + self.nodes[1:])

    def __repr__(self) -> str:
        return f"Grid(L={self.L}, N={self.N})"

    def check_cells(self, f: np.ndarray, name: str = "cell field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.N,):
            raise StructuralError(f"{name} must have shape ({self.N},), got {f.shape}")
        return f

    def check_nodes(self, f: np.ndarray, name: str = "node field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.N + 1,):
            raise StructuralError(f"{name} must have shape ({self.N + 1},), got {f.shape}")
        return f


def cell_gradient(node_field: np.ndarray, grid: Grid) -> np.ndarray:
    """First difference of a node field, exact for affine fields; lives on cells."""
    f = grid.check_nodes(node_field)
    return (f[1:] - f[:-1]) / grid.dy


def node_average(cell_field: np.ndarray, grid: Grid) -> np.ndarray:
    """Arithmetic average of adjacent cells; lives on the N-1 interior nodes."""
    f = grid.check_cells(cell_field)
    return 0.5 * (f[:-1] + f[1:])


def face_average(cell_field: np.ndarray, grid: Grid) -> np.ndarray:
    """Cell field interpolated to all N+1 nodes.

    Interior nodes take the adjacent-cell average; boundary nodes copy the
    single adjacent cell (the ghost-reflection value).
    """
    f = grid.check_cells(cell_field)
    out = np.empty(grid.N + 1)
    out[1:-1] = 0.5 * (f[:-1] + f[1:])
    out[0] = f[0]
    out[-1] = f[-1]
    return out


def node_div_flux(cell_coef: np.ndarray, node_field: np.ndarray, grid: Grid) -> np.ndarray:
    """Divergence of coef * gradient for a node field; interior nodes only.

    At interior node i (cells are 1-based here):
    [a_{i+1}(f_{i+1} - f_i) - a_i(f_i - f_{i-1})] / dy^2.
    Second order on smooth fields; exact for affine f with constant a.
    """
    a = grid.check_cells(cell_coef, "coefficient")
    f = grid.check_nodes(node_field)
    if np.any(a <= 0):
        raise DegenerateJacobianError("nonpositive diffusion coefficient on a cell")
    dy2 = grid.dy * grid.dy
    return (a[1:] * (f[2:] - f[1:-1]) - a[:-1] * (f[1:-1] - f[:-2])) / dy2


def cell_div_flux(
    face_coef: np.ndarray,
    cell_field: np.ndarray,
    grid: Grid,
    bc: ThetaBC,
) -> np.ndarray:
    """Conservative divergence of coef * gradient for a cell field.

    `face_coef` holds the coefficient on all N+1 nodes (see face_average);
    its boundary entries are consumed only by Dirichlet sides.  Homogeneous
    Neumann sides impose a zero boundary flux, homogeneous Dirichlet sides
    a ghost cell mirrored through the boundary value 0.  Under Neumann/
    Neumann the result has exactly telescoping (zero) integral.
    """
    a = grid.check_nodes(face_coef, "face coefficient")
    f = grid.check_cells(cell_field)
    if np.any(a[1:-1] <= 0):
        raise DegenerateJacobianError("nonpositive face coefficient at an interior node")
    dy = grid.dy
    flux = np.zeros(grid.N + 1)
    flux[1:-1] = a[1:-1] * (f[1:] - f[:-1]) / dy
    if bc.left_dirichlet:
        if a[0] <= 0:
            raise DegenerateJacobianError("nonpositive face coefficient at the left boundary")
        flux[0] = a[0] * (2.0 * f[0]) / dy
    if bc.right_dirichlet:
        if a[-1] <= 0:
            raise DegenerateJacobianError("nonpositive face coefficient at the right boundary")
        flux[-1] = a[-1] * (-2.0 * f[-1]) / dy
    return (flux[1:] - flux[:-1]) / dy


def integrate(cell_field: np.ndarray, grid: Grid) -> float:
    """Midpoint-rule integral over (0, L); exact for cellwise-constant data."""
    f = grid.check_cells(cell_field)
    return grid.dy * float(np.sum(f))


def cumulative_integral(cell_field: np.ndarray, grid: Grid) -> np.ndarray:
    """Running integral of a cell field, evaluated on nodes; starts at 0."""
    f = grid.check_cells(cell_field)
    out = np.empty(grid.N + 1)
    out[0] = 0.0
    np.cumsum(f * grid.dy, out=out[1:])
    return out


def cumulative_integral_centers(cell_field: np.ndarray, grid: Grid) -> np.ndarray:
    """Running integral of a cell field, evaluated at cell centers."""
    nodes = cumulative_integral(cell_field, grid)
    return 0.5 * (nodes[:-1] + nodes[1:])


def cell_l1(f: np.ndarray, grid: Grid) -> float:
    return grid.dy * float(np.sum(np.abs(grid.check_cells(f))))


def cell_l2(f: np.ndarray, grid: Grid) -> float:
    f = grid.check_cells(f)
    return float(np.sqrt(grid.dy * np.sum(f * f)))


def node_l2(f: np.ndarray, grid: Grid) -> float:
    """Composite-trapezoid L2 norm of a node field."""
    f = grid.check_nodes(f)
    w = np.full(grid.N + 1, grid.dy)
    w[0] = w[-1] = 0.5 * grid.dy
    return float(np.sqrt(np.sum(w * f * f)))


def node_l1(f: np.ndarray, grid: Grid) -> float:
    f = grid.check_nodes(f)
    w = np.full(grid.N + 1, grid.dy)
    w[0] = w[-1] = 0.5 * grid.dy
    return float(np.sum(w * np.abs(f)))


def sup_norm(f: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(f, dtype=float))))
