"""Tridiagonal solves for the implicit diffusion steps.

The production path wraps LAPACK's banded solver; both systems assembled
by the stepper are strictly diagonally dominant with positive diagonal,
so `solve_thomas` (plain elimination, no pivoting) is equally valid and
is kept as an independent cross-check.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericalError


def solve(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve T x = rhs for tridiagonal T.

    `lower` (n-1) is the subdiagonal, `diag` (n) the diagonal, `upper`
    (n-1) the superdiagonal.
    """
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    try:
        x = scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
    except (ValueError, np.linalg.LinAlgError) as exc:  # pragma: no cover - defensive
        raise NumericalError(f"tridiagonal solve breakdown: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError("tridiagonal solve produced non-finite values")
    return x


def solve_thomas(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Thomas elimination without pivoting; reference implementation."""
    n = diag.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    piv = diag[0]
    if piv == 0.0:
        raise NumericalError("zero pivot in Thomas elimination")
    c[0] = upper[0] / piv if n > 1 else 0.0
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * c[i - 1]
        if piv == 0.0:
            raise NumericalError("zero pivot in Thomas elimination")
        c[i] = upper[i] / piv if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x
