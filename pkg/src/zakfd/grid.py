"""Uniform Dirichlet grid, finite difference operators, discrete norms,
the sine transform and the two tridiagonal solves used by the schemes.

Grid functions are plain numpy arrays of length ``M + 1`` whose first and
last entries are zero (homogeneous Dirichlet).  Nothing here mutates its
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from numba import njit

from .errors import SolverFailure


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``x_j = a + j h`` on ``[a, b]`` with ``M`` cells."""

    a: float
    b: float
    M: int
    h: float = field(init=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need b > a, got [{self.a}, {self.b}]")
        if int(self.M) != self.M or self.M < 4:
            raise ValueError(f"need integer M >= 4, got {self.M}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "h", (self.b - self.a) / self.M)

    @classmethod
    def from_h(cls, a, b, h):
        """Grid with spacing ``h``; ``(b - a) / h`` must be an integer."""
        m = (b - a) / h
        M = int(round(m))
        if abs(m - M) > 1e-9 * max(1.0, m):
            raise ValueError(f"h={h} does not divide [{a}, {b}] evenly")
        return cls(a, b, M)

    @property
    def x(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.M + 1)

    @property
    def interior(self) -> slice:
        return slice(1, self.M)

    def zeros(self, dtype=float) -> np.ndarray:
        return np.zeros(self.M + 1, dtype=dtype)

    def sample(self, f, dtype=None) -> np.ndarray:
        """Evaluate ``f`` at the nodes and clamp the two boundary entries to 0."""
        v = np.asarray(f(self.x))
        if dtype is not None:
            v = v.astype(dtype)
        v = v.copy()
        v[0] = 0
        v[-1] = 0
        return v

    def check(self, u) -> np.ndarray:
        u = np.asarray(u)
        if u.shape != (self.M + 1,):
            raise ValueError(
                f"grid function has shape {u.shape}, grid expects ({self.M + 1},)"
            )
        return u


# ----------------------------------------------------------------------------
# difference operators and norms


def delta_x2(grid: Grid1D, u) -> np.ndarray:
    """Three-point second difference; boundary entries of the result are 0."""
    u = grid.check(u)
    out = np.zeros_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / grid.h**2
    return out


def delta_x_plus(grid: Grid1D, u) -> np.ndarray:
    """Forward difference, ``M`` values for ``j = 0..M-1``."""
    u = grid.check(u)
    return (u[1:] - u[:-1]) / grid.h


def inner(grid: Grid1D, u, v) -> complex:
    """``(u, v) = h sum_{j=1}^{M-1} u_j conj(v_j)``."""
    u = grid.check(u)
    v = grid.check(v)
    return grid.h * np.sum(u[1:-1] * np.conj(v[1:-1]))


def norm_l2(grid: Grid1D, u) -> float:
    u = grid.check(u)
    return float(np.sqrt(grid.h * np.sum(np.abs(u[1:-1]) ** 2)))


def norm_h1_semi(grid: Grid1D, u) -> float:
    """``||delta_x^+ u||`` with the sum running over ``j = 0..M-1``."""
    d = delta_x_plus(grid, u)
    return float(np.sqrt(grid.h * np.sum(np.abs(d) ** 2)))


def inner_dx_plus(grid: Grid1D, u, v) -> complex:
    """``<delta_x^+ u, delta_x^+ v>``."""
    return grid.h * np.sum(delta_x_plus(grid, u) * np.conj(delta_x_plus(grid, v)))


# ----------------------------------------------------------------------------
# sine transform
#
# Coefficients follow  c_l = (2/M) sum_{j=1}^{M-1} u_j sin(l j pi / M),
# synthesis           u_j = sum_{l=1}^{M-1} c_l sin(l j pi / M).
# scipy's DST-I of length M-1 is 2 sum_n x_n sin(pi (k+1)(n+1) / M).


def dst_forward(samples) -> np.ndarray:
    """Sine coefficients of ``M - 1`` interior samples."""
    s = np.asarray(samples, dtype=float)
    M = s.size + 1
    if M < 4:
        raise ValueError("need at least 3 interior samples")
    return scipy.fft.dst(s, type=1) / M


def dst_inverse(coeffs) -> np.ndarray:
    """Interior samples ``sum_l c_l sin(l j pi / M)`` for ``j = 1..M-1``."""
    c = np.asarray(coeffs, dtype=float)
    return 0.5 * scipy.fft.dst(c, type=1)


def dst_matrix(M: int) -> np.ndarray:
    """Dense ``sin(l j pi / M)`` table, ``l, j = 1..M-1``.  For checks only."""
    idx = np.arange(1, M)
    return np.sin(np.outer(idx, idx) * np.pi / M)


def laplacian_eigenvalues(grid: Grid1D) -> np.ndarray:
    """Eigenvalues of ``-delta_x^2`` on X_M for sine modes ``l = 1..M-1``."""
    l = np.arange(1, grid.M)
    return 4.0 / grid.h**2 * np.sin(l * np.pi / (2 * grid.M)) ** 2


# ----------------------------------------------------------------------------
# tridiagonal solves
#
# Far-field tails of Gaussian data decay into subnormal floats, which are
# two orders of magnitude slower to process; the sweeps flush them to zero.

FLUSH = 1e-150


def flush_tiny(u) -> np.ndarray:
    """Copy of ``u`` with entries below ``FLUSH`` in magnitude set to zero."""
    u = np.array(u)
    u[np.abs(u) < FLUSH] = 0
    return u


@njit(cache=True)
def _thomas(lower, diag, upper, rhs):
    # constant off-diagonals, variable diagonal; empty result on pivot breakdown
    n = diag.size
    cp = np.empty(n, dtype=diag.dtype)
    x = np.empty(n, dtype=rhs.dtype)
    piv = diag[0]
    if abs(piv) < 1e-300:
        return x[:0]
    cp[0] = upper / piv
    x[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower * cp[i - 1]
        if abs(piv) < 1e-300:
            return x[:0]
        cp[i] = upper / piv
        v = (rhs[i] - lower * x[i - 1]) / piv
        if abs(v.real) + abs(v.imag) < FLUSH:
            v = 0.0
        x[i] = v
    for i in range(n - 2, -1, -1):
        v = x[i] - cp[i] * x[i + 1]
        if abs(v.real) + abs(v.imag) < FLUSH:
            v = 0.0
        x[i] = v
    return x


@njit(cache=True)
def _factor_constant(diag, off, n):
    cp = np.empty(n)
    inv = np.empty(n)
    piv = diag
    inv[0] = 1.0 / piv
    cp[0] = off * inv[0]
    for i in range(1, n):
        piv = diag - off * cp[i - 1]
        inv[i] = 1.0 / piv
        cp[i] = off * inv[i]
    return cp, inv


@njit(cache=True)
def _solve_factored(cp, inv, off, rhs):
    n = rhs.size
    x = np.empty(n)
    x[0] = rhs[0] * inv[0]
    for i in range(1, n):
        v = (rhs[i] - off * x[i - 1]) * inv[i]
        x[i] = v if abs(v) >= FLUSH else 0.0
    for i in range(n - 2, -1, -1):
        v = x[i] - cp[i] * x[i + 1]
        x[i] = v if abs(v) >= FLUSH else 0.0
    return x


class HelmholtzSolver:
    """Prefactored solve of ``sigma u - (1/2) delta_x^2 u = rhs`` on X_M.

    The matrix is constant for a given ``(sigma, h)``, so the elimination
    coefficients are computed once and reused every time step.
    """

    def __init__(self, grid: Grid1D, sigma: float):
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        self.grid = grid
        self.sigma = float(sigma)
        w = 0.5 / grid.h**2
        self._off = -w
        self._cp, self._inv = _factor_constant(self.sigma + 2.0 * w, -w, grid.M - 1)

    def solve_interior(self, rhs_interior: np.ndarray) -> np.ndarray:
        return _solve_factored(self._cp, self._inv, self._off, rhs_interior)

    def __call__(self, rhs) -> np.ndarray:
        rhs = self.grid.check(rhs)
        out = np.zeros(self.grid.M + 1)
        out[1:-1] = self.solve_interior(np.ascontiguousarray(rhs[1:-1], dtype=float))
        return out


def solve_real_helmholtz(grid: Grid1D, sigma: float, rhs) -> np.ndarray:
    """Solve ``sigma u_j - (1/2)(delta_x^2 u)_j = rhs_j`` at interior nodes."""
    return HelmholtzSolver(grid, sigma)(rhs)


def complex_tridiagonal_interior(grid: Grid1D, lam: complex, c_interior, rhs_interior):
    """Interior-only kernel behind :func:`solve_complex_tridiagonal`."""
    inv_h2 = 1.0 / grid.h**2
    diag = (lam - 2.0 * inv_h2) - c_interior
    x = _thomas(inv_h2, diag.astype(np.complex128), inv_h2, rhs_interior.astype(np.complex128))
    if x.size == 0:
        raise SolverFailure("pivot breakdown in complex tridiagonal solve")
    return x


def solve_complex_tridiagonal(grid: Grid1D, lam: complex, c, rhs) -> np.ndarray:
    """Solve ``lam u - (-delta_x^2 u + c u) = rhs`` at interior nodes, u in X_M.

    ``c`` is a real potential on the grid.  Raises :class:`SolverFailure` if a
    pivot vanishes, which only happens for a badly posed step.
    """
    c = grid.check(c)
    rhs = grid.check(rhs)
    out = np.zeros(grid.M + 1, dtype=complex)
    out[1:-1] = complex_tridiagonal_interior(
        grid, complex(lam), np.asarray(c[1:-1], dtype=float), np.asarray(rhs[1:-1])
    )
    return out
