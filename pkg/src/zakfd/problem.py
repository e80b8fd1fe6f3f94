"""Test cases for the Zakharov system: parameters, initial profiles, the
perturbed ion density, the time-derivative functions phi_1..phi_4 and the
Taylor start ``(E^1, F^1)`` of the three-level scheme.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConfigurationError
from .grid import Grid1D, delta_x2, flush_tiny

BOUNDARY_WARN = 1e-8
BOUNDARY_FAIL = 1e-4


@dataclass(frozen=True)
class Profile:
    """A function of ``x`` with optional closed-form derivatives.

    ``derivatives[n - 1]`` is the n-th derivative.  Profiles without the
    derivatives a computation needs fall back to second differences.
    """

    func: Callable[[np.ndarray], np.ndarray]
    derivatives: Sequence[Callable[[np.ndarray], np.ndarray]] = ()

    def __call__(self, x, order=0):
        if order == 0:
            return self.func(x)
        return self.derivatives[order - 1](x)

    def has_derivative(self, order):
        return order == 0 or len(self.derivatives) >= order

    @classmethod
    def tabulated(cls, x, values):
        """Linear interpolation of sampled values (real or complex)."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(values)
        if np.iscomplexobj(v):
            return cls(lambda s: np.interp(s, x, v.real) + 1j * np.interp(s, x, v.imag))
        return cls(lambda s: np.interp(s, x, v))

    @classmethod
    def zero(cls):
        z = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return cls(z, (z, z, z, z))


@dataclass(frozen=True)
class ProfileSet:
    E0: Profile
    omega0: Profile
    omega1: Profile


def _gauss(x):
    return np.exp(-x**2 / 2)


def builtin_profiles() -> ProfileSet:
    """``E0 = exp(-x^2/2)``, ``omega0 = exp(-x^2/4)``, ``omega1 = exp(-x^2/3) sin x``."""
    E0 = Profile(
        _gauss,
        (
            lambda x: -x * _gauss(x),
            lambda x: (x**2 - 1) * _gauss(x),
            lambda x: (3 * x - x**3) * _gauss(x),
            lambda x: (x**4 - 6 * x**2 + 3) * _gauss(x),
        ),
    )
    w0 = lambda x: np.exp(-x**2 / 4)
    omega0 = Profile(
        w0,
        (
            lambda x: -0.5 * x * w0(x),
            lambda x: (0.25 * x**2 - 0.5) * w0(x),
        ),
    )
    omega1 = Profile(lambda x: np.exp(-x**2 / 3) * np.sin(x))
    return ProfileSet(E0, omega0, omega1)


@dataclass(frozen=True)
class PhysicalCase:
    epsilon: float
    alpha: float
    beta: float
    domain: tuple = (-200.0, 200.0)
    T: float = 1.0
    profiles: ProfileSet = field(default_factory=builtin_profiles)
    name: str = "custom"

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ConfigurationError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigurationError("alpha and beta must be nonnegative")
        if not self.T > 0:
            raise ConfigurationError(f"final time must be positive, got {self.T}")
        a, b = self.domain
        if not b > a:
            raise ConfigurationError(f"empty domain {self.domain}")
        object.__setattr__(self, "domain", (float(a), float(b)))

    @property
    def alpha_star(self) -> float:
        return min(self.alpha, 1.0)

    def with_(self, **changes) -> "PhysicalCase":
        kw = dict(
            epsilon=self.epsilon, alpha=self.alpha, beta=self.beta,
            domain=self.domain, T=self.T, profiles=self.profiles, name=self.name,
        )
        kw.update(changes)
        return PhysicalCase(**kw)

    def grid(self, h) -> Grid1D:
        try:
            return Grid1D.from_h(*self.domain, h)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None


CASES = {
    # well-prepared: alpha = 1, beta = 0
    "case-I": (1.0, 0.0),
    # ill-prepared: alpha = beta = 0
    "case-II": (0.0, 0.0),
}


def make_case(name, epsilon, domain=(-200.0, 200.0), T=1.0) -> PhysicalCase:
    try:
        alpha, beta = CASES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown case {name!r}; choose from {sorted(CASES)}"
        ) from None
    return PhysicalCase(epsilon, alpha, beta, domain=domain, T=T, name=name)


def _check_grid(case: PhysicalCase, grid: Grid1D):
    a, b = case.domain
    if not (np.isclose(grid.a, a) and np.isclose(grid.b, b)):
        raise ConfigurationError(
            f"grid [{grid.a}, {grid.b}] does not match domain {case.domain}"
        )


def check_truncation(case: PhysicalCase, grid: Grid1D):
    """Warn when profiles are not negligible at the endpoints; fail if large."""
    ends = np.array([grid.a, grid.b])
    p = case.profiles
    worst = max(
        np.max(np.abs(p.E0(ends))),
        np.max(np.abs(p.omega0(ends))),
        np.max(np.abs(p.omega1(ends))),
    )
    if worst > BOUNDARY_FAIL:
        raise ConfigurationError(
            f"profiles reach {worst:.2e} at the boundary; enlarge the domain"
        )
    if worst > BOUNDARY_WARN:
        warnings.warn(
            f"profiles reach {worst:.2e} at the boundary; Dirichlet truncation "
            "may pollute the solution",
            stacklevel=3,
        )
    w1 = grid.sample(p.omega1).astype(float)
    mean = trapezoid(w1, dx=grid.h)
    if abs(mean) > 1e-8:
        warnings.warn(f"omega1 has nonzero integral {mean:.2e}", stacklevel=3)
    return worst


def build_perturbed_density(case: PhysicalCase, grid: Grid1D):
    """Initial ion density ``N0`` and its time derivative ``N1`` on the grid.

    ``N0 = -|E0|^2 + eps^alpha omega0`` and ``N1 = phi1 + eps^beta omega1`` with
    ``phi1 = 2 Im(E0'' conj(E0))``.
    """
    _check_grid(case, grid)
    check_truncation(case, grid)
    p = case.profiles
    x = grid.x
    eps = case.epsilon
    E0 = np.asarray(p.E0(x), dtype=complex)
    N0 = -np.abs(E0) ** 2 + eps**case.alpha * p.omega0(x)
    N1 = _phi1(grid, E0, p) + eps**case.beta * p.omega1(x)
    for v in (N0, N1):
        v[0] = v[-1] = 0.0
    return N0.astype(float), N1.astype(float)


def _second(grid, prof: Profile, samples):
    if prof.has_derivative(2):
        return np.asarray(prof(grid.x, 2), dtype=samples.dtype)
    return delta_x2(grid, _clamped(samples))


def _clamped(v):
    v = np.array(v)
    v[0] = v[-1] = 0
    return v


def _phi1(grid, E0, p: ProfileSet):
    E0xx = _second(grid, p.E0, E0)
    return 2.0 * np.imag(E0xx * np.conj(E0))


def compute_phi_functions(case: PhysicalCase, grid: Grid1D, N0, N1, analytic=None):
    """Return ``(phi1, phi2, phi3, phi4)`` sampled on the grid.

    ``analytic=None`` uses closed-form derivatives whenever the profiles
    supply them (E0 up to 4th order, omega0 up to 2nd) and second
    differences otherwise; ``False`` forces the difference fallback.
    """
    p = case.profiles
    x = grid.x
    eps = case.epsilon
    E0 = np.asarray(p.E0(x), dtype=complex)
    have = p.E0.has_derivative(4) and p.omega0.has_derivative(2)
    if analytic is None:
        analytic = have
    elif analytic and not have:
        raise ConfigurationError("profiles do not provide the needed derivatives")

    if analytic:
        d1, d2, d4 = (np.asarray(p.E0(x, n), dtype=complex) for n in (1, 2, 4))
        phi1 = 2.0 * np.imag(d2 * np.conj(E0))
        phi2 = 1j * (d2 - N0 * E0)
        w = eps**case.alpha
        N0_1 = -2.0 * np.real(d1 * np.conj(E0)) + w * p.omega0(x, 1)
        N0_2 = -2.0 * np.real(d2 * np.conj(E0)) - 2.0 * np.abs(d1) ** 2 + w * p.omega0(x, 2)
        phi2_xx = 1j * (d4 - (N0_2 * E0 + 2.0 * N0_1 * d1 + N0 * d2))
    else:
        E0 = _clamped(E0)
        d2 = delta_x2(grid, E0)
        phi1 = 2.0 * np.imag(d2 * np.conj(E0))
        phi2 = _clamped(1j * (d2 - N0 * E0))
        phi2_xx = delta_x2(grid, phi2)

    phi3 = 1j * (phi2_xx - N1 * E0 - N0 * phi2)
    phi4 = 2.0 * np.imag(phi2 * np.conj(d2) + E0 * np.conj(phi2_xx))
    out = [np.array(phi1, dtype=float), _clamped(phi2), _clamped(phi3), np.array(phi4, dtype=float)]
    out[0][[0, -1]] = 0.0
    out[3][[0, -1]] = 0.0
    return tuple(out)


@dataclass
class InitialState:
    E0: np.ndarray
    E1: np.ndarray
    F0: np.ndarray
    F1: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray
    phi4: np.ndarray
    N0: np.ndarray
    N1: np.ndarray


def build_first_steps(case: PhysicalCase, grid: Grid1D, tau: float, analytic=None) -> InitialState:
    """Levels 0 and 1 of the scheme from a second-order Taylor expansion."""
    if not tau > 0:
        raise ConfigurationError(f"tau must be positive, got {tau}")
    N0, N1 = build_perturbed_density(case, grid)
    phi1, phi2, phi3, phi4 = compute_phi_functions(case, grid, N0, N1, analytic)
    E0 = grid.sample(case.profiles.E0, complex)
    E1 = E0 + tau * phi2 + 0.5 * tau**2 * phi3
    F1 = 0.5 * tau**2 * phi4
    E1[[0, -1]] = 0.0
    F1[[0, -1]] = 0.0
    E0, E1, F1 = flush_tiny(E0), flush_tiny(E1), flush_tiny(F1)
    return InitialState(
        E0=E0, E1=E1, F0=grid.zeros(), F1=F1,
        phi1=phi1, phi2=phi2, phi3=phi3, phi4=phi4, N0=N0, N1=N1,
    )
