"""Free acoustic waves carried by the incompatible part of the initial density.

The wave equations ``G_ss = G_xx`` with homogeneous Dirichlet data are solved
in sine space, where every mode is a closed-form function of time:

    G1(x, s) = sum_l w0_l cos(mu_l s) sin(mu_l (x - a))
    G2(x, s) = sum_l (w1_l / mu_l) sin(mu_l s) sin(mu_l (x - a))

so evaluation at any time and integration over any time window are exact up
to roundoff.  The Zakharov scheme only ever sees ``G^eps(x, t/eps)`` through
its window average over ``[t_{k-1}, t_{k+1}]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D, dst_forward, dst_inverse
from .problem import PhysicalCase


@dataclass(frozen=True)
class WaveModes:
    grid: Grid1D
    mu: np.ndarray
    w0_hat: np.ndarray
    w1_hat: np.ndarray
    epsilon: float
    alpha: float
    beta: float

    @property
    def cos_amplitude(self) -> np.ndarray:
        """Per-mode amplitude of ``cos(mu s)`` in ``G^eps``."""
        return self.epsilon**self.alpha * self.w0_hat

    @property
    def sin_amplitude(self) -> np.ndarray:
        """Per-mode amplitude of ``sin(mu s)`` in ``G^eps``."""
        return self.epsilon ** (1.0 + self.beta) * self.w1_hat / self.mu


def wave_modes(grid: Grid1D, omega0, omega1, epsilon, alpha, beta) -> WaveModes:
    """Build modes from interior samples (length ``M - 1``) of omega0, omega1."""
    mu = np.arange(1, grid.M) * np.pi / (grid.b - grid.a)
    return WaveModes(
        grid=grid,
        mu=mu,
        w0_hat=dst_forward(omega0),
        w1_hat=dst_forward(omega1),
        epsilon=float(epsilon),
        alpha=float(alpha),
        beta=float(beta),
    )


def decompose_waves(case: PhysicalCase, grid: Grid1D) -> WaveModes:
    x = grid.x[1:-1]
    p = case.profiles
    return wave_modes(
        grid, p.omega0(x), p.omega1(x), case.epsilon, case.alpha, case.beta
    )


def _synthesize(grid: Grid1D, coeffs) -> np.ndarray:
    out = np.zeros(grid.M + 1)
    out[1:-1] = dst_inverse(coeffs)
    return out


def evaluate_G(modes: WaveModes, s: float) -> np.ndarray:
    """``G^eps(x_j, s)`` on the grid (fast time ``s``, not physical time)."""
    ms = modes.mu * s
    return _synthesize(
        modes.grid,
        modes.cos_amplitude * np.cos(ms) + modes.sin_amplitude * np.sin(ms),
    )


def _window_coefficients(modes: WaveModes, t_mid, half_width):
    # int_{t_mid-w}^{t_mid+w} [A cos(mu t/eps) + B sin(mu t/eps)] dt
    #   = (2 eps/mu) sin(mu w/eps) [A cos(mu t_mid/eps) + B sin(mu t_mid/eps)]
    eps = modes.epsilon
    k = modes.mu / eps
    phase = k * t_mid
    scale = 2.0 * np.sin(k * half_width) / k
    return scale * (modes.cos_amplitude * np.cos(phase) + modes.sin_amplitude * np.sin(phase))


def integral_of_G(modes: WaveModes, t0: float, t1: float) -> np.ndarray:
    """``int_{t0}^{t1} G^eps(x_j, t/eps) dt`` evaluated exactly per mode."""
    if t1 < t0:
        raise ValueError(f"need t1 >= t0, got [{t0}, {t1}]")
    return _synthesize(
        modes.grid, _window_coefficients(modes, 0.5 * (t0 + t1), 0.5 * (t1 - t0))
    )


def averaged_potential(modes: WaveModes, t_k: float, tau: float) -> np.ndarray:
    """Mean of ``G^eps(x_j, t/eps)`` over ``[t_k - tau, t_k + tau]``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    return _synthesize(modes.grid, _window_coefficients(modes, t_k, tau) / (2.0 * tau))


class AveragedPotential:
    """Averaged potential at ``t_k = k tau`` for consecutive ``k``.

    Keeps the per-mode window factors and advances the phases
    ``exp(i mu t_k / eps)`` by one complex multiply per step, so the time loop
    pays a single sine synthesis per step.  Phases are recomputed from
    scratch every ``resync`` steps to stop rounding drift.
    """

    def __init__(self, modes: WaveModes, tau: float, resync: int = 512):
        self.modes = modes
        self.tau = float(tau)
        self.resync = resync
        k = modes.mu / modes.epsilon
        fac = np.sin(k * self.tau) / (k * self.tau)
        self._a = fac * modes.cos_amplitude
        self._b = fac * modes.sin_amplitude
        self._k = k
        self._rot = np.exp(1j * k * self.tau)
        self._step = None
        self._phase = None
        self._zero = not (np.any(self._a) or np.any(self._b))

    def __call__(self, step: int) -> np.ndarray:
        grid = self.modes.grid
        if self._zero:
            return grid.zeros()
        if self._step is not None and step == self._step + 1 and step % self.resync:
            self._phase *= self._rot
        else:
            self._phase = np.exp(1j * self._k * (step * self.tau))
        self._step = step
        return _synthesize(grid, self._a * self._phase.real + self._b * self._phase.imag)
