"""Uniformly accurate finite difference scheme for the 1D Zakharov system.

Unknowns are the envelope ``E`` and the corrected density ``F = N + |E|^2 - G``
on a Dirichlet grid.  Per step (interior nodes ``j``):

    i (E^{k+1} - E^{k-1}) / (2 tau)
        = (-dxx - |E^k|^2 + H^k + (F^{k+1} + F^{k-1})/2) (E^{k+1} + E^{k-1})/2

    eps^2 (F^{k+1} - 2F^k + F^{k-1}) / tau^2
        = (1/2) dxx (F^{k+1} + F^{k-1}) + eps^2 (rho^{k+1} - 2rho^k + rho^{k-1}) / tau^2

with ``rho = |E|^2`` and ``H^k`` the window average of ``G^eps(x, t/eps)``.
The two equations are coupled through ``rho^{k+1}`` and ``F^{k+1}``; they
are solved by Picard iteration, F first, then E.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._kernels import picard_step, workspace
from .errors import BlowUp, ConfigurationError, SolverFailure, StepFailure
from .grid import Grid1D, HelmholtzSolver, complex_tridiagonal_interior
from .oscillatory import AveragedPotential, WaveModes, decompose_waves, evaluate_G
from .problem import PhysicalCase, build_first_steps


@dataclass(frozen=True)
class StepConfig:
    fp_tol: float = 1e-12
    fp_max_iter: int = 100
    nan_guard: bool = True

    def __post_init__(self):
        if not self.fp_tol > 0:
            raise ConfigurationError("fp_tol must be positive")
        if self.fp_max_iter < 1:
            raise ConfigurationError("fp_max_iter must be at least 1")


@dataclass
class StepStats:
    iterations: int
    residual: float
    mass_defect: float  # | ||E^{k+1}||^2 - ||E^{k-1}||^2 |


@dataclass
class SolverState:
    """Two-level window ``(E^{k-1}, E^k, F^{k-1}, F^k)`` at step ``k``."""

    k: int
    E_prev: np.ndarray
    E_curr: np.ndarray
    F_prev: np.ndarray
    F_curr: np.ndarray
    tau: float
    case: PhysicalCase
    modes: WaveModes
    stats: Optional[StepStats] = None
    _stepper: Optional["Stepper"] = field(default=None, repr=False, compare=False)

    @property
    def grid(self) -> Grid1D:
        return self.modes.grid

    @property
    def t(self) -> float:
        return self.k * self.tau


def _l2sq(h, v):
    return h * float(np.vdot(v, v).real)


class Stepper:
    """Per-run workspace: the prefactored F operator and the potential cache."""

    def __init__(self, case: PhysicalCase, modes: WaveModes, tau: float,
                 cfg: StepConfig = StepConfig(), fused: bool = True):
        self.fused = fused
        self.case = case
        self.modes = modes
        self.grid = modes.grid
        self.tau = float(tau)
        self.cfg = cfg
        self.sigma = case.epsilon**2 / self.tau**2
        self.helmholtz = HelmholtzSolver(self.grid, self.sigma)
        self.potential = AveragedPotential(modes, self.tau)
        self._work = None

    def step(self, state: SolverState) -> SolverState:
        if self.fused:
            return self._step_fused(state)
        return self._step_numpy(state)

    def _step_fused(self, state: SolverState, out=None) -> SolverState:
        cfg = self.cfg
        g = self.grid
        k = state.k
        if self._work is None:
            self._work = workspace(g.M - 1)
        if out is None:
            E_out, F_out = g.zeros(complex), g.zeros()
        else:
            E_out, F_out = out
        H = self.potential(k)
        hs = self.helmholtz
        it, residual, status = picard_step(
            state.E_prev[1:-1], state.E_curr[1:-1], state.F_prev[1:-1],
            state.F_curr[1:-1], H[1:-1],
            state.F_prev[0], state.F_prev[-1], state.E_prev[0], state.E_prev[-1],
            self.sigma, self.tau, g.h, hs._cp, hs._inv, hs._off,
            cfg.fp_tol, cfg.fp_max_iter, self._work, E_out[1:-1], F_out[1:-1],
        )
        if status == 2:
            raise SolverFailure(f"pivot breakdown in the E solve at step {k}")
        if cfg.nan_guard and (status == 3 or not np.isfinite(F_out.sum())):
            raise BlowUp(k + 1, (k + 1) * self.tau)
        if status == 1:
            raise StepFailure(k, residual, k * self.tau)
        return self._accept(state, E_out, F_out, it, residual)

    def _accept(self, state, E_out, F_out, it, residual):
        h = self.grid.h
        defect = abs(_l2sq(h, E_out) - _l2sq(h, state.E_prev))
        return SolverState(
            k=state.k + 1,
            E_prev=state.E_curr,
            E_curr=E_out,
            F_prev=state.F_curr,
            F_curr=F_out,
            tau=self.tau,
            case=state.case,
            modes=state.modes,
            stats=StepStats(it, residual, defect),
            _stepper=self,
        )

    def _step_numpy(self, state: SolverState) -> SolverState:
        cfg = self.cfg
        g = self.grid
        h = g.h
        inv_h2 = 1.0 / h**2
        tau = self.tau
        sigma = self.sigma
        k = state.k

        Em = state.E_prev[1:-1]
        Ek = state.E_curr[1:-1]
        Fm_full = state.F_prev
        Fm = Fm_full[1:-1]
        Fk = state.F_curr[1:-1]
        H = self.potential(k)[1:-1]

        rho_k = Ek.real**2 + Ek.imag**2
        rho_m = Em.real**2 + Em.imag**2
        d2Fm = (Fm_full[2:] - 2.0 * Fm + Fm_full[:-2]) * inv_h2
        F_base = sigma * (2.0 * Fk - Fm) + 0.5 * d2Fm
        rho_base = rho_m - 2.0 * rho_k
        # c-independent part of ((i/tau) + (-dxx)) E^{k-1}
        Em_full = state.E_prev
        lapEm = (Em_full[2:] - 2.0 * Em + Em_full[:-2]) * inv_h2
        rhs_base = (1j / tau) * Em - lapEm
        pot_base = H - rho_k + 0.5 * Fm

        scale = np.sqrt(_l2sq(h, Ek)) + np.sqrt(_l2sq(h, Fk)) + cfg.fp_tol
        E_star = 2.0 * Ek - Em
        F_old = 2.0 * Fk - Fm
        residual = np.inf
        for it in range(1, cfg.fp_max_iter + 1):
            F_new = self.helmholtz.solve_interior(
                F_base + sigma * (E_star.real**2 + E_star.imag**2 + rho_base)
            )
            c = pot_base + 0.5 * F_new
            E_new = complex_tridiagonal_interior(g, 1j / tau, c, rhs_base + c * Em)
            dE = E_new - E_star
            dF = F_new - F_old
            residual = np.sqrt(_l2sq(h, dE)) + np.sqrt(_l2sq(h, dF))
            if cfg.nan_guard and not np.isfinite(residual):
                raise BlowUp(k + 1, (k + 1) * tau)
            E_star = E_new
            F_old = F_new
            if residual <= cfg.fp_tol * scale:
                break
        else:
            raise StepFailure(k, residual, k * self.tau)

        # close the F equation on the accepted E
        F_new = self.helmholtz.solve_interior(
            F_base + sigma * (E_new.real**2 + E_new.imag**2 + rho_base)
        )
        if cfg.nan_guard and not np.isfinite(F_new.sum()):
            raise BlowUp(k + 1, (k + 1) * tau)
        E_out, F_out = g.zeros(complex), g.zeros()
        E_out[1:-1] = E_new
        F_out[1:-1] = F_new
        return self._accept(state, E_out, F_out, it, residual)


def initial_state(case: PhysicalCase, grid: Grid1D, tau: float,
                  cfg: StepConfig = StepConfig(), modes: WaveModes | None = None) -> SolverState:
    """State at ``k = 1`` built from the Taylor start."""
    if not tau > 0:
        raise ConfigurationError(f"tau must be positive, got {tau}")
    if modes is None:
        modes = decompose_waves(case, grid)
    init = build_first_steps(case, grid, tau)
    stepper = Stepper(case, modes, tau, cfg)
    return SolverState(
        k=1, E_prev=init.E0, E_curr=init.E1, F_prev=init.F0, F_curr=init.F1,
        tau=float(tau), case=case, modes=modes, _stepper=stepper,
    )


def step(state: SolverState, cfg: StepConfig | None = None) -> SolverState:
    """Advance ``state`` by one time step."""
    st = state._stepper
    if st is None or (cfg is not None and cfg != st.cfg):
        st = Stepper(state.case, state.modes, state.tau, cfg or StepConfig())
    return st.step(state)


def recover_N(E, F, modes: WaveModes, t: float) -> np.ndarray:
    """Physical density ``N = -|E|^2 + F + G^eps(x, t/eps)``."""
    return -np.abs(E) ** 2 + F + evaluate_G(modes, t / modes.epsilon)


@dataclass
class Snapshot:
    t: float
    k: int
    E: np.ndarray
    F: np.ndarray
    N: np.ndarray


@dataclass
class Trajectory:
    grid: Grid1D
    tau: float
    modes: WaveModes
    snapshots: list
    mass0: float
    max_mass_defect: float
    max_iterations: int
    iterations: list
    wall_time: float

    def at(self, t) -> Snapshot:
        k = int(round(t / self.tau))
        for s in self.snapshots:
            if s.k == k:
                return s
        raise KeyError(f"no snapshot at t={t}")

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def relative_mass_defect(self) -> float:
        return self.max_mass_defect / self.mass0 if self.mass0 > 0 else self.max_mass_defect


def _step_indices(times: Sequence[float], tau: float, T: float):
    ks = []
    for t in times:
        if t < 0 or t > T + 0.5 * tau:
            raise ConfigurationError(f"sample time {t} outside [0, {T}]")
        k = int(round(t / tau))
        if abs(k * tau - t) > 0.5 * tau + 1e-12:
            raise ConfigurationError(f"sample time {t} is not within tau/2 of a step")
        ks.append(k)
    return ks


def run(case: PhysicalCase, grid: Grid1D, tau: float, cfg: StepConfig = StepConfig(),
        sample_times: Sequence[float] | None = None,
        on_step: Callable[[SolverState, SolverState], None] | None = None) -> Trajectory:
    """Integrate from ``t = 0`` and return snapshots at ``sample_times``.

    ``sample_times`` defaults to ``[case.T]``.  ``on_step(old, new)`` is called
    after every accepted step.  Solver failures propagate with the step index.
    """
    t_start = time.perf_counter()
    if not tau > 0:
        raise ConfigurationError(f"tau must be positive, got {tau}")
    if sample_times is None:
        sample_times = [case.T]
    ks = _step_indices(sample_times, tau, case.T)
    wanted = set(ks)
    modes = decompose_waves(case, grid)
    state = initial_state(case, grid, tau, cfg, modes)
    h = grid.h
    mass0 = _l2sq(h, state.E_prev)

    snaps = {}

    def take(k, E, F):
        E, F = E.copy(), F.copy()
        snaps[k] = Snapshot(k * tau, k, E, F, recover_N(E, F, modes, k * tau))

    if 0 in wanted:
        take(0, state.E_prev, state.F_prev)
    if 1 in wanted:
        take(1, state.E_curr, state.F_curr)
    k_end = max(ks) if ks else 0
    max_defect = 0.0
    iters = []
    stepper = state._stepper
    # with no observer the three time levels can share a ring of buffers
    spare = None if on_step is not None or not stepper.fused else (grid.zeros(complex), grid.zeros())
    while state.k < k_end:
        if spare is None:
            new = stepper.step(state)
        else:
            new = stepper._step_fused(state, spare)
            spare = (state.E_prev, state.F_prev)
        if on_step is not None:
            on_step(state, new)
        state = new
        iters.append(state.stats.iterations)
        max_defect = max(max_defect, state.stats.mass_defect)
        if state.k in wanted:
            take(state.k, state.E_curr, state.F_curr)
    return Trajectory(
        grid=grid,
        tau=float(tau),
        modes=modes,
        snapshots=[snaps[k] for k in sorted(wanted)],
        mass0=mass0,
        max_mass_defect=max_defect,
        max_iterations=max(iters) if iters else 0,
        iterations=iters,
        wall_time=time.perf_counter() - t_start,
    )


def stencil_residuals(old: SolverState, new: SolverState):
    """Max-norm residuals of both raw scheme equations for an accepted step.

    ``old`` is the state at step ``k`` and ``new`` at ``k + 1``; the potential
    is recomputed directly rather than through the stepping cache.
    """
    from .oscillatory import averaged_potential

    g = old.grid
    tau = old.tau
    eps = old.case.epsilon
    Em, Ek, Ep = old.E_prev, old.E_curr, new.E_curr
    Fm, Fk, Fp = old.F_prev, old.F_curr, new.F_curr
    H = averaged_potential(old.modes, old.t, tau)

    def dxx(u):
        return (u[2:] - 2 * u[1:-1] + u[:-2]) / g.h**2

    I = slice(1, -1)
    avg = 0.5 * (Ep + Em)
    lhs_E = 1j * (Ep[I] - Em[I]) / (2 * tau)
    rhs_E = -dxx(avg) + (-np.abs(Ek[I]) ** 2 + H[I] + 0.5 * (Fp[I] + Fm[I])) * avg[I]
    rho = [np.abs(v) ** 2 for v in (Em, Ek, Ep)]
    lhs_F = eps**2 * (Fp[I] - 2 * Fk[I] + Fm[I]) / tau**2
    rhs_F = 0.5 * dxx(Fp + Fm) + eps**2 * (rho[2][I] - 2 * rho[1][I] + rho[0][I]) / tau**2
    return float(np.max(np.abs(lhs_E - rhs_E))), float(np.max(np.abs(lhs_F - rhs_F)))
