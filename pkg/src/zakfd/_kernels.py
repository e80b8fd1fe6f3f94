"""Fused per-step kernel for the Zakharov scheme.

Works on interior arrays only (length ``M - 1``).  The F operator is passed
prefactored; the E operator changes every Picard iteration and is eliminated
in place.  All scratch space is preallocated by the caller and recurrences
carry their previous value in a local, which matters more than flop count
on the sizes used here.  Tiny values are flushed as in ``grid``.
"""

import numpy as np
from numba import njit

from .grid import FLUSH


def workspace(n):
    """Scratch arrays for :func:`picard_step` on ``n`` interior nodes."""
    return (
        np.empty(n),  # F_base
        np.empty(n),  # rho_base
        np.empty(n),  # pot_base
        np.empty(n, dtype=np.complex128),  # rhs_base
        np.empty(n, dtype=np.complex128),  # E_star
        np.empty(n),  # F_old
        np.empty(n, dtype=np.complex128),  # cp
    )


@njit(cache=True)
def _solve_F(F_base, rho_base, E, sigma, hcp, hinv, hoff, out):
    n = out.size
    prev = 0.0
    for j in range(n):
        e = E[j]
        r = F_base[j] + sigma * (e.real * e.real + e.imag * e.imag + rho_base[j])
        v = (r - hoff * prev) * hinv[j]
        if abs(v) < FLUSH:
            v = 0.0
        out[j] = v
        prev = v
    nxt = out[n - 1]
    for j in range(n - 2, -1, -1):
        v = out[j] - hcp[j] * nxt
        if abs(v) < FLUSH:
            v = 0.0
        out[j] = v
        nxt = v


@njit(cache=True)
def picard_step(Em, Ek, Fm, Fk, H, Fm_lo, Fm_hi, Em_lo, Em_hi,
                sigma, tau, h, hcp, hinv, hoff, tol, max_iter,
                work, E_new, F_new):
    """One accepted step of the coupled scheme, written into ``E_new, F_new``.

    ``*_lo``/``*_hi`` are the boundary neighbours of ``Em``/``Fm`` (zero for
    X_M data).  Returns ``(iterations, residual, status)`` with status
    0 = converged, 1 = iteration cap, 2 = pivot breakdown, 3 = non-finite.
    """
    F_base, rho_base, pot_base, rhs_base, E_star, F_old, cp = work
    n = Ek.size
    inv_h2 = 1.0 / (h * h)
    itau = 1.0 / tau

    nE = 0.0
    nF = 0.0
    for j in range(n):
        left = Fm[j - 1] if j > 0 else Fm_lo
        right = Fm[j + 1] if j < n - 1 else Fm_hi
        F_base[j] = sigma * (2.0 * Fk[j] - Fm[j]) + 0.5 * (right - 2.0 * Fm[j] + left) * inv_h2
        ek = Ek[j]
        em = Em[j]
        rk = ek.real * ek.real + ek.imag * ek.imag
        rho_base[j] = em.real * em.real + em.imag * em.imag - 2.0 * rk
        pot_base[j] = H[j] - rk + 0.5 * Fm[j]
        eleft = Em[j - 1] if j > 0 else Em_lo
        eright = Em[j + 1] if j < n - 1 else Em_hi
        rhs_base[j] = 1j * itau * em - (eright - 2.0 * em + eleft) * inv_h2
        E_star[j] = 2.0 * ek - em
        F_old[j] = 2.0 * Fk[j] - Fm[j]
        nE += rk
        nF += Fk[j] * Fk[j]
    scale = np.sqrt(h * nE) + np.sqrt(h * nF) + tol

    residual = np.inf
    it = 0
    status = 1
    diag0 = 1j * itau - 2.0 * inv_h2
    while it < max_iter:
        it += 1
        _solve_F(F_base, rho_base, E_star, sigma, hcp, hinv, hoff, F_new)
        # E solve: (i/tau + dxx - c) E = rhs_base + c Em
        prev_cp = 0.0 + 0.0j
        prev_x = 0.0 + 0.0j
        for j in range(n):
            c = pot_base[j] + 0.5 * F_new[j]
            d = diag0 - c - inv_h2 * prev_cp
            r = rhs_base[j] + c * Em[j] - inv_h2 * prev_x
            m2 = d.real * d.real + d.imag * d.imag
            if m2 < 1e-300:
                return it, residual, 2
            inv = d.conjugate() / m2
            prev_cp = inv_h2 * inv
            cp[j] = prev_cp
            v = r * inv
            if abs(v.real) + abs(v.imag) < FLUSH:
                v = 0.0
            E_new[j] = v
            prev_x = v
        dE = 0.0
        dF = 0.0
        nxt = 0.0 + 0.0j
        for j in range(n - 1, -1, -1):
            v = E_new[j] - cp[j] * nxt
            if abs(v.real) + abs(v.imag) < FLUSH:
                v = 0.0
            E_new[j] = v
            nxt = v
            diff = v - E_star[j]
            dE += diff.real * diff.real + diff.imag * diff.imag
            fd = F_new[j] - F_old[j]
            dF += fd * fd
            E_star[j] = v
            F_old[j] = F_new[j]
        residual = np.sqrt(h * dE) + np.sqrt(h * dF)
        if not np.isfinite(residual):
            return it, residual, 3
        if residual <= tol * scale:
            status = 0
            break

    # close the F equation on the accepted E
    _solve_F(F_base, rho_base, E_new, sigma, hcp, hinv, hoff, F_new)
    return it, residual, status
