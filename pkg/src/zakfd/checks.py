"""Quick invariant suite, runnable from the command line in well under a
minute.  Each check returns ``(name, passed, detail)``."""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad_vec

from .grid import dst_forward, dst_inverse
from .limit import soliton_benchmark
from .oscillatory import averaged_potential, decompose_waves, evaluate_G
from .problem import make_case
from .scheme import StepConfig, run, stencil_residuals


def check_dst_roundtrip(seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(63)
    err = np.max(np.abs(dst_inverse(dst_forward(v)) - v))
    return "sine transform roundtrip", err < 1e-12, f"max error {err:.2e}"


def check_averaged_potential(seed=0, samples=5):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        eps = float(rng.choice([1.0, 0.25, 1 / 16]))
        case = make_case(str(rng.choice(["case-I", "case-II"])), eps, domain=(-20.0, 20.0))
        grid = case.grid(0.25)
        modes = decompose_waves(case, grid)
        tau = float(rng.uniform(1e-3, 0.1))
        t = float(rng.uniform(tau, 1.0))
        ref, _ = quad_vec(lambda s: evaluate_G(modes, s / eps), t - tau, t + tau,
                          epsabs=1e-13, epsrel=1e-13, limit=2000)
        worst = max(worst, np.max(np.abs(averaged_potential(modes, t, tau) - ref / (2 * tau))))
    return "averaged potential vs quadrature", worst <= 1e-10, f"max error {worst:.2e}"


def check_step_invariants(seed=0):
    case = make_case("case-II", 0.25, domain=(-40.0, 40.0), T=0.05)
    grid = case.grid(0.1)
    tau = 1e-3
    worst = [0.0, 0.0]
    found = []

    def observe(old, new):
        rE, rF = stencil_residuals(old, new)
        worst[0] = max(worst[0], rE)
        worst[1] = max(worst[1], rF)
        found.append(new.stats.iterations)

    traj = run(case, grid, tau, StepConfig(), on_step=observe)
    rel = traj.relative_mass_defect
    ok = rel <= 1e-10 and max(worst) <= 1e-9 and max(found) <= 5
    detail = (f"mass defect {rel:.1e}, stencil residuals {worst[0]:.1e}/{worst[1]:.1e}, "
              f"max iterations {max(found)}")
    return "step invariants", ok, detail


def check_zero_fixed_point():
    case = make_case("case-I", 0.5, domain=(-20.0, 20.0), T=0.01)
    from .problem import Profile, ProfileSet

    p = case.profiles
    case = case.with_(profiles=ProfileSet(Profile.zero(), p.omega0, p.omega1))
    traj = run(case, case.grid(0.2), 1e-3)
    s = traj.final
    ok = not np.any(s.E) and not np.any(s.F)
    return "zero envelope stays zero", ok, "E and F identically zero" if ok else "nonzero fields"


def check_soliton():
    r = soliton_benchmark()
    ok = r["l2_error"] <= 1e-4
    return "splitting soliton benchmark", ok, f"L2 error {r['l2_error']:.2e}"


CHECKS = (
    check_dst_roundtrip,
    check_averaged_potential,
    check_step_invariants,
    check_zero_fixed_point,
    check_soliton,
)


def run_checks():
    return [c() for c in CHECKS]
