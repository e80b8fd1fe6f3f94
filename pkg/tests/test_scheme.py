import numpy as np
import pytest

from zakfd.errors import BlowUp, ConfigurationError, StepFailure
from zakfd.grid import delta_x2, norm_h1_semi, norm_l2, solve_complex_tridiagonal
from zakfd.oscillatory import decompose_waves, evaluate_G, wave_modes
from zakfd.problem import Profile, ProfileSet, build_perturbed_density, make_case
from zakfd.scheme import (
    SolverState, StepConfig, Stepper, initial_state, recover_N, run, stencil_residuals, step,
)

SMALL = (-40.0, 40.0)


def small(name="case-II", eps=0.25, T=0.05, domain=SMALL):
    return make_case(name, eps, domain=domain, T=T)


def without_envelope(case):
    p = case.profiles
    return case.with_(profiles=ProfileSet(Profile.zero(), p.omega0, p.omega1))


def test_step_config_validation():
    with pytest.raises(ConfigurationError):
        StepConfig(fp_tol=0)
    with pytest.raises(ConfigurationError):
        StepConfig(fp_max_iter=0)


def test_zero_is_a_fixed_point_in_one_iteration():
    case = small()
    grid = case.grid(0.2)
    z = np.zeros(grid.M - 1)
    modes = wave_modes(grid, z, z, case.epsilon, 0.0, 0.0)
    state = SolverState(1, grid.zeros(complex), grid.zeros(complex), grid.zeros(), grid.zeros(),
                        1e-3, case, modes)
    for fused in (True, False):
        new = Stepper(case, modes, 1e-3, fused=fused).step(state)
        assert not np.any(new.E_curr) and not np.any(new.F_curr)
        assert new.stats.iterations == 1
        assert new.k == 2


@pytest.mark.parametrize("name,eps,tau", [("case-II", 0.25, 1e-3), ("case-I", 1.0, 1e-2),
                                          ("case-II", 1 / 64, 1e-2)])
def test_fused_and_reference_paths_agree(name, eps, tau):
    case = small(name, eps)
    grid = case.grid(0.1)
    a = initial_state(case, grid, tau)
    b = a
    ref = Stepper(case, a.modes, tau, fused=False)
    for _ in range(5):
        a = step(a)
        b = ref.step(b)
    np.testing.assert_allclose(a.E_curr, b.E_curr, atol=1e-13)
    np.testing.assert_allclose(a.F_curr, b.F_curr, atol=1e-13)


def test_stencil_residual_builtin_example():
    # full domain as in the production runs
    case = make_case("case-II", 0.25, T=0.02)
    grid = case.grid(0.1)
    worst = []
    run(case, grid, 1e-3, on_step=lambda old, new: worst.append(stencil_residuals(old, new)))
    assert max(max(w) for w in worst) <= 1e-9


def test_mass_parity_every_step():
    case = small("case-II", 1 / 16, T=0.2)
    defects = []
    traj = run(case, case.grid(0.1), 1e-3, on_step=lambda o, n: defects.append(n.stats.mass_defect))
    assert max(defects) <= 1e-10 * traj.mass0
    assert traj.relative_mass_defect <= 1e-10


def test_two_step_run_conserves_norm():
    case = small("case-I", 0.5)
    tau = 1e-3
    case = case.with_(T=2 * tau)
    grid = case.grid(0.1)
    traj = run(case, grid, tau, sample_times=[0.0, 2 * tau])
    assert len(traj.iterations) == 1
    n0, n2 = (norm_l2(grid, s.E) for s in traj.snapshots)
    assert n2 == pytest.approx(n0, rel=1e-10)


def test_zero_envelope_with_waves_stays_zero():
    case = without_envelope(small("case-II", 0.25, T=0.05))
    traj = run(case, case.grid(0.2), 1e-3, sample_times=[0.01, 0.03, 0.05])
    for s in traj.snapshots:
        assert not np.any(s.E) and not np.any(s.F)


def test_time_reversal_of_envelope_update():
    # with F and H frozen the update is i(E+ - E-)/(2 tau) = L (E+ + E-)/2, L real
    case = small("case-II", 0.25)
    grid = case.grid(0.1)
    rng = np.random.default_rng(5)
    c = grid.zeros()
    c[1:-1] = rng.standard_normal(grid.M - 1)
    tau = 1e-2
    lam = 1j / tau

    def forward(u):
        rhs = lam * u + (-delta_x2(grid, u) + c * u)
        return solve_complex_tridiagonal(grid, lam, c, rhs)

    u = grid.zeros(complex)
    u[1:-1] = rng.standard_normal(grid.M - 1) + 1j * rng.standard_normal(grid.M - 1)
    v = forward(u)
    back = np.conj(forward(np.conj(v)))
    assert np.max(np.abs(back - u)) <= 1e-9


# temporal sweep steps 0.1/2^m that do not exceed 1e-2
TABLE_TAUS = [0.1 / 2**m for m in (4, 5, 6, 7)]


@pytest.mark.parametrize("name", ["case-I", "case-II"])
@pytest.mark.parametrize("eps", [1.0, 0.25, 1 / 16, 1 / 64])
@pytest.mark.parametrize("tau", TABLE_TAUS + [1e-3])
def test_fixed_point_iteration_counts(name, eps, tau):
    case = small(name, eps, T=0.2)
    traj = run(case, case.grid(0.1), tau)
    assert traj.max_iterations <= 5


def test_iteration_count_regression_at_tau_one_hundredth():
    # the F update follows |E|^2 one to one, so the first two sweeps both move
    # by O(tau^2) and each later sweep gains a factor ~tau; at tau = 1e-2 the
    # 1e-12 tolerance is met on the sixth sweep
    counts = {}
    for name in ("case-I", "case-II"):
        for eps in (1.0, 1 / 64):
            case = small(name, eps, T=0.1)
            counts[name, eps] = run(case, case.grid(0.1), 1e-2).max_iterations
    assert counts == {("case-I", 1.0): 6, ("case-I", 1 / 64): 5,
                      ("case-II", 1.0): 6, ("case-II", 1 / 64): 5}


def test_step_failure_reports_index_and_time():
    case = small("case-II", 0.25)
    cfg = StepConfig(fp_tol=1e-16, fp_max_iter=1)
    state = initial_state(case, case.grid(0.1), 1e-2, cfg)
    for fused in (True, False):
        with pytest.raises(StepFailure) as info:
            Stepper(case, state.modes, 1e-2, cfg, fused=fused).step(state)
        assert info.value.k == 1
        assert info.value.t == pytest.approx(1e-2)


def test_non_finite_data_is_a_blow_up():
    case = small("case-II", 0.25)
    state = initial_state(case, case.grid(0.1), 1e-2)
    state.E_curr[100] = np.nan
    for fused in (True, False):
        with pytest.raises(BlowUp):
            Stepper(case, state.modes, 1e-2, fused=fused).step(state)


def test_sample_time_validation():
    case = small(T=0.05)
    grid = case.grid(0.2)
    with pytest.raises(ConfigurationError):
        run(case, grid, 1e-2, sample_times=[0.2])
    with pytest.raises(ConfigurationError):
        run(case, grid, 0.0)


def test_runs_are_deterministic():
    case = small("case-I", 1 / 16, T=0.05)
    grid = case.grid(0.1)
    a = run(case, grid, 1e-3).final
    b = run(case, grid, 1e-3).final
    assert np.array_equal(a.E, b.E) and np.array_equal(a.F, b.F)


def test_recover_N_examples():
    case = small("case-I", 0.5)
    grid = case.grid(0.1)
    modes = decompose_waves(case, grid)
    w0 = grid.sample(case.profiles.omega0)
    N = recover_N(grid.zeros(complex), grid.zeros(), modes, 0.0)
    np.testing.assert_allclose(N, 0.5 * w0, atol=1e-12)

    traj = run(case.with_(T=0.01), grid, 1e-3, sample_times=[0.0])
    N0, _ = build_perturbed_density(case, grid)
    np.testing.assert_allclose(traj.snapshots[0].N, N0, atol=1e-12)

    rng = np.random.default_rng(2)
    E = grid.sample(lambda x: rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size))
    F1, F2 = (grid.sample(lambda x: rng.standard_normal(x.size)) for _ in range(2))
    diff = recover_N(E, F1 + F2, modes, 0.3) - recover_N(E, F1, modes, 0.3)
    np.testing.assert_allclose(diff, F2, atol=1e-12)
    G = evaluate_G(modes, 0.3 / case.epsilon)
    np.testing.assert_allclose(recover_N(E, F1, modes, 0.3), -np.abs(E) ** 2 + F1 + G, atol=1e-14)


def test_temporal_self_convergence_case_one():
    case = make_case("case-I", 1.0, T=1.0)
    grid = case.grid(0.1)
    tau = 1e-3
    ref = run(case, grid, tau / 8).final.E
    errs = []
    for t in (tau, tau / 2):
        d = run(case, grid, t).final.E - ref
        errs.append(norm_l2(grid, d) + norm_h1_semi(grid, d))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)
