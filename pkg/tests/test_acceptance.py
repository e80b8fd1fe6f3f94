"""Acceptance suite.

Every criterion prints a single ``PASS criterion N: ...`` or
``FAIL criterion N: ...`` line and repeats it in the terminal summary.  The
convergence sweeps take roughly half an hour on one core; deselect them with
``-m "not slow"``.

    python3 -m pytest tests/test_acceptance.py -v
"""

import math
import os

import numpy as np
import pytest
from scipy.integrate import quad_vec

from zakfd.harness import SweepSpec, limit_consistency_check, run_sweep
from zakfd.limit import soliton_benchmark
from zakfd.oscillatory import averaged_potential, decompose_waves, evaluate_G
from zakfd.problem import make_case
from zakfd.scheme import StepConfig, run, stencil_residuals

WORKERS = os.cpu_count() or 1
FULL = (-200.0, 200.0)

ORDER_BAND = (1.7, 2.2)
RES_I_BAND = (1.1, 1.6)
RES_II_BAND = (0.9, 1.5)
RES_II_SLACK = 0.15
LIMIT_BAND = (2.5, 6.0)
SPOT_FACTOR = 2.0
SPOT_SPATIAL = 2.83e-2
SPOT_TEMPORAL = 1.19e-1
MASS_TOL = 1e-10
H_TOL = 1e-10
STENCIL_TOL = 1e-9
SOLITON_TOL = 1e-4


def fmt(values):
    return ", ".join("-" if v is None else f"{v:.3f}" for v in values)


def inside(v, band):
    return v is not None and math.isfinite(v) and band[0] <= v <= band[1]


# --- sweeps shared by several criteria ------------------------------------------


@pytest.fixture(scope="module")
def spatial():
    spec = SweepSpec(kind="spatial", case="case-II", epsilon_list=(1.0, 1 / 4, 1 / 16, 1 / 64),
                     h_list=(0.2, 0.1, 0.05, 0.025), tau_fixed=1e-4, T=1.0, domain=FULL)
    return run_sweep(spec, workers=WORKERS, check_reference=True)


@pytest.fixture(scope="module")
def temporal():
    spec = SweepSpec(kind="temporal", case="case-II", epsilon_list=(1.0, 1 / 4, 1 / 16),
                     tau_list=tuple(0.1 / 2**m for m in range(8)), h_fixed=0.0125, T=1.0,
                     domain=FULL)
    return run_sweep(spec, workers=WORKERS, check_reference=True)


@pytest.fixture(scope="module")
def resonance_one():
    spec = SweepSpec(kind="resonance-I", case="case-I", eps0=1 / 2, tau0=0.1, n_links=2,
                     h_fixed=0.0125, T=1.0, domain=FULL)
    return run_sweep(spec, workers=WORKERS, check_reference=True)


@pytest.fixture(scope="module")
def resonance_two():
    spec = SweepSpec(kind="resonance-II", case="case-II", eps0=1 / 8, tau0=0.1 / 8, n_links=3,
                     h_fixed=0.0125, T=1.0, domain=FULL)
    return run_sweep(spec, workers=WORKERS, check_reference=True)


def last_two_orders(records, eps):
    rows = [r for r in records if r.epsilon == eps]
    return [(r.order_e, r.order_n) for r in rows[-2:]]


def reference_note(result):
    chk = result.reference_check
    return f"reference change {chk['max_relative_change']:.3f} with {chk['doubled']}"


# --- criteria ---------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_1_spatial_second_order(spatial, report):
    parts, ok = [], spatial.passed_reference_check
    ok &= all(r.ok for r in spatial.records)
    for eps in spatial.spec.epsilon_list:
        pairs = last_two_orders(spatial.records, eps)
        ok &= all(inside(o, ORDER_BAND) for pair in pairs for o in pair)
        parts.append(f"eps={eps:g} e[{fmt(p[0] for p in pairs)}] n[{fmt(p[1] for p in pairs)}]")
    assert report(1, ok, "spatial orders " + "; ".join(parts) + f"; {reference_note(spatial)}")


@pytest.mark.slow
def test_criterion_2_temporal_second_order(temporal, report):
    parts, ok = [], temporal.passed_reference_check
    ok &= all(r.ok for r in temporal.records)
    for eps in temporal.spec.epsilon_list:
        pairs = last_two_orders(temporal.records, eps)
        ok &= all(inside(o, ORDER_BAND) for pair in pairs for o in pair)
        parts.append(f"eps={eps:g} e[{fmt(p[0] for p in pairs)}] n[{fmt(p[1] for p in pairs)}]")
    assert report(2, ok, "temporal orders " + "; ".join(parts) + f"; {reference_note(temporal)}")


@pytest.mark.slow
def test_criterion_3_resonance_case_one(resonance_one, report):
    orders = [r.order_n for r in resonance_one.records[1:]]
    ok = resonance_one.passed_reference_check and all(inside(o, RES_I_BAND) for o in orders)
    assert report(3, ok, f"Case I resonance n orders [{fmt(orders)}] in {RES_I_BAND}; "
                         f"{reference_note(resonance_one)}")


@pytest.mark.slow
def test_criterion_4_resonance_case_two(resonance_two, report):
    orders = [r.order_n for r in resonance_two.records[1:]]
    ok = resonance_two.passed_reference_check and all(inside(o, RES_II_BAND) for o in orders)
    ok &= all(b <= a + RES_II_SLACK for a, b in zip(orders, orders[1:]))
    assert report(4, ok, f"Case II resonance n orders [{fmt(orders)}] in {RES_II_BAND}, "
                         f"non-increasing within {RES_II_SLACK}; {reference_note(resonance_two)}")


@pytest.mark.slow
def test_criterion_5_spot_magnitudes(spatial, temporal, report):
    e_h = next(r.e_err for r in spatial.records if r.epsilon == 1.0 and r.h == 0.2)
    e_t = next(r.e_err for r in temporal.records if r.epsilon == 1.0 and r.tau == 0.1)
    ok = all(ref / SPOT_FACTOR <= val <= ref * SPOT_FACTOR
             for val, ref in ((e_h, SPOT_SPATIAL), (e_t, SPOT_TEMPORAL)))
    assert report(5, ok, f"e(h=0.2) = {e_h:.3e} vs {SPOT_SPATIAL:.2e}, "
                         f"e(tau=0.1) = {e_t:.3e} vs {SPOT_TEMPORAL:.2e}, factor {SPOT_FACTOR:g}")


@pytest.mark.slow
def test_criterion_6_mass_parity(spatial, temporal, resonance_one, resonance_two, report):
    records = [r for res in (spatial, temporal, resonance_one, resonance_two) for r in res.records]
    worst = max(r.mass_defect for r in records)
    ok = all(r.ok for r in records) and worst <= MASS_TOL
    assert report(6, ok, f"largest relative mass-parity defect {worst:.2e} over "
                         f"{len(records)} runs (tolerance {MASS_TOL:g})")


def test_criterion_7_averaged_potential_oracle(report):
    rng = np.random.default_rng(20240607)
    worst = 0.0
    for _ in range(20):
        eps = float(rng.choice([1.0, 1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32, 1 / 64]))
        name = str(rng.choice(["case-I", "case-II"]))
        case = make_case(name, eps, domain=(-40.0, 40.0))
        modes = decompose_waves(case, case.grid(0.2))
        tau = float(rng.choice([0.1 / 2**m for m in range(8)]))
        k = int(rng.integers(1, int(round(1.0 / tau))))
        t = k * tau
        ref, _ = quad_vec(lambda s: evaluate_G(modes, s / eps), t - tau, t + tau,
                          epsabs=1e-13, epsrel=1e-13, limit=5000)
        err = np.max(np.abs(averaged_potential(modes, t, tau) - ref / (2 * tau)))
        worst = max(worst, float(err))
    ok = worst <= H_TOL
    assert report(7, ok, f"averaged potential vs adaptive quadrature, 20 samples, "
                         f"max error {worst:.2e} (tolerance {H_TOL:g})")


STENCIL_CONFIGS = [(name, eps, tau) for name in ("case-I", "case-II")
                   for eps in (1.0, 1 / 4, 1 / 16, 1 / 64) for tau in (1e-2, 1e-3)]


def test_criterion_8_stencil_residual_oracle(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for name, eps, tau in STENCIL_CONFIGS:
        case = make_case(name, eps, domain=FULL, T=1.0)
        steps = int(round(case.T / tau))
        chosen = set(rng.choice(np.arange(1, steps), size=10, replace=False).tolist())
        seen = []

        def observe(old, new):
            if old.k in chosen:
                seen.append(max(stencil_residuals(old, new)))

        run(case, case.grid(0.1), tau, StepConfig(), on_step=observe)
        assert len(seen) == 10
        worst = max(worst, max(seen))
    ok = worst <= STENCIL_TOL
    assert report(8, ok, f"{len(STENCIL_CONFIGS)} configurations x 10 random steps, "
                         f"max residual {worst:.2e} (tolerance {STENCIL_TOL:g})")


@pytest.mark.slow
def test_criterion_9_limit_consistency(report):
    rows = limit_consistency_check("case-I", [1 / 4, 1 / 8, 1 / 16], h=0.0125, tau=1e-3, T=1.0,
                                   domain=FULL)
    ratios = [r.ratio for r in rows[1:]]
    ok = all(r is not None and LIMIT_BAND[0] <= r <= LIMIT_BAND[1] for r in ratios)
    diffs = ", ".join(f"{r.difference:.3e}" for r in rows)
    assert report(9, ok, f"Case I distance to the limit [{diffs}], ratios [{fmt(ratios)}] "
                         f"in {LIMIT_BAND}")


def test_criterion_10_soliton_benchmark(report):
    r = soliton_benchmark(a=1.0, M=1024, dt=1e-3, T=1.0, domain=(-32.0, 32.0))
    ok = r["l2_error"] <= SOLITON_TOL
    assert report(10, ok, f"splitting solver L2 error {r['l2_error']:.2e} "
                          f"(tolerance {SOLITON_TOL:g})")
