"""Convergence studies: reference runs, error functions, refinement sweeps,
observed orders, the limit-equation cross-check, and CSV/table output.

Errors are measured against a finer run of the same scheme (self-reference).
Coarse grids must be node subsets of the reference grid, so comparison is by
restriction, never by interpolation.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, SolverFailure
from .grid import Grid1D, norm_h1_semi, norm_l2
from .limit import solve_nlse_op
from .problem import PhysicalCase, make_case
from .scheme import StepConfig, run

KINDS = ("spatial", "temporal", "resonance-I", "resonance-II")

CSV_COLUMNS = (
    "kind", "case", "epsilon", "h", "tau", "T", "e_err", "n_err",
    "order_e", "order_n", "ref_descriptor", "wall_time", "status",
)


@dataclass(frozen=True)
class ReferencePolicy:
    """How much finer the reference run is than the finest sweep member.

    The reference time step is additionally halved until it is at most
    ``eps / eps_resolution``.
    """

    r_h: int = 4
    r_tau: int = 4
    eps_resolution: float = 20.0

    def __post_init__(self):
        for r in (self.r_h, self.r_tau):
            if int(r) != r or r < 1:
                raise ConfigurationError(f"refinement factors must be positive integers, got {r}")

    def describe(self):
        return f"self-reference r_h={self.r_h} r_tau={self.r_tau}"


def default_policy(kind: str) -> ReferencePolicy:
    """Refine only the swept parameter so the other error component cancels."""
    if kind == "spatial":
        return ReferencePolicy(r_h=4, r_tau=1)
    if kind == "temporal":
        return ReferencePolicy(r_h=1, r_tau=4)
    return ReferencePolicy(r_h=1, r_tau=16)


@dataclass
class Reference:
    grid: Grid1D
    tau: float
    E: np.ndarray
    F: np.ndarray
    N: np.ndarray
    descriptor: str
    wall_time: float


def reference_solution(case: PhysicalCase, h: float, tau: float,
                       policy: ReferencePolicy = ReferencePolicy(),
                       cfg: StepConfig = StepConfig()) -> Reference:
    """Fine run at ``(h / r_h, tau / r_tau)`` up to ``case.T``."""
    h_ref = h / policy.r_h
    tau_ref = tau / policy.r_tau
    while tau_ref > case.epsilon / policy.eps_resolution * (1 + 1e-12):
        tau_ref /= 2
    grid = case.grid(h_ref)
    traj = run(case, grid, tau_ref, cfg)
    snap = traj.final
    desc = f"fd h={h_ref:.6g} tau={tau_ref:.6g}"
    return Reference(grid, tau_ref, snap.E, snap.F, snap.N, desc, traj.wall_time)


def restriction_factor(fine: Grid1D, coarse: Grid1D) -> int:
    """``r`` such that coarse node ``j`` is fine node ``r j``."""
    if not (math.isclose(fine.a, coarse.a) and math.isclose(fine.b, coarse.b)):
        raise ConfigurationError("reference and coarse grids cover different domains")
    r, rem = divmod(fine.M, coarse.M)
    if rem or r < 1:
        raise ConfigurationError(
            f"coarse grid (M={coarse.M}) nodes are not a subset of the reference (M={fine.M})"
        )
    return r


def error_norms(grid: Grid1D, E_ref, N_ref, E, N):
    """``(e, n)`` with ``e = ||dE|| + ||dx+ dE||`` and ``n = ||dN||``."""
    e = np.asarray(E_ref) - np.asarray(E)
    return (
        norm_l2(grid, e) + norm_h1_semi(grid, e),
        norm_l2(grid, np.asarray(N_ref) - np.asarray(N)),
    )


def compare(ref: Reference, grid: Grid1D, E, N):
    r = restriction_factor(ref.grid, grid)
    return error_norms(grid, ref.E[::r], ref.N[::r], E, N)


@dataclass
class ErrorRecord:
    kind: str
    case: str
    epsilon: float
    h: float
    tau: float
    T: float
    e_err: float
    n_err: float
    ref_descriptor: str
    wall_time: float
    order_e: Optional[float] = None
    order_n: Optional[float] = None
    status: str = "ok"
    mass_defect: float = 0.0  # largest |  ||E^{k+1}||^2 - ||E^{k-1}||^2 | / ||E^0||^2
    max_iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class SweepSpec:
    """One refinement study.

    ``spatial``: every ``h`` in ``h_list`` at ``tau_fixed``.
    ``temporal``: every ``tau`` in ``tau_list`` at ``h_fixed``.
    ``resonance-I``: ``(eps0 / 4^m, tau0 / 8^m)``, i.e. ``tau ~ eps^{3/2}``.
    ``resonance-II``: ``(eps0 / 2^m, tau0 / 2^m)``, i.e. ``tau ~ eps``.
    Resonance kinds use ``h_fixed`` and ``n_links + 1`` points.
    """

    kind: str
    case: str = "case-II"
    epsilon_list: Sequence[float] = (1.0,)
    h_list: Sequence[float] = ()
    tau_list: Sequence[float] = ()
    h_fixed: float = 2.5e-3
    tau_fixed: float = 1e-4
    eps0: float = 0.5
    tau0: float = 0.1
    n_links: int = 2
    T: float = 1.0
    domain: tuple = (-200.0, 200.0)
    policy: Optional[ReferencePolicy] = None
    fp_tol: float = 1e-12

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown sweep kind {self.kind!r}; choose from {KINDS}")
        if self.kind == "spatial":
            _check_halving(self.h_list, "h_list")
        elif self.kind == "temporal":
            _check_halving(self.tau_list, "tau_list")
        elif self.n_links < 0:
            raise ConfigurationError("n_links must be nonnegative")

    @property
    def reference_policy(self) -> ReferencePolicy:
        return self.policy or default_policy(self.kind)

    def physical_case(self, epsilon) -> PhysicalCase:
        return make_case(self.case, epsilon, domain=self.domain, T=self.T)

    def chain(self):
        """``(epsilon, tau)`` points of a resonance sweep."""
        q = 8 if self.kind == "resonance-I" else 2
        p = 4 if self.kind == "resonance-I" else 2
        return [(self.eps0 / p**m, self.tau0 / q**m) for m in range(self.n_links + 1)]


def _check_halving(seq, name):
    if not seq:
        raise ConfigurationError(f"{name} is empty")
    for a, b in zip(seq, seq[1:]):
        if not math.isclose(a / b, 2.0, rel_tol=1e-9):
            raise ConfigurationError(f"{name} must halve at every entry, got {list(seq)}")


def _cell(spec, case, h, tau, ref, cfg):
    t0 = time.perf_counter()
    try:
        grid = case.grid(h)
        traj = run(case, grid, tau, cfg)
        snap = traj.final
        e, n = compare(ref, grid, snap.E, snap.N)
        status = "ok"
        defect = traj.relative_mass_defect
        iters = traj.max_iterations
    except (SolverFailure, ConfigurationError) as exc:
        e = n = float("nan")
        status = f"failed: {exc}"
        defect, iters = float("nan"), 0
    return ErrorRecord(
        kind=spec.kind, case=spec.case, epsilon=case.epsilon, h=h, tau=tau,
        T=case.T, e_err=e, n_err=n, ref_descriptor=ref.descriptor,
        wall_time=time.perf_counter() - t0, status=status,
        mass_defect=defect, max_iterations=iters,
    )


def _failed_group(spec, case, cells, exc):
    return [
        ErrorRecord(
            kind=spec.kind, case=spec.case, epsilon=case.epsilon, h=h, tau=tau,
            T=case.T, e_err=float("nan"), n_err=float("nan"),
            ref_descriptor="reference failed", wall_time=0.0, status=f"failed: {exc}",
        )
        for h, tau in cells
    ]


def _run_group(spec: SweepSpec, epsilon: float, cells, ref_h, ref_tau, policy):
    """Reference plus every ``(h, tau)`` cell for one epsilon."""
    case = spec.physical_case(epsilon)
    cfg = StepConfig(fp_tol=spec.fp_tol)
    try:
        ref = reference_solution(case, ref_h, ref_tau, policy, cfg)
    except (SolverFailure, ConfigurationError) as exc:
        return _failed_group(spec, case, cells, exc)
    return [_cell(spec, case, h, tau, ref, cfg) for h, tau in cells]


def _groups(spec: SweepSpec, policy: ReferencePolicy):
    if spec.kind == "spatial":
        cells = [(h, spec.tau_fixed) for h in spec.h_list]
        return [(eps, cells, min(spec.h_list), spec.tau_fixed) for eps in spec.epsilon_list]
    if spec.kind == "temporal":
        cells = [(spec.h_fixed, tau) for tau in spec.tau_list]
        return [(eps, cells, spec.h_fixed, min(spec.tau_list)) for eps in spec.epsilon_list]
    return [(eps, [(spec.h_fixed, tau)], spec.h_fixed, tau) for eps, tau in spec.chain()]


def _order(prev, cur, p_prev, p_cur):
    if not (prev > 0 and cur > 0) or not (np.isfinite(prev) and np.isfinite(cur)):
        return None
    return math.log(prev / cur) / math.log(p_prev / p_cur)


def assign_orders(spec: SweepSpec, records):
    """Observed orders between neighbouring refinements, in place."""
    if spec.kind in ("spatial", "temporal"):
        param = (lambda r: r.h) if spec.kind == "spatial" else (lambda r: r.tau)
        by_eps = {}
        for r in records:
            by_eps.setdefault(r.epsilon, []).append(r)
        chains = by_eps.values()
    else:
        param = lambda r: r.tau
        chains = [records]
    for chain in chains:
        for a, b in zip(chain, chain[1:]):
            b.order_e = _order(a.e_err, b.e_err, param(a), param(b))
            b.order_n = _order(a.n_err, b.n_err, param(a), param(b))
    return records


def _sort_key(spec):
    if spec.kind in ("spatial", "temporal"):
        return lambda r: (-r.epsilon, -r.h, -r.tau)
    return None


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list
    reference_check: Optional[dict] = None

    @property
    def passed_reference_check(self) -> bool:
        return self.reference_check is None or self.reference_check["passed"]


def _execute(spec, groups, policy, workers):
    if workers <= 1 or len(groups) <= 1:
        return [_run_group(spec, *g, policy) for g in groups]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_group, spec, *g, policy) for g in groups]
        return [f.result() for f in futures]


def run_sweep(spec: SweepSpec, workers: int = 1, check_reference: bool = False) -> SweepResult:
    """Every cell of ``spec`` with errors and observed orders.

    Cells that fail are kept with ``status`` describing the failure.  Output
    order is by epsilon (descending), then ``h``, then ``tau``, whatever the
    worker count.  With ``check_reference`` the first epsilon group is rerun
    against a reference refined twice as far and the outcome is attached.
    """
    policy = spec.reference_policy
    groups = _groups(spec, policy)
    results = _execute(spec, groups, policy, workers)
    check = reference_stability_check(spec, base=results[0]) if check_reference else None
    records = [r for grp in results for r in grp]
    key = _sort_key(spec)
    if key is not None:
        records.sort(key=key)
    assign_orders(spec, records)
    return SweepResult(spec, records, check)


def doubled_policy(spec: SweepSpec) -> ReferencePolicy:
    p = spec.reference_policy
    if spec.kind == "spatial":
        return replace(p, r_h=2 * p.r_h)
    return replace(p, r_tau=2 * p.r_tau)


def reference_stability_check(spec: SweepSpec, tolerance: float = 0.10, base=None) -> dict:
    """Rerun the first epsilon group with the reference refined twice as far.

    Passes when no ``e_err`` changes by ``tolerance`` (relative) or more.
    ``base`` may carry the records already computed with the normal policy.
    """
    policy = spec.reference_policy
    first = _groups(spec, policy)[0]
    if base is None:
        base = _run_group(spec, *first, policy)
    finer = _run_group(spec, *first, doubled_policy(spec))
    changes = []
    for a, b in zip(base, finer):
        if a.ok and b.ok and b.e_err > 0:
            changes.append(abs(a.e_err - b.e_err) / b.e_err)
        else:
            changes.append(float("inf"))
    worst = max(changes) if changes else float("inf")
    return {
        "epsilon": first[0],
        "policy": policy.describe(),
        "doubled": doubled_policy(spec).describe(),
        "relative_changes": changes,
        "max_relative_change": worst,
        "tolerance": tolerance,
        "passed": worst < tolerance,
    }


# ----------------------------------------------------------------------------
# limit-equation cross-check


@dataclass
class LimitRow:
    epsilon: float
    difference: float
    ratio: Optional[float]


def limit_consistency_check(case_name: str, epsilon_list: Sequence[float], h: float = 0.0125,
                            tau: float = 1e-3, dt: float = 1e-3, T: float = 1.0,
                            domain=(-200.0, 200.0), cfg: StepConfig = StepConfig()):
    """``||E^eps - E~^eps||`` (L2 plus discrete H1 seminorm) at ``T`` for a
    halving chain of epsilons, with successive ratios.

    ``E^eps`` comes from the finite difference scheme, ``E~^eps`` from the
    splitting solver of the NLS equation with oscillatory potential, both on
    the same grid.
    """
    eps = list(epsilon_list)
    if not eps:
        raise ConfigurationError("empty epsilon list")
    if any(e > 0.25 for e in eps):
        raise ConfigurationError("limit check needs every epsilon <= 1/4")
    _check_halving(eps, "epsilon_list")
    rows = []
    prev = None
    for e in eps:
        case = make_case(case_name, e, domain=domain, T=T)
        grid = case.grid(h)
        fd = run(case, grid, tau, cfg).final.E
        split_dt = min(dt, e / 10)
        nl = solve_nlse_op(case, grid, split_dt, T).snapshots[-1]
        diff = norm_l2(grid, fd - nl) + norm_h1_semi(grid, fd - nl)
        rows.append(LimitRow(e, diff, prev / diff if prev is not None and diff > 0 else None))
        prev = diff
    return rows


# ----------------------------------------------------------------------------
# output


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.6g}"
    return str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def emit_csv(records, path) -> str:
    """Write ``records`` as UTF-8 CSV with LF endings; returns the path."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    text = records_to_csv(records)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return os.fspath(path)


def _parse(col, s):
    if col in ("kind", "case", "ref_descriptor", "status"):
        return s
    if s == "-":
        return None
    return float(s)


def read_csv(path):
    """Records back from :func:`emit_csv` output, as dictionaries."""
    with open(path, encoding="utf-8", newline="") as fh:
        return [{c: _parse(c, row[c]) for c in CSV_COLUMNS} for row in csv.DictReader(fh)]


def _eps_label(e):
    inv = 1.0 / e
    if abs(inv - round(inv)) < 1e-9 and round(inv) > 1:
        return f"eps=1/{round(inv)}"
    return f"eps={e:g}"


def _sci(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "-"
    return f"{v:.2E}"


def _rate(v):
    return "-" if v is None else f"{v:.2f}"


def emit_table(records, kind: Optional[str] = None) -> str:
    """Convergence tables as text: one error line per epsilon with a ``rate``
    line beneath it, first for ``e`` and then for ``n``."""
    records = list(records)
    if not records:
        raise ValueError("no records to format")
    kind = kind or records[0].kind
    out = []
    if kind in ("spatial", "temporal"):
        param = "h" if kind == "spatial" else "tau"
        groups = {}
        for r in records:
            groups.setdefault(r.epsilon, []).append(r)
        for label, err, order in (("e^eps(T)", "e_err", "order_e"), ("n^eps(T)", "n_err", "order_n")):
            first = next(iter(groups.values()))
            head = [label] + [f"{param}={getattr(r, param):.4g}" for r in first]
            out.append(head)
            for eps, rows in groups.items():
                out.append([_eps_label(eps)] + [_sci(getattr(r, err)) for r in rows])
                out.append(["rate"] + [_rate(getattr(r, order)) for r in rows])
            out.append(None)
    else:
        head = [kind] + [f"{_eps_label(r.epsilon)},tau={r.tau:.4g}" for r in records]
        out.append(head)
        out.append(["e^eps(T)"] + [_sci(r.e_err) for r in records])
        out.append(["rate"] + [_rate(r.order_e) for r in records])
        out.append(["n^eps(T)"] + [_sci(r.n_err) for r in records])
        out.append(["rate"] + [_rate(r.order_n) for r in records])
    rows = [r for r in out if r is not None]
    width = max(len(c) for r in rows for c in r) + 2
    lines = []
    for r in out:
        if r is None:
            lines.append("")
            continue
        lines.append("".join(c.ljust(width) for c in r).rstrip())
    return "\n".join(lines).rstrip() + "\n"
