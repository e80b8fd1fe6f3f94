"""Command line driver.

    zakfd run --case case-II --epsilon 1/4 --h 0.1 --tau 1e-3 --domain=-40,40
    zakfd sweep --sweep spatial --epsilon 1,1/4 --table --out spatial.csv
    zakfd limit-check --case case-I --epsilon 1/4,1/8,1/16
    zakfd soliton-bench
    zakfd --seed-check

A ``--config FILE`` holds ``key = value`` lines named after the long flags
(``fp-tol = 1e-10``, ``table = true``); flags given on the command line win.
Exit codes: 0 success, 2 configuration error, 3 solver failure or failed
check, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction

from .errors import ConfigurationError, SolverFailure
from .harness import (
    KINDS, SweepSpec, emit_csv, emit_table, limit_consistency_check, records_to_csv, run_sweep,
)
from .limit import soliton_benchmark
from .problem import CASES, make_case
from .scheme import StepConfig, run

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("run", "sweep", "limit-check", "soliton-bench")

SWEEP_DEFAULTS = {
    "spatial": dict(epsilon="1,1/4,1/16,1/64", h="0.2,0.1,0.05,0.025", tau="1e-4"),
    "temporal": dict(epsilon="1,1/4,1/16,1/64", h="2.5e-3",
                     tau=",".join(f"{0.1 / 2**m:.10g}" for m in range(8))),
    "resonance-I": dict(epsilon="1/2", h="2.5e-3", tau="0.1"),
    "resonance-II": dict(epsilon="1/8", h="2.5e-3", tau="0.0125"),
}


def number(text) -> float:
    """A float, also accepting fractions such as ``1/16``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def number_list(text):
    return [number(t) for t in str(text).split(",") if t.strip()]


def domain(text):
    parts = number_list(text)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"domain must be 'a,b', got {text!r}")
    return tuple(parts)


def _common(p):
    p.add_argument("--case", choices=sorted(CASES), default="case-II")
    p.add_argument("--epsilon", help="value, or comma list for sweeps (fractions allowed)")
    p.add_argument("--h", help="mesh size, or comma list for spatial sweeps")
    p.add_argument("--tau", help="time step, or comma list for temporal sweeps")
    p.add_argument("--T", type=number, default=1.0, help="final time (default 1)")
    p.add_argument("--domain", type=domain, default=(-200.0, 200.0), metavar="a,b")
    p.add_argument("--fp-tol", type=number, default=1e-12)
    p.add_argument("--out", metavar="PATH", help="CSV output file")
    p.add_argument("--table", action="store_true", help="print a formatted table")
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="zakfd", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", metavar="FILE", help="key = value defaults")
    parser.add_argument("--seed-check", action="store_true", help="run the invariant suite first")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("run", help="single simulation")
    _common(p)

    p = sub.add_parser("sweep", help="convergence sweep")
    _common(p)
    p.add_argument("--sweep", choices=KINDS, default="spatial")
    p.add_argument("--links", type=int, help="resonance chain links (default 2 for I, 3 for II)")
    p.add_argument("--check-reference", action="store_true",
                   help="also rerun the first group with a twice finer reference")

    p = sub.add_parser("limit-check", help="distance to the limit equation across epsilon")
    _common(p)
    p.set_defaults(case="case-I")

    p = sub.add_parser("soliton-bench", help="splitting solver against the exact soliton")
    p.add_argument("--M", type=int, default=1024)
    p.add_argument("--dt", type=number, default=1e-3)
    p.add_argument("--T", type=number, default=1.0)
    p.add_argument("--domain", type=domain, default=(-32.0, 32.0), metavar="a,b")
    return parser


def read_config(path):
    """Flat ``key = value`` file as a list of command line tokens."""
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            flag = "--" + key.strip().replace("_", "-")
            value = value.strip()
            if value.lower() in ("true", "yes", "on"):
                tokens.append(flag)
            elif value.lower() in ("false", "no", "off"):
                continue
            else:
                # one token, so values such as "-40,40" are not read as flags
                tokens.append(f"{flag}={value}")
    return tokens


def _expand_config(argv):
    """Insert config tokens right after the subcommand so later flags override."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    tokens = read_config(known.config)
    for i, tok in enumerate(argv):
        if tok in COMMANDS:
            return argv[: i + 1] + tokens + argv[i + 1:]
    return argv


def _one(text, name):
    values = number_list(text) if text is not None else []
    if len(values) != 1:
        raise ConfigurationError(f"--{name} needs a single value for this command")
    return values[0]


def cmd_run(args, out):
    case = make_case(args.case, _one(args.epsilon or "1", "epsilon"), domain=args.domain, T=args.T)
    grid = case.grid(_one(args.h or "0.1", "h"))
    tau = _one(args.tau or "1e-3", "tau")
    traj = run(case, grid, tau, StepConfig(fp_tol=args.fp_tol))
    s = traj.final
    print(f"case={case.name} eps={case.epsilon:g} M={grid.M} h={grid.h:g} tau={tau:g} T={s.t:g}", file=out)
    print(f"steps={s.k} max_iterations={traj.max_iterations} "
          f"relative_mass_defect={traj.relative_mass_defect:.3e} wall_time={traj.wall_time:.2f}s",
          file=out)
    if args.out:
        _write_fields(args.out, grid.x, s)
    return EXIT_OK


def _write_fields(path, x, s):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("x", "re_E", "im_E", "F", "N"))
            for row in zip(x, s.E.real, s.E.imag, s.F, s.N):
                w.writerow([f"{v:.6g}" for v in row])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def sweep_spec(args) -> SweepSpec:
    d = SWEEP_DEFAULTS[args.sweep]
    eps = number_list(args.epsilon or d["epsilon"])
    hs = number_list(args.h or d["h"])
    taus = number_list(args.tau or d["tau"])
    common = dict(kind=args.sweep, case=args.case, T=args.T, domain=args.domain, fp_tol=args.fp_tol)
    if args.sweep == "spatial":
        return SweepSpec(epsilon_list=eps, h_list=hs, tau_fixed=_one(args.tau or d["tau"], "tau"),
                         **common)
    if args.sweep == "temporal":
        return SweepSpec(epsilon_list=eps, tau_list=taus, h_fixed=_one(args.h or d["h"], "h"),
                         **common)
    links = args.links if args.links is not None else (2 if args.sweep == "resonance-I" else 3)
    return SweepSpec(eps0=_one(args.epsilon or d["epsilon"], "epsilon"),
                     tau0=_one(args.tau or d["tau"], "tau"), n_links=links,
                     h_fixed=_one(args.h or d["h"], "h"), **common)


def cmd_sweep(args, out):
    result = run_sweep(sweep_spec(args), workers=args.workers, check_reference=args.check_reference)
    if args.out:
        emit_csv(result.records, args.out)
    if args.table:
        out.write(emit_table(result.records))
    if not args.out and not args.table:
        out.write(records_to_csv(result.records))
    chk = result.reference_check
    if chk is not None:
        verdict = "passed" if chk["passed"] else "FAILED"
        print(f"reference check {verdict}: largest change {chk['max_relative_change']:.3g} "
              f"with {chk['doubled']}", file=sys.stderr)
    failed = [r for r in result.records if not r.ok]
    for r in failed:
        print(f"cell eps={r.epsilon:g} h={r.h:g} tau={r.tau:g}: {r.status}", file=sys.stderr)
    return EXIT_SOLVER if failed or not result.passed_reference_check else EXIT_OK


def cmd_limit(args, out):
    eps = number_list(args.epsilon or "1/4,1/8,1/16")
    rows = limit_consistency_check(
        args.case, eps, h=_one(args.h or "0.0125", "h"), tau=_one(args.tau or "1e-3", "tau"),
        T=args.T, domain=args.domain, cfg=StepConfig(fp_tol=args.fp_tol),
    )
    print("epsilon,difference,ratio", file=out)
    for r in rows:
        ratio = "-" if r.ratio is None else f"{r.ratio:.6g}"
        print(f"{r.epsilon:.6g},{r.difference:.6g},{ratio}", file=out)
    return EXIT_OK


def cmd_soliton(args, out):
    r = soliton_benchmark(M=args.M, dt=args.dt, T=args.T, domain=args.domain)
    print(f"l2_error={r['l2_error']:.3e} relative_mass_drift={r['relative_mass_drift']:.3e}", file=out)
    return EXIT_OK


def cmd_seed_check(out):
    from .checks import run_checks

    ok = True
    for name, passed, detail in run_checks():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}", file=out)
    return ok


HANDLERS = {"run": cmd_run, "sweep": cmd_sweep, "limit-check": cmd_limit, "soliton-bench": cmd_soliton}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command is None and not args.seed_check:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        if args.seed_check and not cmd_seed_check(out):
            return EXIT_SOLVER
        if args.command is None:
            return EXIT_OK
        return HANDLERS[args.command](args, out)
    except (ConfigurationError, argparse.ArgumentTypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
