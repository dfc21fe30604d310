"""Command-line entry point.

Subcommands: simulate-eulerian, simulate-lagrangian, trace, compare,
audit. Each takes --config <file> plus overrides. Exit codes: 0 success,
1 invalid configuration, 2 solver failure, 3 audit violation. The only
environment variable honored is MOCHSOLVE_THREADS (worker count for
independent runs).
"""
import argparse
import os
import sys

import numpy as np

from .characteristics import Chart, picard_trace
from .errors import AuditViolationError, ConfigurationError, InvalidInputError, SolverFailureError
from .eulerian import audit_coefficient_sets, energy_balance_residual, simulate_eulerian
from .harness import (compare_solvers, initial_state, lipschitz_audit,
                      parse_config, weak_form_residual)
from .lagrangian import simulate_lagrangian
from . import snapshots


def _add_common(p):
    p.add_argument("--config", default=None, help="key = value configuration file")
    p.add_argument("--lambda", dest="lam", default=None)
    p.add_argument("--preset", default=None)
    p.add_argument("--N", default=None)
    p.add_argument("--nodes", default=None)
    p.add_argument("--dt", default=None)
    p.add_argument("--T", default=None)
    p.add_argument("--out", default=None)


def _config_from_args(args):
    overrides = {"lambda": args.lam, "preset": args.preset, "N": args.N,
                 "nodes": args.nodes, "dt": args.dt, "T": args.T, "out": args.out}
    return parse_config(args.config, overrides)


def _outdir(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _cmd_simulate_eulerian(cfg):
    traj = simulate_eulerian(initial_state(cfg), cfg.lam, cfg.dt, cfg.T,
                             cfg.output_every, cfg.coefficient_set,
                             cfg.blowup_threshold)
    out = _outdir(cfg)
    for k, (state, coeffs) in enumerate(zip(traj.states, traj.coeffs)):
        snapshots.write_eulerian_snapshot(
            os.path.join(out, f"eulerian_{k:04d}.txt"), state, cfg.lam, coeffs)
    if traj.blowup is not None:
        b = traj.blowup
        print(f"blow-up detected at t={b.time:.6g} x={b.location:.6g} "
              f"max_slope={b.max_slope:.6g}; stopped")
    print(f"wrote {len(traj.states)} snapshots to {out}")
    return 0


def _cmd_simulate_lagrangian(cfg):
    traj = simulate_lagrangian(initial_state(cfg), cfg.lam, cfg.nodes, cfg.dt,
                               cfg.T, cfg.output_every, cfg.coefficient_set)
    out = _outdir(cfg)
    for k, state in enumerate(traj.states):
        snapshots.write_lagrangian_snapshot(
            os.path.join(out, f"lagrangian_{k:04d}.txt"), state)
    snapshots.write_breaking_log(os.path.join(out, "breaking_events.txt"),
                                 traj.events)
    print(f"wrote {len(traj.states)} snapshots, {len(traj.events)} breaking "
          f"events to {out}")
    return 0


def _cmd_trace(cfg):
    traj = simulate_eulerian(initial_state(cfg), cfg.lam, cfg.dt, cfg.T,
                             cfg.output_every, cfg.coefficient_set,
                             cfg.blowup_threshold)
    charts = [Chart.from_eulerian(s, c) for s, c in zip(traj.states, traj.coeffs)]
    out = _outdir(cfg)
    for i, y in enumerate(cfg.trace_points):
        tr = picard_trace(charts, y)
        snapshots.write_trace(os.path.join(out, f"trace_{i:02d}.txt"), tr)
        print(f"trace {i}: y={y:g} iterations={tr.iterations} "
              f"max_contraction={max(tr.contraction_factors, default=0.0):.3f}")
    return 0


def _cmd_compare(cfg):
    report = compare_solvers(cfg)
    out = _outdir(cfg)
    snapshots.write_report(os.path.join(out, "comparison_report.txt"), report)
    print(f"levels {report.levels} errors "
          + " ".join(f"{e:.3e}" for e in report.level_errors))
    if "cross" in report.orders:
        print(f"cross-refinement order {report.orders['cross']:.2f}")
    for a in report.audits:
        print(f"audit {a.name}: measured {a.measured:.4g} bound {a.bound:.4g} "
              f"{'pass' if a.passed else 'FAIL'}")
    if not report.passed:
        raise AuditViolationError("solver equivalence or invariant audit failed")
    print("comparison passed")
    return 0


def _cmd_audit(cfg):
    m0 = initial_state(cfg)
    traj = simulate_eulerian(m0, cfg.lam, cfg.dt, cfg.T, cfg.output_every,
                             cfg.coefficient_set, cfg.blowup_threshold)
    failures = []

    coeff = audit_coefficient_sets(m0, cfg.lam)
    print(f"coefficient audit: winner={coeff['winner']} errors="
          + " ".join(f"{k}:{v:.3e}" for k, v in coeff["errors"].items()))
    if coeff["winner"] != "rederived":
        failures.append("coefficient audit winner is not the rederived set")

    for a in lipschitz_audit(traj, cfg.invariant_slack, cfg.trace_points):
        print(f"audit {a.name}: measured {a.measured:.4g} bound {a.bound:.4g} "
              f"{'pass' if a.passed else 'FAIL'}")
        if not a.passed:
            failures.append(a.name)

    eb = energy_balance_residual(traj)
    eb_max = float(np.max(eb)) if eb.size else 0.0
    print(f"energy balance residual max {eb_max:.3e}")

    res = weak_form_residual(traj)
    for name, vals in res.items():
        print(f"weak form {name}: " + " ".join(f"{v:.3e}" for v in vals))

    out = _outdir(cfg)
    with open(os.path.join(out, "audit_report.txt"), "w") as fh:
        fh.write(f"coefficient_winner = {coeff['winner']}\n")
        for k, v in coeff["errors"].items():
            fh.write(f"coefficient_error_{k} = {v:.17g}\n")
        for a in lipschitz_audit(traj, cfg.invariant_slack, cfg.trace_points):
            fh.write(f"audit {a.name} measured={a.measured:.17g} "
                     f"bound={a.bound:.17g} {'pass' if a.passed else 'FAIL'}\n")
        fh.write(f"energy_balance_max = {eb_max:.17g}\n")
        for name, vals in res.items():
            fh.write(f"weak_{name} = " + " ".join(f"{v:.17g}" for v in vals) + "\n")
    if failures:
        raise AuditViolationError("; ".join(failures))
    print("audit passed")
    return 0


_COMMANDS = {
    "simulate-eulerian": _cmd_simulate_eulerian,
    "simulate-lagrangian": _cmd_simulate_lagrangian,
    "trace": _cmd_trace,
    "compare": _cmd_compare,
    "audit": _cmd_audit,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mochsolve",
        description="Conservative modified Camassa-Holm solvers and audits")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        _add_common(sub.add_parser(name))
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except (ConfigurationError, InvalidInputError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](cfg)
    except (ConfigurationError, InvalidInputError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except AuditViolationError as exc:
        print(f"audit violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
