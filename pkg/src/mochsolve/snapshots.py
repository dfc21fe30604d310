"""Plain-text persistence: snapshots, traces, event logs, reports.

Everything numeric is written with 17 significant digits so float64
values survive a write/read round trip bit for bit, which keeps audits
recomputed from files identical to in-memory ones.
"""
import numpy as np

from .errors import InvalidInputError
from .grids import UniformGrid
from .lagrangian import LagrangianState
from .transform import EulerianState

FMT = "%.17g"


def _header_fields(line):
    if not line.startswith("#"):
        raise InvalidInputError("missing snapshot header")
    out = {}
    for tok in line[1:].split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


def write_eulerian_snapshot(path, state: EulerianState, lam, coeffs):
    """Columns x m gamma u mx under a header with time, lambda, grid."""
    g = state.grid
    gamma = coeffs.mx - state.m_values
    data = np.column_stack([state.x, state.m_values, gamma, coeffs.u, coeffs.mx])
    header = (f"time={state.time:.17g} lambda={lam:.17g} origin={g.origin:.17g} "
              f"spacing={g.spacing:.17g} count={g.count}\nx m gamma u mx")
    np.savetxt(path, data, fmt=FMT, header=header)


def read_eulerian_snapshot(path):
    """Returns (state, lam); the derived columns are re-computable."""
    with open(path) as fh:
        fields = _header_fields(fh.readline())
    data = np.loadtxt(path)
    grid = UniformGrid(float(fields["origin"]), float(fields["spacing"]),
                       int(fields["count"]))
    state = EulerianState(grid, data[:, 1], float(fields["time"]))
    return state, float(fields["lambda"])


def write_lagrangian_snapshot(path, state: LagrangianState):
    data = np.column_stack([state.labels, state.beta, state.x, state.m, state.theta])
    header = (f"time={state.time:.17g} lambda={state.lam:.17g}\n"
              "label beta x m theta")
    np.savetxt(path, data, fmt=FMT, header=header)


def read_lagrangian_snapshot(path) -> LagrangianState:
    with open(path) as fh:
        fields = _header_fields(fh.readline())
    data = np.loadtxt(path)
    return LagrangianState(data[:, 0], data[:, 1], data[:, 2], data[:, 3],
                           data[:, 4], float(fields["time"]),
                           float(fields["lambda"]))


def write_breaking_log(path, events):
    """One line per step that produced crossings: time, location, and the
    label range of the nodes that crossed."""
    groups = {}
    for e in events:
        groups.setdefault(round(e.time, 12), []).append(e)
    lines = ["# time x_location label_lo label_hi"]
    for t in sorted(groups):
        evs = groups[t]
        labels = [e.label for e in evs]
        lines.append(" ".join(FMT % v for v in
                              (evs[0].time, evs[0].x_location, min(labels), max(labels))))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trace(path, trace):
    data = np.column_stack([trace.times, trace.beta, trace.x, trace.m])
    header = (f"weight_constant={trace.weight_constant:.17g} "
              f"iterations={trace.iterations}\nt beta x m")
    np.savetxt(path, data, fmt=FMT, header=header)


def read_initial_profile(path, grid: UniformGrid):
    """Two-column x m profile, interpolated onto the run grid."""
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] < 2:
        raise InvalidInputError("initial profile needs columns x m")
    x, m = data[:, 0], data[:, 1]
    if np.any(np.diff(x) <= 0):
        raise InvalidInputError("initial profile abscissae must increase")
    return np.interp(grid.x, x, m, left=0.0, right=0.0)


def write_report(path, report):
    lines = ["# solver comparison report"]
    lines.append("passed = " + ("yes" if report.passed else "no"))
    lines.append("equivalence_tol = " + FMT % report.equivalence_tol)
    lines.append("levels = " + " ".join(str(n) for n in report.levels))
    lines.append("level_errors = " + " ".join(FMT % e for e in report.level_errors))
    for name, val in sorted(report.orders.items()):
        lines.append(f"order_{name} = " + FMT % val)
    for a in report.audits:
        lines.append(f"audit {a.name} measured={FMT % a.measured} "
                     f"bound={FMT % a.bound} {'pass' if a.passed else 'FAIL'}")
    lines.append(f"breaking_events = {len(report.events)}")
    lines.append("# t sup_error")
    for t, e in zip(report.times, report.sup_errors):
        lines.append(FMT % t + " " + FMT % e)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
