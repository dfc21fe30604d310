"""Run configuration, presets, weak-form residual audits, and the
solver-equivalence experiments that operationalize uniqueness.

Presets cover three regimes: a smooth Gaussian, a peakon-like profile
(H^1 with a corner, stressing the kernel), and a steepening profile that
breaks in finite time. Equivalence between the Eulerian solver and the
pulled-back characteristic solver, and its stability under label-grid
perturbation, is the operational form of the uniqueness statement.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .characteristics import Chart, measure_bounds, picard_trace
from .errors import ConfigurationError, InvalidInputError
from .eulerian import (COEFFICIENT_SETS, EulerianTrajectory, compute_fields,
                       simulate_eulerian)
from .grids import UniformGrid, centered_diff, trapz
from .lagrangian import simulate_lagrangian, to_eulerian
from .transform import EulerianState, m_to_gamma

__all__ = [
    "RunConfig",
    "parse_config",
    "initial_state",
    "BumpTest",
    "default_test_functions",
    "weak_form_residual",
    "lipschitz_audit",
    "AuditEntry",
    "ComparisonReport",
    "compare_solvers",
]

PRESETS = ("gaussian", "peakon_like", "steepening", "from_file")

_PRESET_AMPLITUDES = {"gaussian": 1.0, "peakon_like": 1.0, "steepening": 8.0}


@dataclass
class RunConfig:
    lam: float = 1.0
    preset: str = "gaussian"
    amplitude: float = None
    L: float = 15.0
    N: int = 2048
    nodes: int = 2048
    dt: float = 5e-4
    T: float = 0.5
    out: str = "runs/out"
    coefficient_set: str = "rederived"
    output_every: int = 40
    blowup_threshold: float = 1e3
    equivalence_tol: float = 1e-3
    invariant_slack: float = 1e-2
    trace_points: tuple = (-1.0, 0.0, 1.0)
    initial_file: str = ""

    def __post_init__(self):
        if self.lam == 0.0:
            raise ConfigurationError("lambda must be nonzero")
        if self.preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {self.preset!r}")
        if self.N < 16 or self.nodes < 16:
            raise ConfigurationError("N and nodes must be at least 16")
        if self.dt <= 0 or self.T <= 0 or self.L <= 0:
            raise ConfigurationError("dt, T, and L must be positive")
        if self.coefficient_set not in COEFFICIENT_SETS:
            raise ConfigurationError(f"unknown coefficient set {self.coefficient_set!r}")
        if self.preset == "from_file" and not self.initial_file:
            raise ConfigurationError("preset from_file requires initial_file")
        if self.amplitude is None:
            self.amplitude = _PRESET_AMPLITUDES.get(self.preset, 1.0)


_FLOAT_KEYS = {"lambda": "lam", "amplitude": "amplitude", "L": "L", "dt": "dt",
               "T": "T", "blowup_threshold": "blowup_threshold",
               "equivalence_tol": "equivalence_tol", "invariant_slack": "invariant_slack"}
_INT_KEYS = {"N": "N", "nodes": "nodes", "output_every": "output_every"}
_STR_KEYS = {"preset": "preset", "out": "out", "coefficient_set": "coefficient_set",
             "initial_file": "initial_file"}


def parse_config(path=None, overrides=None) -> RunConfig:
    """Line-oriented ``key = value`` file; '#' starts a comment."""
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config: {exc}") from exc
        for ln, raw in enumerate(lines, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"line {ln}: expected key = value")
            key, val = (p.strip() for p in line.split("=", 1))
            values[key] = val
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    kwargs = {}
    try:
        for key, val in values.items():
            if key in _FLOAT_KEYS:
                kwargs[_FLOAT_KEYS[key]] = float(val)
            elif key in _INT_KEYS:
                kwargs[_INT_KEYS[key]] = int(val)
            elif key in _STR_KEYS:
                kwargs[_STR_KEYS[key]] = str(val)
            elif key == "trace_points":
                parts = [p for p in str(val).replace(",", " ").split() if p]
                kwargs["trace_points"] = tuple(float(p) for p in parts)
            else:
                raise ConfigurationError(f"unknown config key {key!r}")
    except ValueError as exc:
        raise ConfigurationError(f"bad value: {exc}") from exc
    return RunConfig(**kwargs)


def initial_state(config: RunConfig) -> EulerianState:
    grid = UniformGrid.symmetric(config.L, config.N)
    x = grid.x
    a = config.amplitude
    if config.preset == "gaussian":
        m0 = a * np.exp(-x * x)
    elif config.preset == "peakon_like":
        m0 = a * np.exp(-np.abs(x))
    elif config.preset == "steepening":
        m0 = -a * x * np.exp(-x * x)
    else:
        from .snapshots import read_initial_profile
        m0 = read_initial_profile(config.initial_file, grid)
    return EulerianState(grid, m0)


class BumpTest:
    """Separable smooth bump exp(1 - 1/(1-s^2)) in t and x; C^inf with
    compact support, with analytic first derivatives."""

    def __init__(self, t0, rt, x0, rx):
        self.t0, self.rt, self.x0, self.rx = float(t0), float(rt), float(x0), float(rx)

    @staticmethod
    def _bump(s):
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
        return out

    @staticmethod
    def _dbump(s):
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si)) * (-2.0 * si / (1.0 - si * si) ** 2)
        return out

    def __call__(self, t, x):
        return self._bump(np.atleast_1d((t - self.t0) / self.rt)) * self._bump((x - self.x0) / self.rx)

    def dt(self, t, x):
        return (self._dbump(np.atleast_1d((t - self.t0) / self.rt)) / self.rt
                * self._bump((x - self.x0) / self.rx))

    def dx(self, t, x):
        return (self._bump(np.atleast_1d((t - self.t0) / self.rt))
                * self._dbump((x - self.x0) / self.rx) / self.rx)

    def support_ok(self, t_final, x_lo, x_hi):
        return (self.t0 + self.rt <= t_final + 1e-12
                and self.x0 - self.rx >= x_lo and self.x0 + self.rx <= x_hi)


def default_test_functions(t_final, half_width):
    """Five fixed bumps spread over the space-time box."""
    T, L = float(t_final), float(half_width)
    return [
        BumpTest(0.45 * T, 0.40 * T, 0.0, 0.30 * L),
        BumpTest(0.50 * T, 0.45 * T, -0.25 * L, 0.25 * L),
        BumpTest(0.40 * T, 0.35 * T, 0.25 * L, 0.25 * L),
        BumpTest(0.30 * T, 0.28 * T, 0.10 * L, 0.45 * L),
        BumpTest(0.60 * T, 0.35 * T, -0.10 * L, 0.18 * L),
    ]


def weak_form_residual(traj: EulerianTrajectory, tests=None):
    """Residuals of the two weak identities for every test function.

    'balance': the energy balance law for w = m_x^2 with source 2E.
    'gamma_form': the original-variable weak form, evaluated after
    mapping each snapshot through gamma = m_x - m, with the Helmholtz
    inverse taken as -p*.
    """
    from .greens import _even_odd_uniform

    grid = traj.grid
    dx = grid.spacing
    x = grid.x
    times = np.asarray(traj.times)
    if tests is None:
        tests = default_test_functions(times[-1], 0.8 * grid.width / 2.0)
    for tf in tests:
        if not tf.support_ok(times[-1], x[0], x[-1]):
            raise InvalidInputError("test function support exceeds the space-time box")

    lam = traj.lam
    bal = np.zeros(len(tests))
    gam = np.zeros(len(tests))
    bal_t = np.zeros((len(tests), len(times)))
    gam_t = np.zeros((len(tests), len(times)))
    for k, (state, c) in enumerate(zip(traj.states, traj.coeffs)):
        t = times[k]
        w = c.mx * c.mx
        gamma = c.mx - state.m_values
        g_even, g_odd = _even_odd_uniform(dx, gamma)
        g2_even, _ = _even_odd_uniform(dx, gamma * gamma)
        dxg_inv = -g_odd          # d/dx (dxx-1)^{-1} gamma
        ginv_g2 = -g2_even        # (dxx-1)^{-1} gamma^2
        for i, tf in enumerate(tests):
            phi = np.asarray(tf(t, x)).reshape(-1)
            phi_t = np.asarray(tf.dt(t, x)).reshape(-1)
            phi_x = np.asarray(tf.dx(t, x)).reshape(-1)
            bal_t[i, k] = trapz(w * phi_t + c.u * w * phi_x + 2.0 * c.E * phi, dx)
            gam_t[i, k] = trapz(
                gamma * phi_t
                + (gamma * dxg_inv + gamma * ginv_g2 / (2.0 * lam)) * phi_x
                + (0.5 * gamma * gamma + lam * dxg_inv + 0.5 * ginv_g2) * phi,
                dx)
    dt_out = np.diff(times)
    w0 = traj.coeffs[0].mx ** 2
    gamma0 = traj.coeffs[0].mx - traj.states[0].m_values
    for i, tf in enumerate(tests):
        phi0 = np.asarray(tf(0.0, x)).reshape(-1)
        time_int_bal = float(np.sum(0.5 * dt_out * (bal_t[i, 1:] + bal_t[i, :-1])))
        time_int_gam = float(np.sum(0.5 * dt_out * (gam_t[i, 1:] + gam_t[i, :-1])))
        bal[i] = abs(time_int_bal + trapz(w0 * phi0, dx))
        gam[i] = abs(time_int_gam + trapz(gamma0 * phi0, dx))
    return {"balance": bal, "gamma_form": gam}


@dataclass(frozen=True)
class AuditEntry:
    name: str
    measured: float
    bound: float
    passed: bool


def _chart_ratios(charts):
    x_ratio = 0.0
    m_ratio = 0.0
    for c in charts:
        db = np.diff(c.beta_knots)
        good = db > 1e-14
        if np.any(good):
            x_ratio = max(x_ratio, float(np.max(np.diff(c.x_knots)[good] / db[good])))
            m_ratio = max(m_ratio, float(np.max(np.abs(np.diff(c.m_knots)[good]) / db[good])))
    return x_ratio, m_ratio


def lipschitz_audit(traj, slack=1e-2, trace_points=(-1.0, 0.0, 1.0)):
    """Check the contraction constants of the adapted coordinates.

    beta -> x must be 1-Lipschitz, beta -> m 1/2-Lipschitz, and traced
    characteristics move no faster than the measured C_inf + C_S.
    Works on Eulerian trajectories and (duck-typed) Lagrangian ones.
    """
    if hasattr(traj, "charts"):
        charts = traj.charts()
        c_inf = max(float(np.max(np.abs(c.u))) for c in traj.coeffs)
        c_s = 0.0
        for st, c in zip(traj.states, traj.coeffs):
            c2 = np.cos(0.5 * st.theta) ** 2
            db = np.gradient(st.beta)
            c_s = max(c_s, float(np.sum(np.abs(c.F) * c2 * db)))
        xs = np.stack([st.x for st in traj.states])
        ts = np.asarray(traj.times)
        speed = float(np.max(np.abs(np.diff(xs, axis=0))
                             / np.diff(ts)[:, None]))
    else:
        charts = [Chart.from_eulerian(s, c) for s, c in zip(traj.states, traj.coeffs)]
        b = measure_bounds(traj)
        c_inf, c_s = b.C_inf, b.C_S
        speed = 0.0
        for y in trace_points:
            tr = picard_trace(charts, y)
            speed = max(speed, float(np.max(np.abs(np.diff(tr.x) / np.diff(tr.times)))))
    x_ratio, m_ratio = _chart_ratios(charts)
    entries = [
        AuditEntry("x_beta_lipschitz", x_ratio, 1.0 + slack, x_ratio <= 1.0 + slack),
        AuditEntry("m_beta_lipschitz", m_ratio, 0.5 + slack, m_ratio <= 0.5 + slack),
        AuditEntry("x_time_lipschitz", speed, (c_inf + c_s) * (1.0 + slack),
                   speed <= (c_inf + c_s) * (1.0 + slack)),
    ]
    return entries


@dataclass
class ComparisonReport:
    times: np.ndarray
    sup_errors: np.ndarray
    orders: dict
    audits: list
    events: list
    equivalence_tol: float
    passed: bool
    levels: list = field(default_factory=list)
    level_errors: list = field(default_factory=list)


def _equivalence_error(config, n, window=None):
    cfg = replace(config, N=n, nodes=n)
    m0 = initial_state(cfg)
    et = simulate_eulerian(m0, cfg.lam, cfg.dt, cfg.T, cfg.output_every,
                           cfg.coefficient_set, cfg.blowup_threshold)
    lt = simulate_lagrangian(m0, cfg.lam, cfg.nodes, cfg.dt, cfg.T,
                             cfg.output_every, cfg.coefficient_set)
    grid = m0.grid
    if window is None:
        window = np.abs(grid.x) <= grid.width / 2.0 * 0.66
    sups = []
    for se, sl in zip(et.states, lt.states):
        pull, _ = to_eulerian(sl, grid)
        sups.append(float(np.max(np.abs(pull.m_values[window] - se.m_values[window]))))
    return np.asarray(sups), et, lt


def compare_solvers(config: RunConfig) -> ComparisonReport:
    """Run both solvers from the same data and report the equivalence
    error, refinement orders over >= 3 levels, and the invariant audits.

    Levels run concurrently when MOCHSOLVE_THREADS is set above 1.
    """
    levels = [max(config.N // 4, 16), max(config.N // 2, 16), config.N]
    workers = int(os.environ.get("MOCHSOLVE_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda n: _equivalence_error(config, n), levels))
    else:
        results = [_equivalence_error(config, n) for n in levels]
    level_errors = [float(np.max(r[0])) for r in results]
    sups, et, lt = results[-1]

    orders = {}
    if len(level_errors) >= 3 and min(level_errors) > 0:
        r1 = level_errors[0] / max(level_errors[1], 1e-300)
        r2 = level_errors[1] / max(level_errors[2], 1e-300)
        orders["cross"] = float(np.log2(np.sqrt(r1 * r2)))
    audits = lipschitz_audit(et, config.invariant_slack, config.trace_points)
    audits += lipschitz_audit(lt, config.invariant_slack)
    passed = (level_errors[-1] <= config.equivalence_tol
              and all(a.passed for a in audits))
    return ComparisonReport(np.asarray(results[-1][1].times), sups, orders,
                            audits, list(lt.events), config.equivalence_tol,
                            passed, levels, level_errors)
