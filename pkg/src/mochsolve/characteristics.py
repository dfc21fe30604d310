"""Adapted coordinates and the unique characteristic through each point.

The monotone relabeling beta(x) = x + mu((-inf, x)) stays bi-Lipschitz
through wave breaking (its inverse plateaus across energy atoms), and the
characteristic through y-bar is the fixed point of

    beta(t) = beta_bar + int_0^t G(s, beta(s)) ds,

a strict contraction in the weighted norm sup_t exp(-2Ct)|beta(t)| once C
dominates the Lipschitz constant of G in beta. G is the cumulative
integral of u_x + 2E up to x(t, beta): the 2 comes from the balance law
for m_x^2, whose source is 2E, and is what makes the traced curve satisfy
dx/dt = u.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, SolverFailureError
from .grids import cumtrapz0, trapz
from .transform import EulerianState

__all__ = [
    "EnergyMeasure",
    "Bounds",
    "Chart",
    "beta_coordinate",
    "x_of_beta",
    "G_functional",
    "picard_trace",
    "characteristic_identity_residual",
    "trace_velocity_residual",
    "measure_bounds",
]


@dataclass(frozen=True)
class EnergyMeasure:
    """Energy density m_x^2 plus atomic parts at wave-breaking points."""

    grid_x: np.ndarray
    density: np.ndarray
    atoms: tuple = ()

    def __post_init__(self):
        d = np.asarray(self.density, dtype=np.float64)
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise InvalidInputError("density must be finite and nonnegative")
        locs = [a[0] for a in self.atoms]
        if any(mass <= 0 for _, mass in self.atoms):
            raise InvalidInputError("atom masses must be positive")
        if len(set(locs)) != len(locs):
            raise InvalidInputError("atoms must sit at distinct locations")
        object.__setattr__(self, "density", d)
        object.__setattr__(self, "atoms", tuple(sorted(self.atoms)))

    @classmethod
    def zero(cls, grid_x):
        return cls(np.asarray(grid_x), np.zeros(len(grid_x)))

    def total_mass(self):
        dx = self.grid_x[1] - self.grid_x[0]
        return trapz(self.density, dx) + sum(m for _, m in self.atoms)


@dataclass(frozen=True)
class Bounds:
    """Measured run constants: sup|u|, L1 norm of F, Lipschitz bound of G."""

    C_inf: float
    C_S: float
    C_G: float

    def __post_init__(self):
        if min(self.C_inf, self.C_S, self.C_G) < 0:
            raise InvalidInputError("bounds must be nonnegative")


def _measure_knots(measure: EnergyMeasure):
    """Monotone knot arrays (beta, x) encoding the cumulative map,
    with a vertical jump of height mass at every atom."""
    x = np.asarray(measure.grid_x, dtype=np.float64)
    dx = x[1] - x[0]
    cum = cumtrapz0(measure.density, dx)
    xs = list(x)
    bs = list(x + cum)
    for loc, mass in measure.atoms:
        before = float(np.interp(loc, x, cum))
        shift = sum(m for a, m in measure.atoms if a < loc)
        b_left = loc + before + shift
        xs.extend([loc, loc])
        bs.extend([b_left, b_left + mass])
    # atoms also shift everything strictly to their right
    xs = np.asarray(xs)
    bs = np.asarray(bs)
    for loc, mass in measure.atoms:
        bs = bs + np.where(xs > loc, mass, 0.0)
    order = np.argsort(bs, kind="stable")
    return bs[order], xs[order]


def beta_coordinate(state: EulerianState, measure: EnergyMeasure, x):
    """beta = x + cumulative density + masses of atoms strictly left of x."""
    gx = state.x
    if np.any(np.asarray(x) < gx[0]) or np.any(np.asarray(x) > gx[-1]):
        raise InvalidInputError("x outside the grid")
    cum = cumtrapz0(measure.density, state.grid.spacing)
    base = np.interp(x, gx, cum)
    shift = sum(np.where(np.asarray(x) > loc, mass, 0.0)
                for loc, mass in measure.atoms) if measure.atoms else 0.0
    return x + base + shift


def x_of_beta(state: EulerianState, measure: EnergyMeasure, beta):
    """Inverse of the cumulative map; constant across each atom's jump."""
    bs, xs = _measure_knots(measure)
    b = np.asarray(beta, dtype=np.float64)
    if np.any(b < bs[0] - 1e-12) or np.any(b > bs[-1] + 1e-12):
        raise InvalidInputError("beta outside the range of the cumulative map")
    return np.interp(beta, bs, xs)


@dataclass(frozen=True)
class Chart:
    """Monotone knot view of one stored time: everything as a function of
    beta, valid on both sides of wave breaking."""

    time: float
    beta_knots: np.ndarray
    x_knots: np.ndarray
    G_knots: np.ndarray
    m_knots: np.ndarray
    F_knots: np.ndarray
    u_knots: np.ndarray

    @classmethod
    def from_eulerian(cls, state, coeffs):
        dx = state.grid.spacing
        w = coeffs.mx * coeffs.mx
        beta = state.x + cumtrapz0(w, dx)
        G = cumtrapz0(coeffs.ux + 2.0 * coeffs.E, dx)
        return cls(state.time, beta, state.x, G, state.m_values, coeffs.F, coeffs.u)

    def x_of_beta(self, beta):
        return np.interp(beta, self.beta_knots, self.x_knots)

    def g_of_beta(self, beta):
        return np.interp(beta, self.beta_knots, self.G_knots)

    def m_of_beta(self, beta):
        return np.interp(beta, self.beta_knots, self.m_knots)

    def f_of_beta(self, beta):
        return np.interp(beta, self.beta_knots, self.F_knots)

    def u_of_beta(self, beta):
        return np.interp(beta, self.beta_knots, self.u_knots)

    def beta_of_x(self, x):
        return np.interp(x, self.x_knots, self.beta_knots)

    def g_lipschitz(self):
        db = np.diff(self.beta_knots)
        dg = np.diff(self.G_knots)
        good = db > 1e-14
        return float(np.max(np.abs(dg[good]) / db[good])) if np.any(good) else 0.0


def G_functional(state: EulerianState, coeffs, beta):
    """G(t, beta) = int_{-inf}^{x(t,beta)} (u_x + 2E) dx on one snapshot."""
    chart = Chart.from_eulerian(state, coeffs)
    b = np.asarray(beta, dtype=np.float64)
    lo, hi = chart.beta_knots[0], chart.beta_knots[-1]
    if np.any(b < lo - 1e-12) or np.any(b > hi + 1e-12):
        raise InvalidInputError("beta outside the chart range")
    return chart.g_of_beta(beta)


@dataclass
class PicardTrace:
    """Fixed point of the characteristic integral equation on a time mesh."""

    times: np.ndarray
    beta: np.ndarray
    x: np.ndarray
    m: np.ndarray
    star_updates: list = field(default_factory=list)
    contraction_factors: list = field(default_factory=list)
    weight_constant: float = 0.0
    iterations: int = 0
    converged: bool = False


def picard_trace(charts, y_bar, horizon=None, tol=1e-10, max_iter=80,
                 initial=None, weight_constant=None) -> PicardTrace:
    """Iterate beta -> beta_bar + int_0^t G(s, beta(s)) ds to its fixed point.

    The weighted update norm sup_t exp(-2Ct)|delta(t)| uses the measured
    Lipschitz constant of G unless one is given; each iteration past the
    first should contract it by at most ~1/2. Integrals are trapezoids on
    the chart mesh. Raises SolverFailureError when the iteration stalls,
    which almost always means a misconfigured constant.
    """
    if horizon is not None:
        charts = [c for c in charts if c.time <= horizon + 1e-12]
    if len(charts) < 2:
        raise InvalidInputError("need at least two charted times")
    times = np.array([c.time for c in charts])
    C = float(weight_constant) if weight_constant else max(c.g_lipschitz() for c in charts)
    C = max(C, 1e-12)
    beta_bar = float(charts[0].beta_of_x(np.array([y_bar]))[0])

    n = len(charts)
    beta = np.full(n, beta_bar) if initial is None else np.array(initial, dtype=np.float64)
    weights = np.exp(-2.0 * C * (times - times[0]))
    dt = np.diff(times)

    trace = PicardTrace(times, beta, None, None, weight_constant=C)
    prev_update = None
    for it in range(max_iter):
        g = np.array([charts[k].g_of_beta(beta[k]) for k in range(n)])
        new = np.empty(n)
        new[0] = beta_bar
        new[1:] = beta_bar + np.cumsum(0.5 * dt * (g[1:] + g[:-1]))
        update = float(np.max(weights * np.abs(new - beta)))
        trace.star_updates.append(update)
        if prev_update is not None and prev_update > 0:
            trace.contraction_factors.append(update / prev_update)
        beta = new
        trace.iterations = it + 1
        if update < tol:
            trace.converged = True
            break
        prev_update = update
    if not trace.converged:
        raise SolverFailureError(
            f"Picard iteration did not reach {tol:g} in {max_iter} iterations"
        )
    trace.beta = beta
    trace.x = np.array([charts[k].x_of_beta(beta[k]) for k in range(n)])
    trace.m = np.array([charts[k].m_of_beta(beta[k]) for k in range(n)])
    return trace


def characteristic_identity_residual(charts, trace: PicardTrace) -> float:
    """Max defect of m(t, x(t)) - m(0, x(0)) = int_0^t F(s, x(s)) ds.

    Forward orientation: m gains the F-integral as t increases.
    """
    if len(charts) < len(trace.times):
        raise InvalidInputError("trace extends beyond the charted trajectory")
    f = np.array([charts[k].f_of_beta(trace.beta[k]) for k in range(len(trace.times))])
    dt = np.diff(trace.times)
    integral = np.concatenate(([0.0], np.cumsum(0.5 * dt * (f[1:] + f[:-1]))))
    defect = trace.m - trace.m[0] - integral
    return float(np.max(np.abs(defect)))


def trace_velocity_residual(charts, trace: PicardTrace) -> float:
    """Max defect of dx/dt = u(t, x(t)) along the traced curve, with the
    centered time difference for dx/dt; vanishes under mesh refinement."""
    n = len(trace.times)
    if n < 3:
        return 0.0
    u = np.array([charts[k].u_of_beta(trace.beta[k]) for k in range(n)])
    dxdt = (trace.x[2:] - trace.x[:-2]) / (trace.times[2:] - trace.times[:-2])
    return float(np.max(np.abs(dxdt - u[1:-1])))


def measure_bounds(trajectory) -> Bounds:
    """Measured C_inf, C_S, C_G over a stored Eulerian trajectory."""
    dx = trajectory.grid.spacing
    c_inf = max(float(np.max(np.abs(c.u))) for c in trajectory.coeffs)
    c_s = max(trapz(np.abs(c.F), dx) for c in trajectory.coeffs)
    charts = [Chart.from_eulerian(s, c)
              for s, c in zip(trajectory.states, trajectory.coeffs)]
    c_g = max(c.g_lipschitz() for c in charts)
    return Bounds(c_inf, c_s, c_g)
