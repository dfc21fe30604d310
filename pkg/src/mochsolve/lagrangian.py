"""Characteristic-coordinate solver that stays well-posed through wave
breaking.

State per characteristic label: the drifting coordinate beta, position x,
value m, and the angle theta = 2 arctan(m_x), which compactifies the
slope. Wave breaking is theta crossing an odd multiple of pi; there the
angle equation reduces to d(theta)/dt = -1 exactly, so characteristics
cross the singular set transversally and the solution continues without
losing energy. All nonlocal fields admit kernel representations in beta
with the arclength s(beta) = int cos^2(theta/2) d(beta) in the exponent;
s plateaus exactly where the slope has blown up, which is what keeps the
system semilinear.

Nodes are carried at their drifting beta positions and all quadrature
runs over the current (nonuniform) layout; the bounded Lipschitz constant
of the drift G preserves node ordering, and each step asserts it.
"""
from dataclasses import dataclass

import numpy as np

from .characteristics import Chart, EnergyMeasure
from .errors import InvalidInputError, SolverFailureError
from .grids import centered_diff, cumtrapz0
from .greens import _arclength_even_odd
from .transform import EulerianState

__all__ = [
    "LagrangianState",
    "LagrangianCoefficients",
    "BreakingEvent",
    "LagrangianTrajectory",
    "init_lagrangian",
    "cumulative_arc",
    "compute_fields_lagrangian",
    "rhs_lagrangian",
    "step_lagrangian",
    "simulate_lagrangian",
    "to_eulerian",
    "to_chart",
]


@dataclass(frozen=True)
class LagrangianState:
    """Per-label arrays (beta, x, m, theta) at one time."""

    labels: np.ndarray
    beta: np.ndarray
    x: np.ndarray
    m: np.ndarray
    theta: np.ndarray
    time: float
    lam: float

    def __post_init__(self):
        arrays = {}
        for name in ("labels", "beta", "x", "m", "theta"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(a)):
                raise InvalidInputError(f"non-finite {name}")
            arrays[name] = a
            object.__setattr__(self, name, a)
        n = arrays["labels"].shape[0]
        if any(a.shape != (n,) for a in arrays.values()):
            raise InvalidInputError("state arrays must share one length")
        if np.any(np.diff(arrays["labels"]) <= 0) or np.any(np.diff(arrays["beta"]) <= 0):
            raise InvalidInputError("labels and beta must be strictly increasing")
        if self.lam == 0.0:
            raise InvalidInputError("lambda must be nonzero")


@dataclass(frozen=True)
class LagrangianCoefficients:
    P1: np.ndarray
    P2: np.ndarray
    P3: np.ndarray
    P4: np.ndarray
    P5: np.ndarray
    P1x: np.ndarray
    P2x: np.ndarray
    P3x: np.ndarray
    P4x: np.ndarray
    P5x: np.ndarray
    u: np.ndarray
    F: np.ndarray
    N: np.ndarray
    P: np.ndarray
    G: np.ndarray


@dataclass(frozen=True)
class BreakingEvent:
    time: float
    x_location: float
    label: float
    node: int


def init_lagrangian(m0: EulerianState, node_count, lam) -> LagrangianState:
    """Place uniform labels over the range of beta(x) = x + int m0_x^2
    and pull the initial data back onto them."""
    if node_count < 2:
        raise InvalidInputError("need at least two nodes")
    x = m0.x
    dx = m0.grid.spacing
    mx = centered_diff(m0.m_values, dx)
    beta_of_x = x + cumtrapz0(mx * mx, dx)
    labels = np.linspace(beta_of_x[0], beta_of_x[-1], int(node_count))
    x0 = np.interp(labels, beta_of_x, x)
    m = np.interp(x0, x, m0.m_values)
    theta = 2.0 * np.arctan(np.interp(x0, x, mx))
    return LagrangianState(labels, labels.copy(), x0, m, theta, m0.time, float(lam))


def cumulative_arc(state: LagrangianState):
    """s(beta): prefix integral of cos^2(theta/2); plateaus where the
    slope has blown up."""
    c2 = np.cos(0.5 * state.theta) ** 2
    db = np.diff(state.beta)
    return np.concatenate(([0.0], np.cumsum(0.5 * db * (c2[1:] + c2[:-1]))))


def _node_weights(beta):
    w = np.empty_like(beta)
    w[1:-1] = 0.5 * (beta[2:] - beta[:-2])
    w[0] = 0.5 * (beta[1] - beta[0])
    w[-1] = 0.5 * (beta[-1] - beta[-2])
    return w


def compute_fields_lagrangian(state: LagrangianState, coeff_set="rederived") -> LagrangianCoefficients:
    """All ten kernel integrals plus u, F, N, the angle source P, and the
    drift G, evaluated on the current node layout.

    G accumulates u_beta + 2E x_beta, written in the bounded trig form
    sin(theta)/2 + N cos^2 + P sin(theta) - N sin^2, which avoids the
    0 * inf ambiguity of (u_x + 2E) x_beta at breaking points.
    """
    lam = state.lam
    m, theta, beta = state.m, state.theta, state.beta
    half = 0.5 * theta
    c2 = np.cos(half) ** 2
    s2 = np.sin(half) ** 2
    sn = np.sin(theta)

    arc = cumulative_arc(state)
    wts = _node_weights(beta)

    e1, o1 = _arclength_even_odd(arc, m * c2 * wts)
    e2, o2 = _arclength_even_odd(arc, m * m * c2 * wts)
    e3, o3 = _arclength_even_odd(arc, s2 * wts)
    P1, P1x = 0.5 * e1, 0.5 * o1
    P2, P2x = 0.5 * e2, 0.5 * o2
    P3, P3x = 0.5 * e3, 0.5 * o3

    half_lam = 1.0 / (2.0 * lam)
    if coeff_set == "rederived":
        u = m - P1 + P1x - half_lam * (P3 + P2 - P2x)
        N = P1 - P1x - m - half_lam * (P3x + P2x - P2 + m * m)
    elif coeff_set == "as_printed":
        u = m + P1 - P1x + half_lam * (P3 + P2 - P2x)
        N = -m - P1 - P1x + half_lam * (-P2 + P3x + P2x - m * m)
    else:
        raise InvalidInputError(f"unknown coefficient set {coeff_set!r}")

    e4, o4 = _arclength_even_odd(arc, (0.5 * u * sn - m * u * c2) * wts)
    e5, o5 = _arclength_even_odd(arc, P3 * c2 * wts)
    P4, P4x = 0.5 * e4, 0.5 * o4
    P5, P5x = 0.5 * e5, 0.5 * o5

    if coeff_set == "rederived":
        F = (u * m + P4 + P4x - 0.5 * (m * m + P3 + P3x)
             - lam * P1x + 0.5 * (P2 + P5 + P5x))
    else:
        F = (m * u - P4 - P4x + 0.5 * (-m * m + P3 + P3x)
             + lam * P1x + 0.5 * (P5 + P5x - P2))
    P = F + m * N + lam * u + 0.5 * m * m

    g_beta = 0.5 * sn + N * c2 + P * sn - N * s2
    db = np.diff(beta)
    G = np.concatenate(([0.0], np.cumsum(0.5 * db * (g_beta[1:] + g_beta[:-1]))))

    return LagrangianCoefficients(P1, P2, P3, P4, P5, P1x, P2x, P3x, P4x, P5x,
                                  u, F, N, P, G)


def rhs_lagrangian(state: LagrangianState, coeffs=None, coeff_set="rederived"):
    """Nodewise time derivatives (beta', x', m', theta')."""
    c = coeffs if coeffs is not None else compute_fields_lagrangian(state, coeff_set)
    half = 0.5 * state.theta
    dtheta = (2.0 * np.cos(half) ** 2 * c.P
              - c.N * np.sin(state.theta)
              - np.sin(half) ** 2)
    return c.G, c.u, c.F, dtheta


def _try_rk4(state, dt, coeff_set):
    k1 = rhs_lagrangian(state, coeff_set=coeff_set)
    s2 = _advance(state, k1, 0.5 * dt)
    k2 = rhs_lagrangian(s2, coeff_set=coeff_set)
    s3 = _advance(state, k2, 0.5 * dt)
    k3 = rhs_lagrangian(s3, coeff_set=coeff_set)
    s4 = _advance(state, k3, dt)
    k4 = rhs_lagrangian(s4, coeff_set=coeff_set)
    beta = state.beta + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    x = state.x + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    m = state.m + (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    theta = state.theta + (dt / 6.0) * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
    return beta, x, m, theta


def _advance(state, k, dt):
    beta = state.beta + dt * k[0]
    if np.any(np.diff(beta) <= 0):
        raise _MonotonicityLoss()
    return LagrangianState(state.labels, beta, state.x + dt * k[1],
                           state.m + dt * k[2], state.theta + dt * k[3],
                           state.time + dt, state.lam)


class _MonotonicityLoss(Exception):
    pass


def _detect_breaking(state, theta_new, x_new, dt):
    """Nodes whose angle crossed an odd multiple of pi during the step."""
    b_old = np.floor((state.theta + np.pi) / (2.0 * np.pi))
    b_new = np.floor((theta_new + np.pi) / (2.0 * np.pi))
    events = []
    for i in np.nonzero(b_new != b_old)[0]:
        if b_new[i] < b_old[i]:
            theta_c = 2.0 * np.pi * b_old[i] - np.pi
        else:
            theta_c = 2.0 * np.pi * b_new[i] - np.pi
        denom = theta_new[i] - state.theta[i]
        frac = (theta_c - state.theta[i]) / denom if denom != 0 else 0.5
        frac = min(max(float(frac), 0.0), 1.0)
        events.append(BreakingEvent(
            time=state.time + frac * dt,
            x_location=float(state.x[i] + frac * (x_new[i] - state.x[i])),
            label=float(state.labels[i]),
            node=int(i),
        ))
    return events


def step_lagrangian(state: LagrangianState, dt, coeff_set="rederived", _depth=0):
    """RK4 step with per-stage coefficient refresh.

    If node ordering in beta is lost the step is retried as two halves
    (bounded recursion); the returned events record any angle crossings.
    """
    if dt <= 0:
        raise InvalidInputError("dt must be positive")
    try:
        beta, x, m, theta = _try_rk4(state, dt, coeff_set)
        if np.any(np.diff(beta) <= 0):
            raise _MonotonicityLoss()
    except _MonotonicityLoss:
        if _depth >= 12:
            raise SolverFailureError("node ordering lost; dt halving exhausted")
        half1, ev1 = step_lagrangian(state, 0.5 * dt, coeff_set, _depth + 1)
        half2, ev2 = step_lagrangian(half1, 0.5 * dt, coeff_set, _depth + 1)
        return half2, ev1 + ev2
    events = _detect_breaking(state, theta, x, dt)
    new = LagrangianState(state.labels, beta, x, m, theta,
                          state.time + dt, state.lam)
    return new, events


@dataclass
class LagrangianTrajectory:
    lam: float
    coeff_set: str
    dt: float
    times: list
    states: list
    coeffs: list
    events: list

    def charts(self):
        return [to_chart(s, c) for s, c in zip(self.states, self.coeffs)]


def simulate_lagrangian(m0: EulerianState, lam, node_count, dt, t_final,
                        output_every=1, coeff_set="rederived") -> LagrangianTrajectory:
    state = init_lagrangian(m0, node_count, lam)
    traj = LagrangianTrajectory(float(lam), coeff_set, float(dt),
                                [state.time], [state],
                                [compute_fields_lagrangian(state, coeff_set)],
                                [])
    nsteps = int(round(t_final / dt))
    for k in range(1, nsteps + 1):
        state, events = step_lagrangian(state, dt, coeff_set)
        traj.events.extend(events)
        if k % output_every == 0 or k == nsteps:
            traj.times.append(state.time)
            traj.states.append(state)
            traj.coeffs.append(compute_fields_lagrangian(state, coeff_set))
    return traj


def to_eulerian(state: LagrangianState, grid, plateau_tol=1e-6):
    """Push the node data onto a uniform grid.

    m comes from monotone interpolation of (x, m). The energy measure
    splits into the absolutely continuous density tan^2(theta/2) where
    cos^2(theta/2) exceeds plateau_tol and one atom per plateau of x,
    carrying mass int sin^2(theta/2) d(beta) over the plateau.
    """
    c2 = np.cos(0.5 * state.theta) ** 2
    s2 = np.sin(0.5 * state.theta) ** 2
    wts = _node_weights(state.beta)
    gx = grid.x
    m = np.interp(gx, state.x, state.m,
                  left=float(state.m[0]), right=float(state.m[-1]))
    regular = c2 > plateau_tol
    if np.count_nonzero(regular) >= 2:
        dens_nodes = np.where(regular, s2 / np.maximum(c2, plateau_tol), 0.0)
        density = np.interp(gx, state.x[regular], dens_nodes[regular],
                            left=0.0, right=0.0)
    else:
        density = np.zeros_like(gx)
    density = np.maximum(density, 0.0)

    atoms = []
    mask = ~regular
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            mass = float(np.sum((s2 * wts)[i:j + 1]))
            if mass > 1e-12:
                atoms.append((float(np.mean(state.x[i:j + 1])), mass))
            i = j + 1
        else:
            i += 1
    measure = EnergyMeasure(gx, density, tuple(atoms))
    return EulerianState(grid, m, state.time), measure


def to_chart(state: LagrangianState, coeffs: LagrangianCoefficients) -> Chart:
    return Chart(state.time, state.beta, state.x, coeffs.G, state.m,
                 coeffs.F, coeffs.u)
