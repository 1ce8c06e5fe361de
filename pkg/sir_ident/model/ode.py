"""Deterministic limit of the model: fixed-step RK4 integration.

Two formulations are provided. ``integrate_full`` solves the five
compartment equations directly; ``integrate_reduced`` solves the single
equation for I_r, carrying the running integral of I_r as a second state
variable, and ``reconstruct_compartments`` recovers the other four
compartments from it in closed form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from sir_ident.errors import StepTooLarge
from sir_ident.model.parameters import CompartmentState, InitialConditions, ModelParams, initial_compartments

logger = logging.getLogger(__name__)

NEGATIVITY_TOLERANCE = 1e-9


@dataclass(frozen=True, slots=True)
class TimeGrid:
    """Equally spaced integration grid ``t_start + k*dt``, k = 0..steps."""
    t_start: float
    t_end: float
    dt: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"t_start ({self.t_start}) must be less than t_end ({self.t_end})")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        span = (self.t_end - self.t_start) / self.dt
        if abs(span - round(span)) > 1e-9 * max(1.0, span):
            raise ValueError(f"(t_end - t_start)/dt = {span} is not an integer number of steps")

    @property
    def steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.steps + 1)


@dataclass(frozen=True, eq=False)
class DeterministicPath:
    """Real-valued compartment trajectories on a grid.

    Attributes:
        grid (TimeGrid): The integration grid.
        states (np.ndarray): Shape (steps + 1, 5), columns S, I_r, I_u, R_r, R_u.
        cumulative_ir_integral (np.ndarray): Running integral of I_r at each grid point.
        n (int): Population size.
    """
    grid: TimeGrid
    states: np.ndarray
    cumulative_ir_integral: np.ndarray
    n: int

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def state_at(self, index: int) -> CompartmentState:
        return CompartmentState.from_array(self.states[index].tolist())

    def to_frame(self, stride: int = 1) -> pd.DataFrame:
        """Columns t, S, Ir, Iu, Rr, Ru, intIr at every ``stride``-th grid point."""
        rows = slice(None, None, max(1, int(stride)))
        frame = pd.DataFrame(self.states[rows], columns=["S", "Ir", "Iu", "Rr", "Ru"])
        frame.insert(0, "t", self.times[rows])
        frame["intIr"] = self.cumulative_ir_integral[rows]
        return frame


@dataclass(frozen=True, eq=False)
class ReportedPath:
    """Output of the reduced equation: I_r and its running integral on a grid."""
    grid: TimeGrid
    i_r: np.ndarray
    cumulative_ir_integral: np.ndarray
    n: int

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


def rk4_step(f, t: float, h: float, y: list[float], args: tuple) -> list[float]:
    """Classic fourth-order Runge-Kutta step on a list of floats."""
    k1 = f(t, y, *args)
    k2 = f(t + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k1)], *args)
    k3 = f(t + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k2)], *args)
    k4 = f(t + h, [a + h * b for a, b in zip(y, k3)], *args)
    return [a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]


def full_vector_field(t: float, y: list[float], beta_r: float, beta_u: float, p: float, gamma: float, n: float) -> list[float]:
    """Right-hand side of the five compartment equations plus d/dt of the I_r integral.

    The five compartment derivatives sum to zero.
    """
    s, i_r, i_u, _, _, _ = y
    incidence = (beta_r * i_r + beta_u * i_u) * s / n
    recover_r = gamma * i_r
    recover_u = gamma * i_u
    return [
        -incidence,
        p * incidence - recover_r,
        (1.0 - p) * incidence - recover_u,
        recover_r,
        recover_u,
        i_r,
    ]


def reduced_vector_field(t: float, y: list[float], growth: float, depletion: float, gamma: float) -> list[float]:
    """Right-hand side of the single I_r equation, with the I_r integral as state.

    ``growth`` is beta*(1 - pi) - (beta*/p) I_r(0)/n and ``depletion`` is
    (beta*/p)/n.
    """
    i_r, integral = y
    return [i_r * growth * math.exp(-depletion * integral) - gamma * i_r, i_r]


def _step_too_large(value: float, n: float, step: int, dt: float) -> StepTooLarge:
    return StepTooLarge(
        f"compartment fell to {value:.3g} < {-NEGATIVITY_TOLERANCE * n:.3g} at step {step}; dt={dt} is too coarse")


def integrate_full(params: ModelParams, init: InitialConditions, grid: TimeGrid,
                   initial_state: CompartmentState | None = None) -> DeterministicPath:
    """Integrate the five-compartment system with fixed-step RK4.

    Args:
        params (ModelParams): Model parameters; beta_r and beta_u enter separately.
        init (InitialConditions): Population size and initial reported fraction.
        grid (TimeGrid): Integration grid.
        initial_state (CompartmentState, optional): Overrides the real-valued
            initial state built from ``init``.

    Returns:
        DeterministicPath: States and the running I_r integral at every grid point.

    Raises:
        StepTooLarge: If a compartment drops below -1e-9*n.
    """
    state = initial_state if initial_state is not None else initial_compartments(params, init)
    n = float(init.n)
    args = (params.beta_r, params.beta_u, params.p, params.gamma, n)

    out = np.empty((grid.steps + 1, 6))
    y = [float(v) for v in state.as_array()] + [0.0]
    out[0] = y
    t = grid.t_start
    for k in range(1, grid.steps + 1):
        y = rk4_step(full_vector_field, t, grid.dt, y, args)
        t = grid.t_start + k * grid.dt
        out[k] = y
        if min(y[:5]) < -NEGATIVITY_TOLERANCE * n:
            raise _step_too_large(min(y[:5]), n, k, grid.dt)

    logger.debug("integrated full system: %d steps of dt=%g", grid.steps, grid.dt)
    return DeterministicPath(grid=grid, states=out[:, :5], cumulative_ir_integral=out[:, 5], n=init.n)


def integrate_reduced(params: ModelParams, init: InitialConditions, grid: TimeGrid) -> ReportedPath:
    """Integrate the single equation for I_r with fixed-step RK4.

    dI_r/dt = I_r [beta*(1-pi) - (beta*/p) I_r(0)/n] exp(-(beta*/p)/n * int_0^t I_r) - gamma I_r

    Raises:
        StepTooLarge: If I_r drops below -1e-9*n.
    """
    beta_star = params.beta_star
    n = float(init.n)
    i_r0 = n * init.i0
    depletion = beta_star / params.p / n
    growth = beta_star * (1.0 - params.pi) - depletion * i_r0
    args = (growth, depletion, params.gamma)

    out = np.empty((grid.steps + 1, 2))
    y = [i_r0, 0.0]
    out[0] = y
    t = grid.t_start
    for k in range(1, grid.steps + 1):
        y = rk4_step(reduced_vector_field, t, grid.dt, y, args)
        t = grid.t_start + k * grid.dt
        out[k] = y
        if y[0] < -NEGATIVITY_TOLERANCE * n:
            raise _step_too_large(y[0], n, k, grid.dt)

    return ReportedPath(grid=grid, i_r=out[:, 0], cumulative_ir_integral=out[:, 1], n=init.n)


def reconstruct_compartments(reported_path: ReportedPath, params: ModelParams, init: InitialConditions) -> DeterministicPath:
    """Recover S, I_u, R_r and R_u from the reduced solution.

    S(t)   = [n(1 - pi) - I_r(0)/p] exp(-(beta*/p)/n * int_0^t I_r)
    I_u(t) = (1 - p)/p * I_r(t)
    R_r(t) = p(n - S(t)) - I_r(t)
    R_u(t) = (1 - p)/p * R_r(t)
    """
    n = float(init.n)
    p = params.p
    i_r = reported_path.i_r
    s0 = n * (1.0 - params.pi) - reported_path.i_r[0] / p
    s = s0 * np.exp(-params.beta_star / p / n * reported_path.cumulative_ir_integral)
    ratio = (1.0 - p) / p
    r_r = p * (n - s) - i_r
    states = np.column_stack((s, i_r, ratio * i_r, r_r, ratio * r_r))
    return DeterministicPath(grid=reported_path.grid, states=states,
                             cumulative_ir_integral=reported_path.cumulative_ir_integral.copy(), n=init.n)


def reported_final_fraction(path: DeterministicPath) -> float:
    """Cumulative new reported infections at the end of the path, as a fraction of n."""
    first, last = path.states[0], path.states[-1]
    return float((last[1] + last[3] - first[1] - first[3]) / path.n)


def reported_cumulative(path: DeterministicPath) -> np.ndarray:
    """Deterministic counterpart of N1: I_r + R_r - I_r(0) - R_r(0) at every grid point."""
    reported = path.states[:, 1] + path.states[:, 3]
    return reported - reported[0]


def has_converged(path: DeterministicPath, params: ModelParams, tol: float = 1e-10) -> bool:
    """Whether |dI_r/dt| < tol*n at the last grid point."""
    y = path.states[-1].tolist() + [float(path.cumulative_ir_integral[-1])]
    derivative = full_vector_field(path.times[-1], y, params.beta_r, params.beta_u, params.p, params.gamma, float(path.n))[1]
    return abs(derivative) < tol * path.n


def reported_crossing_times(path: DeterministicPath, max_count: int) -> np.ndarray:
    """Times at which the deterministic cumulative reported incidence reaches 1, 2, ..., max_count.

    Crossings are located by linear interpolation between grid points; counts
    that are never reached are omitted.
    """
    cumulative = reported_cumulative(path)
    # cumulative is non-decreasing up to round-off
    cumulative = np.maximum.accumulate(cumulative)
    levels = np.arange(1, int(max_count) + 1, dtype=float)
    levels = levels[levels <= cumulative[-1]]
    return np.interp(levels, cumulative, path.times)
