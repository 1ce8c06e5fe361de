"""Equivalence classes of parameters that produce the same reported epidemic.

Two parameter sets give identical deterministic trajectories of the
reported infectious I_r (for the same n and i0) exactly when

    beta1* / p1 = beta2* / p2   and   beta1* (1 - pi1) = beta2* (1 - pi2).

The functions here build such classes, check numerically that members
really share their reported trajectory, and trace the class selected by
an observed growth rate and final reported fraction.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from sir_ident.errors import NoEpidemic, OutOfRange
from sir_ident.inference.estimation import solve_final_size
from sir_ident.model.ode import TimeGrid, integrate_reduced, reconstruct_compartments
from sir_ident.model.parameters import InitialConditions, ModelParams

logger = logging.getLogger(__name__)

SCAN_POINTS = 101
SCAN_EDGE = 1e-6


class PinKind(str, Enum):
    P = "p2"
    PI = "pi2"
    BETA = "beta2"


@dataclass(frozen=True, slots=True)
class Pin:
    """One parameter of the equivalent set fixed to a chosen value."""
    kind: PinKind
    value: float


@dataclass(frozen=True, slots=True)
class EquivalenceInvariants:
    beta_over_p: float
    beta_times_sfrac: float

    def relative_difference(self, other: EquivalenceInvariants) -> float:
        """Largest relative difference between the two coordinates."""
        return max(abs(self.beta_over_p - other.beta_over_p) / abs(self.beta_over_p),
                   abs(self.beta_times_sfrac - other.beta_times_sfrac) / abs(self.beta_times_sfrac))


@dataclass(frozen=True, slots=True)
class IdentityReport:
    """Comparison of the reported trajectories of two parameter sets.

    Attributes:
        max_abs_diff_ir (float): Sup-norm difference of I_r, in individuals.
        identical_ir (bool): ``max_abs_diff_ir <= tolerance``.
        other_compartments_differ (bool): The S paths differ by more than 10 * tolerance.
        tolerance (float): Tolerance used for ``identical_ir``.
        max_abs_diff_other (float): Sup-norm difference over S, I_u, R_r and R_u.
        dt (float): Integration step.
        t_end (float): Integration horizon.
    """
    max_abs_diff_ir: float
    identical_ir: bool
    other_compartments_differ: bool
    tolerance: float
    max_abs_diff_other: float
    dt: float
    t_end: float


class ScanPoint(NamedTuple):
    pi: float
    p: float
    beta_star: float


def invariants_of(params: ModelParams) -> EquivalenceInvariants:
    beta_star = params.beta_star
    return EquivalenceInvariants(beta_over_p=beta_star / params.p, beta_times_sfrac=beta_star * (1.0 - params.pi))


def equivalent_params(base: ModelParams, pin: Pin) -> ModelParams:
    """Solve for the member of ``base``'s equivalence class with one parameter pinned.

    Args:
        base (ModelParams): Reference parameter set.
        pin (Pin): Which of p2, pi2 or beta2 is fixed, and its value.

    Returns:
        ModelParams: The equivalent set (beta_r = beta_u = beta2, gamma unchanged).
        ``base`` itself when the pin equals base's own value.

    Raises:
        OutOfRange: If the solved parameters leave p in (0, 1], pi in [0, 1), beta > 0.
    """
    kind, value = PinKind(pin.kind), float(pin.value)
    beta1, p1, pi1 = base.beta_star, base.p, base.pi
    own = {PinKind.P: p1, PinKind.PI: pi1, PinKind.BETA: beta1}[kind]
    if value == own:
        return base
    if beta1 <= 0.0:
        raise OutOfRange("base parameter set has beta* = 0; its class is degenerate")

    growth = beta1 * (1.0 - pi1)
    if kind is PinKind.PI:
        if not 0.0 <= value < 1.0:
            raise OutOfRange(f"pinned pi2 = {value:.6g} is outside [0, 1)")
        pi2 = value
        beta2 = growth / (1.0 - pi2)
        p2 = p1 * beta2 / beta1
    elif kind is PinKind.P:
        if not 0.0 < value <= 1.0:
            raise OutOfRange(f"pinned p2 = {value:.6g} is outside (0, 1]")
        p2 = value
        beta2 = beta1 * p2 / p1
        pi2 = 1.0 - growth / beta2
    else:
        if not value > 0.0:
            raise OutOfRange(f"pinned beta2 = {value:.6g} must be positive")
        beta2 = value
        p2 = p1 * beta2 / beta1
        pi2 = 1.0 - growth / beta2

    if not 0.0 < p2 <= 1.0:
        raise OutOfRange(f"equivalent p2 = {p2:.6g} is outside (0, 1]")
    if not 0.0 <= pi2 < 1.0:
        raise OutOfRange(f"equivalent pi2 = {pi2:.6g} is outside [0, 1)")
    return ModelParams.from_effective(beta2, p2, pi2, base.gamma)


def certify_identity(params1: ModelParams, params2: ModelParams, init: InitialConditions, grid: TimeGrid,
                     tol: float | None = None) -> IdentityReport:
    """Integrate the reduced equation for both sets and compare their I_r paths.

    Args:
        params1 (ModelParams): First parameter set.
        params2 (ModelParams): Second parameter set.
        init (InitialConditions): Shared n and i0.
        grid (TimeGrid): Shared integration grid.
        tol (float, optional): Sup-norm tolerance; defaults to 1e-8 * n.

    Returns:
        IdentityReport: Differences of the reported and of the other compartments.
    """
    tolerance = 1e-8 * init.n if tol is None else float(tol)
    reported1 = integrate_reduced(params1, init, grid)
    reported2 = integrate_reduced(params2, init, grid)
    diff_ir = float(np.max(np.abs(reported1.i_r - reported2.i_r)))

    states1 = reconstruct_compartments(reported1, params1, init).states
    states2 = reconstruct_compartments(reported2, params2, init).states
    others = [0, 2, 3, 4]
    diff_other = float(np.max(np.abs(states1[:, others] - states2[:, others])))
    diff_s = float(np.max(np.abs(states1[:, 0] - states2[:, 0])))

    return IdentityReport(max_abs_diff_ir=diff_ir, identical_ir=diff_ir <= tolerance,
                          other_compartments_differ=diff_s > 10.0 * tolerance, tolerance=tolerance,
                          max_abs_diff_other=diff_other, dt=grid.dt, t_end=grid.t_end)


def identity_table(params1: ModelParams, params2: ModelParams, init: InitialConditions, grid: TimeGrid) -> pd.DataFrame:
    """Reported and susceptible trajectories of two parameter sets side by side.

    Columns: t, Ir_1, Ir_2, S_1, S_2.
    """
    path1 = reconstruct_compartments(integrate_reduced(params1, init, grid), params1, init)
    path2 = reconstruct_compartments(integrate_reduced(params2, init, grid), params2, init)
    return pd.DataFrame({
        "t": grid.times,
        "Ir_1": path1.states[:, 1],
        "Ir_2": path2.states[:, 1],
        "S_1": path1.states[:, 0],
        "S_2": path2.states[:, 0],
    })


def default_pi_grid(rho_target: float, gamma: float, points: int = SCAN_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0 - rho_target / (rho_target + gamma) - SCAN_EDGE, points)


def manifold_scan(rho_target: float, zr_target: float, gamma: float, pi_grid=None,
                  progress: bool = False) -> list[ScanPoint]:
    """Parameter sets consistent with an observed growth rate and final reported fraction.

    For each pi: beta* = (rho + gamma)/(1 - pi) and p = z_r/((1 - pi) z), with z
    the final size at RE = (rho + gamma)/gamma. Points with p outside (0, 1]
    are skipped.

    Raises:
        NoEpidemic: If rho_target <= 0 (RE <= 1).
    """
    if rho_target <= 0.0:
        raise NoEpidemic(f"growth rate {rho_target:.4g} gives RE <= 1; there is no final size to match")
    rate = rho_target + gamma
    z = solve_final_size(rate / gamma)
    if z <= 0.0:
        raise NoEpidemic(f"RE = {rate / gamma:.6g} is too close to 1 to have a final size")

    grid = default_pi_grid(rho_target, gamma) if pi_grid is None else np.asarray(pi_grid, dtype=float)
    points = []
    for pi in tqdm(grid, desc="scan", disable=not progress):
        pi = float(pi)
        if not 0.0 <= pi < 1.0:
            continue
        p = zr_target / ((1.0 - pi) * z)
        if not 0.0 < p <= 1.0:
            continue
        points.append(ScanPoint(pi=pi, p=p, beta_star=rate / (1.0 - pi)))
    logger.debug("scan kept %d of %d pi values", len(points), len(grid))
    return points


def scan_frame(points: list[ScanPoint]) -> pd.DataFrame:
    """Columns pi, p, beta_star, beta_over_p, beta_times_sfrac."""
    frame = pd.DataFrame(points, columns=["pi", "p", "beta_star"])
    frame["beta_over_p"] = frame["beta_star"] / frame["p"]
    frame["beta_times_sfrac"] = frame["beta_star"] * (1.0 - frame["pi"])
    return frame
