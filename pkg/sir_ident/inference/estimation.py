"""Parameter recovery from reported incidence plus one survey estimate.

The observable summaries of an epidemic are the early growth rate rho and
the final reported fraction z_r. With gamma known they fix

    RE = (rho + gamma) / gamma
    z  = root of 1 - z = exp(-RE z)
    p (1 - pi) = z_r / z

so one more piece of information (a survey estimate of pi or of p) pins
down all of beta*, p and pi.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize, stats

from sir_ident.errors import DomainViolation, InsufficientData, Subcritical, SubcriticalWarning
from sir_ident.model.gillespie import EventKind, EventLog
from sir_ident.model.parameters import ModelParams, derived_rates

logger = logging.getLogger(__name__)

FINAL_SIZE_XTOL = 1e-12
DEFAULT_GROWTH_THRESHOLD = 0.075


class SurveyKind(str, Enum):
    IMMUNITY_AT_T0 = "ImmunityAtT0"
    REPORTING_AT_PEAK = "ReportingAtPeak"


@dataclass(frozen=True, slots=True)
class GrowthFit:
    """Least-squares line through (t_i, log N1(t_i)).

    Attributes:
        rho_hat (float): Slope, the estimated growth rate.
        intercept (float): Intercept of the fitted line.
        n_points (int): Number of reported infection events used.
        window_end_time (float): Time of the last point in the window.
    """
    rho_hat: float
    intercept: float
    n_points: int
    window_end_time: float

    def fitted_curve(self, times) -> np.ndarray:
        """Fitted log cumulative reported incidence at ``times``."""
        return self.intercept + self.rho_hat * np.asarray(times, dtype=float)


@dataclass(frozen=True, slots=True)
class SummaryStats:
    rho_hat: float
    z_r_hat: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.z_r_hat < 1.0:
            raise ValueError(f"z_r_hat must lie in [0, 1), got {self.z_r_hat}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True, slots=True)
class KnownParameter:
    """A value of pi or p supplied from outside the incidence data."""
    kind: SurveyKind
    value: float


@dataclass(frozen=True, slots=True)
class EstimationResult:
    p_hat: float
    pi_hat: float
    beta_star_hat: float
    supplied: SurveyKind
    supplied_value: float
    z_hat: float

    def as_params(self, gamma: float) -> ModelParams:
        return ModelParams.from_effective(self.beta_star_hat, self.p_hat, self.pi_hat, gamma)


def fit_growth_curve(times, counts, threshold_count: float) -> GrowthFit:
    """OLS of log(counts) on times, up to the first point where counts reach ``threshold_count``.

    Args:
        times (array-like): Event times, increasing.
        counts (array-like): Cumulative counts at those times, all >= 1.
        threshold_count (float): Counts at which the fitting window closes;
            the crossing point itself is included.

    Returns:
        GrowthFit: Slope, intercept and window description.

    Raises:
        InsufficientData: If fewer than two points fall in the window.
    """
    times = np.asarray(times, dtype=float)
    counts = np.asarray(counts, dtype=float)
    reached = np.flatnonzero(counts >= threshold_count)
    if reached.size:
        stop = int(reached[0]) + 1
    else:
        stop = len(counts)
        if stop:
            logger.warning("growth window never reached %g cumulative reports; fitting all %d points",
                           threshold_count, stop)
    if stop < 2:
        raise InsufficientData(f"need at least 2 reported infections in the growth window, got {stop}")

    window_t, window_y = times[:stop], np.log(counts[:stop])
    fit = stats.linregress(window_t, window_y)
    return GrowthFit(rho_hat=float(fit.slope), intercept=float(fit.intercept),
                     n_points=stop, window_end_time=float(window_t[-1]))


def fit_growth_rate(log: EventLog, threshold_fraction: float = DEFAULT_GROWTH_THRESHOLD,
                    include_initial: bool = False) -> GrowthFit:
    """Estimate the early exponential growth rate from reported infections.

    One data point per reported infection event: (t_i, log N1(t_i)). The
    window ends at the event where N1 first reaches ceil(threshold_fraction * n).

    Args:
        log (EventLog): Simulated epidemic.
        threshold_fraction (float): Fraction of the population that closes the window.
        include_initial (bool): Count the initially reported infectious in
            the cumulative curve (N1 + I_r(0)) instead of N1 alone.

    Raises:
        InsufficientData: With fewer than two usable points (minor outbreaks).
    """
    reported = log.kinds == EventKind.REPORTED_INFECTION
    times = log.times[reported]
    counts = np.arange(1, len(times) + 1, dtype=float)
    threshold = math.ceil(threshold_fraction * log.n)
    if include_initial:
        offset = float(log.initial_state.i_r)
        counts = counts + offset
        threshold = threshold + offset
    return fit_growth_curve(times, counts, threshold)


def solve_final_size(re: float, xtol: float = FINAL_SIZE_XTOL) -> float:
    """Largest root in [0, 1) of 1 - z = exp(-re z).

    Returns 0 (with a :class:`SubcriticalWarning`) when re <= 1.
    """
    if re <= 1.0:
        warnings.warn(f"re = {re:g} <= 1: only the trivial final size exists", SubcriticalWarning, stacklevel=2)
        return 0.0

    def excess(z):
        return -math.expm1(-re * z) - z

    lower = min(1e-9, (re - 1.0) / (re * re))
    if excess(lower) <= 0.0:
        # root has merged with 0 at this precision
        return 0.0
    return float(optimize.bisect(excess, lower, 1.0, xtol=xtol))


def solve_reported_final_size(re: float, p: float, pi: float, xtol: float = FINAL_SIZE_XTOL) -> float:
    """Root of 1 - z_r/(p(1-pi)) = exp(-re z_r/(p(1-pi))) found directly in z_r."""
    scale = p * (1.0 - pi)
    if re <= 1.0:
        warnings.warn(f"re = {re:g} <= 1: only the trivial final size exists", SubcriticalWarning, stacklevel=2)
        return 0.0

    def excess(z_r):
        x = z_r / scale
        return -math.expm1(-re * x) - x

    lower = scale * min(1e-9, (re - 1.0) / (re * re))
    if excess(lower) <= 0.0:
        return 0.0
    return float(optimize.bisect(excess, lower, scale, xtol=xtol * scale))


def predicted_reported_final_size(params: ModelParams) -> float:
    """Deterministic final fraction of reported infections, z_r = p(1 - pi) z."""
    re = derived_rates(params).re
    scale = params.p * (1.0 - params.pi)
    if re <= 1.0:
        return 0.0
    z_r = scale * solve_final_size(re)
    direct = solve_reported_final_size(re, params.p, params.pi)
    if abs(z_r - direct) > 1e-10:
        raise ArithmeticError(f"final-size solutions disagree: {z_r!r} vs {direct!r}")
    return z_r


def estimate_remaining(stats: SummaryStats, known: KnownParameter) -> EstimationResult:
    """Recover the two unknown parameters from (rho_hat, z_r_hat) and one known value.

    Args:
        stats (SummaryStats): Observed growth rate, final reported fraction and gamma.
        known: A :class:`KnownParameter` or a
            :class:`~sir_ident.inference.surveys.SurveyEstimate`, giving pi
            (ImmunityAtT0) or p (ReportingAtPeak).

    Returns:
        EstimationResult: The full (p, pi, beta*) triple.

    Raises:
        Subcritical: If rho_hat <= 0.
        DomainViolation: If the supplied or solved p leaves (0, 1] or pi leaves [0, 1).
    """
    if stats.rho_hat <= 0.0:
        raise Subcritical(f"observed growth rate {stats.rho_hat:.4g} is not positive")
    kind = SurveyKind(known.kind)
    value = float(known.value)

    rate = stats.rho_hat + stats.gamma
    z_hat = solve_final_size(rate / stats.gamma)
    if z_hat <= 0.0:
        raise DomainViolation("estimated final size is zero")
    product = stats.z_r_hat / z_hat

    if kind is SurveyKind.IMMUNITY_AT_T0:
        if not 0.0 <= value < 1.0:
            raise DomainViolation(f"supplied pi = {value:.6g} is outside [0, 1)")
        pi_hat = value
        susceptible = 1.0 - pi_hat
        p_hat = product / susceptible
    else:
        if not 0.0 < value <= 1.0:
            raise DomainViolation(f"supplied p = {value:.6g} is outside (0, 1]")
        p_hat = value
        susceptible = product / p_hat
        pi_hat = 1.0 - susceptible

    if not 0.0 < p_hat <= 1.0:
        raise DomainViolation(f"solved p = {p_hat:.6g} is outside (0, 1]")
    if not 0.0 <= pi_hat < 1.0:
        raise DomainViolation(f"solved pi = {pi_hat:.6g} is outside [0, 1)")

    return EstimationResult(p_hat=p_hat, pi_hat=pi_hat, beta_star_hat=rate / susceptible,
                            supplied=kind, supplied_value=value, z_hat=z_hat)
