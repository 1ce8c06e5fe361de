"""Approximate log-likelihood of (beta*, p, pi) from reported data alone.

The unobserved unreported compartment is replaced by its deterministic
proxy (1 - p)/p * I_r and susceptibles by n((1 - pi) - N1/(n p)), which
leaves a likelihood in observable quantities only:

    l = N1(t) log p + (1 - p)/p N1(t) log(1 - p)
        + (1/p) sum_i log(beta*/p I_r(t_i-) ((1 - pi) - N1(t_i-)/(n p)))
        - int_0^t beta*/p I_r(s) ((1 - pi) - N1(s)/(n p)) ds

I_r and N1 are step functions, so the integral is an exact sum over the
intervals between events. Derivatives are ordered (beta*, pi, p).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from sir_ident.errors import DegenerateIntegral, LogDomainError
from sir_ident.model.gillespie import EventKind, EventLog

logger = logging.getLogger(__name__)

FD_RELATIVE_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class LikelihoodInput:
    """Observed reported data on [0, horizon].

    Attributes:
        n (int): Population size.
        horizon (float): End of the observation window.
        gamma (float): Known recovery rate.
        infection_times (np.ndarray): Reported infection times t_i, increasing.
        prevalence_before (np.ndarray): I_r just before each t_i.
        n1_before (np.ndarray): N1 just before each t_i (0, 1, 2, ...).
        segment_durations (np.ndarray): Lengths of the intervals on which I_r and N1 are constant.
        segment_ir (np.ndarray): I_r on each interval.
        segment_n1 (np.ndarray): N1 on each interval.
    """
    n: int
    horizon: float
    gamma: float
    infection_times: np.ndarray
    prevalence_before: np.ndarray
    n1_before: np.ndarray
    segment_durations: np.ndarray
    segment_ir: np.ndarray
    segment_n1: np.ndarray

    def __post_init__(self):
        if np.any(self.prevalence_before < 1):
            raise ValueError("every reported infection needs at least one reported infectious individual")
        if np.any(self.segment_durations < 0.0):
            raise ValueError("segment durations must be non-negative")

    @property
    def reported_count(self) -> int:
        return len(self.infection_times)

    def prevalence_integral(self) -> float:
        """int_0^t I_r(s) ds."""
        return float(np.dot(self.segment_ir, self.segment_durations))

    def weighted_prevalence_integral(self) -> float:
        """int_0^t I_r(s) N1(s)/n ds."""
        return float(np.dot(self.segment_ir * self.segment_n1, self.segment_durations)) / self.n


def likelihood_input_from_log(log: EventLog, gamma: float, horizon: float | None = None) -> LikelihoodInput:
    """Extract the reported data of a simulated epidemic.

    Args:
        log (EventLog): Simulated epidemic; only I_r and the reported infections are used.
        gamma (float): Known recovery rate.
        horizon (float, optional): End of the window. Defaults to the last event
            time, cut back to the first reported infection that happens while
            I_r = 0 (the reported data cannot explain such an event).

    Raises:
        LogDomainError: If an explicit horizon covers a reported infection with I_r = 0.
    """
    all_times = log.all_times
    ir = log.all_states[:, 1]
    n1 = log.counts()[:, 0]
    reported = np.flatnonzero(log.kinds == EventKind.REPORTED_INFECTION)
    # row k of all_states is the state just before event k
    unexplained = reported[ir[reported] < 1]

    if horizon is None:
        horizon = float(all_times[-1])
        if unexplained.size:
            horizon = float(log.times[unexplained[0]])
            logger.warning("reported infection at t=%.6g with no reported infectious; window cut there", horizon)
            reported = reported[reported < unexplained[0]]
    else:
        horizon = float(horizon)
        if np.any(log.times[unexplained] <= horizon):
            raise LogDomainError("a reported infection in the window happened with I_r = 0")
        reported = reported[log.times[reported] <= horizon]

    # segments start at 0 and at every event strictly before the horizon
    starts = all_times[all_times < horizon] if horizon > 0.0 else all_times[:1]
    ends = np.append(starts[1:], horizon)
    rows = np.arange(len(starts))

    return LikelihoodInput(
        n=log.n,
        horizon=horizon,
        gamma=float(gamma),
        infection_times=log.times[reported].astype(float),
        prevalence_before=ir[reported].astype(float),
        n1_before=n1[reported].astype(float),
        segment_durations=ends - starts,
        segment_ir=ir[rows].astype(float),
        segment_n1=n1[rows].astype(float),
    )


@dataclass(frozen=True, slots=True)
class _Terms:
    k: float
    susceptible: float
    j: float
    a: float
    b: float
    g: np.ndarray
    m: np.ndarray


def _terms(data: LikelihoodInput, beta_star: float, p: float, pi: float) -> _Terms:
    if not (beta_star > 0.0 and 0.0 < p < 1.0 and 0.0 <= pi < 1.0):
        raise LogDomainError(f"(beta*={beta_star}, p={p}, pi={pi}) is outside beta* > 0, 0 < p < 1, 0 <= pi < 1")
    susceptible = 1.0 - pi
    m = data.n1_before / data.n
    g = susceptible - m / p
    if np.any(g <= 0.0):
        raise LogDomainError(f"(1 - pi) - N1/(n p) <= 0 at {int(np.sum(g <= 0.0))} reported infections "
                             f"for p={p:.6g}, pi={pi:.6g}")
    j = float(np.sum(np.log(beta_star * data.prevalence_before * g / p)))
    return _Terms(k=float(data.reported_count), susceptible=susceptible, j=j,
                  a=data.prevalence_integral(), b=data.weighted_prevalence_integral(), g=g, m=m)


def log_likelihood(data: LikelihoodInput, beta_star: float, p: float, pi: float) -> float:
    """Evaluate the approximate log-likelihood, up to an additive constant.

    Raises:
        LogDomainError: If any logarithm has a non-positive argument.
    """
    t = _terms(data, beta_star, p, pi)
    survival = beta_star / p * (t.susceptible * t.a - t.b / p)
    return t.k * math.log(p) + (1.0 - p) / p * t.k * math.log1p(-p) + t.j / p - survival


def gradient(data: LikelihoodInput, beta_star: float, p: float, pi: float) -> np.ndarray:
    """Partial derivatives with respect to (beta*, pi, p)."""
    t = _terms(data, beta_star, p, pi)
    log_q = math.log1p(-p)
    d_beta = t.k / (p * beta_star) - (t.susceptible * t.a - t.b / p) / p
    d_pi = -np.sum(1.0 / t.g) / p + beta_star * t.a / p
    d_p = (-t.k * log_q / p ** 2 - t.j / p ** 2 + np.sum(t.m / t.g) / p ** 3 - t.k / p ** 2
           + beta_star * t.susceptible * t.a / p ** 2 - 2.0 * beta_star * t.b / p ** 3)
    return np.array([d_beta, d_pi, d_p])


def hessian(data: LikelihoodInput, beta_star: float, p: float, pi: float) -> np.ndarray:
    """Symmetric matrix of second partial derivatives, ordered (beta*, pi, p)."""
    t = _terms(data, beta_star, p, pi)
    k, q, a, b = t.k, t.susceptible, t.a, t.b
    inv_g = 1.0 / t.g
    inv_g2 = inv_g ** 2
    sum_m_g = float(np.sum(t.m * inv_g))
    sum_m2_g2 = float(np.sum(t.m ** 2 * inv_g2))

    bb = -k / (p * beta_star ** 2)
    b_pi = a / p
    b_p = -k / (p ** 2 * beta_star) + (q * a - 2.0 * b / p) / p ** 2
    pi_pi = -float(np.sum(inv_g2)) / p
    pi_p = q * float(np.sum(inv_g2)) / p ** 2 - beta_star * a / p ** 2
    p_p = (k / ((1.0 - p) * p ** 2) + 2.0 * k * math.log1p(-p) / p ** 3 + 2.0 * t.j / p ** 3 + 3.0 * k / p ** 3
           - 4.0 * sum_m_g / p ** 4 - sum_m2_g2 / p ** 5
           - 2.0 * beta_star * q * a / p ** 3 + 6.0 * beta_star * b / p ** 4)
    return np.array([
        [bb, b_pi, b_p],
        [b_pi, pi_pi, pi_p],
        [b_p, pi_p, p_p],
    ])


def beta_star_mle(data: LikelihoodInput, p: float, pi: float) -> float:
    """Maximizer in beta* for fixed (p, pi): N1(t) / int I_r(s)((1 - pi) - N1(s)/(n p)) ds.

    Raises:
        DegenerateIntegral: If the integral is not positive.
    """
    integral = (1.0 - pi) * data.prevalence_integral() - data.weighted_prevalence_integral() / p
    if not integral > 0.0:
        raise DegenerateIntegral(f"survival integral is {integral:.6g} at p={p:.6g}, pi={pi:.6g}")
    return data.reported_count / integral


def _partial(fn, x: np.ndarray, j: int, rel_step: float):
    """Second-order difference of ``fn`` along coordinate ``j``.

    Central where possible; one-sided forward when the backward point would
    leave the closed lower bound (pi = 0).
    """
    h = rel_step * max(abs(x[j]), 1e-2)

    def at(offset):
        shifted = x.copy()
        shifted[j] += offset
        return fn(shifted)

    if x[j] - h < 0.0:
        return (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h)
    return (at(h) - at(-h)) / (2.0 * h)


def finite_difference_gradient(data: LikelihoodInput, point, rel_step: float = FD_RELATIVE_STEP) -> np.ndarray:
    """Finite differences of :func:`log_likelihood` at ``point`` = (beta*, pi, p)."""
    x = np.asarray(point, dtype=float)

    def value(y):
        return log_likelihood(data, y[0], y[2], y[1])

    return np.array([_partial(value, x, j, rel_step) for j in range(3)])


def finite_difference_hessian(data: LikelihoodInput, point, rel_step: float = FD_RELATIVE_STEP) -> np.ndarray:
    """Finite differences of the analytic :func:`gradient` at ``point`` = (beta*, pi, p)."""
    x = np.asarray(point, dtype=float)

    def slope(y):
        return gradient(data, y[0], y[2], y[1])

    return np.column_stack([_partial(slope, x, j, rel_step) for j in range(3)])


def max_relative_error(analytic, reference) -> float:
    """max |a - b| / max(1, |b|) over all entries."""
    analytic = np.asarray(analytic, dtype=float)
    reference = np.asarray(reference, dtype=float)
    return float(np.max(np.abs(analytic - reference) / np.maximum(1.0, np.abs(reference))))
