"""Model parameters, derived epidemiological quantities and initial conditions.

Everything here is pure: values are validated once when they are built and
the functions below assume validity afterwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from sir_ident.errors import InfeasibleInitialState, InvalidParameters


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Rates and fractions of the SIR model with under-reporting and prior immunity.

    Attributes:
        beta_r (float): Infectious-contact rate of reported individuals.
        beta_u (float): Infectious-contact rate of unreported individuals.
        p (float): Reporting fraction, in (0, 1].
        pi (float): Initially immune fraction, in [0, 1).
        gamma (float): Recovery rate, > 0.
    """
    beta_r: float
    beta_u: float
    p: float
    pi: float
    gamma: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise InvalidParameters(f"{f.name} must be finite, got {value}")
        if not 0.0 < self.p <= 1.0:
            raise InvalidParameters(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 <= self.pi < 1.0:
            raise InvalidParameters(f"pi must lie in [0, 1), got {self.pi}")
        if self.beta_r < 0.0 or self.beta_u < 0.0:
            raise InvalidParameters("beta_r and beta_u must be non-negative")
        if self.gamma <= 0.0:
            raise InvalidParameters(f"gamma must be positive, got {self.gamma}")

    @classmethod
    def from_effective(cls, beta_star: float, p: float, pi: float, gamma: float) -> ModelParams:
        """Build a parameter set from the effective rate alone (beta_r = beta_u = beta*).

        Only beta* enters the deterministic equations, so this is the natural
        constructor for deterministic and identifiability work.
        """
        return cls(beta_r=beta_star, beta_u=beta_star, p=p, pi=pi, gamma=gamma)

    @property
    def beta_star(self) -> float:
        return effective_beta(self)

    def with_effective(self, beta_star: float) -> ModelParams:
        """Return a copy whose effective rate is ``beta_star``.

        beta_r and beta_u are scaled by a common factor, so their ratio is kept
        whenever the current effective rate is positive.
        """
        current = self.beta_star
        if current > 0.0:
            scale = beta_star / current
            return ModelParams(self.beta_r * scale, self.beta_u * scale, self.p, self.pi, self.gamma)
        return ModelParams.from_effective(beta_star, self.p, self.pi, self.gamma)

    def to_dict(self) -> dict:
        return {"beta_r": self.beta_r, "beta_u": self.beta_u, "p": self.p, "pi": self.pi, "gamma": self.gamma}


@dataclass(frozen=True, slots=True)
class DerivedRates:
    """Quantities derived from :class:`ModelParams`.

    Attributes:
        beta_star (float): Effective infection rate.
        r0 (float): Basic reproduction number beta*/gamma.
        re (float): Effective reproduction number beta*(1 - pi)/gamma.
        rho (float): Initial exponential growth rate beta*(1 - pi) - gamma.
    """
    beta_star: float
    r0: float
    re: float
    rho: float


@dataclass(frozen=True, slots=True)
class InitialConditions:
    """Population size and the initially reported infectious fraction.

    The unreported initial fraction is not a free input: it is always
    (1 - p)/p * i0.
    """
    n: int
    i0: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameters(f"population size must be at least 1, got {self.n}")
        if not (math.isfinite(self.i0) and self.i0 > 0.0):
            raise InvalidParameters(f"i0 must be positive, got {self.i0}")


@dataclass(frozen=True, slots=True)
class CompartmentState:
    """Occupancies of the five compartments.

    Integers for stochastic use, non-negative reals for deterministic use.
    """
    s: float
    i_r: float
    i_u: float
    r_r: float
    r_u: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value >= 0:
                raise InvalidParameters(f"compartment {f.name} must be non-negative, got {value}")

    @property
    def total(self) -> float:
        return self.s + self.i_r + self.i_u + self.r_r + self.r_u

    @property
    def infectious(self) -> float:
        return self.i_r + self.i_u

    def as_array(self, dtype=float) -> np.ndarray:
        return np.array([self.s, self.i_r, self.i_u, self.r_r, self.r_u], dtype=dtype)

    @classmethod
    def from_array(cls, values) -> CompartmentState:
        s, i_r, i_u, r_r, r_u = values
        return cls(s, i_r, i_u, r_r, r_u)


def effective_beta(params: ModelParams) -> float:
    """Effective infection rate beta* = p*beta_r + (1 - p)*beta_u."""
    return params.p * params.beta_r + (1.0 - params.p) * params.beta_u


def derived_rates(params: ModelParams) -> DerivedRates:
    """Compute beta*, R0, RE and the initial growth rate rho.

    Args:
        params (ModelParams): A valid parameter set.

    Returns:
        DerivedRates: The derived quantities. ``re`` is computed as
        ``r0 * (1 - pi)`` and ``rho`` as ``gamma * (re - 1)`` so the two
        identities hold exactly in floating point.
    """
    beta_star = effective_beta(params)
    r0 = beta_star / params.gamma
    re = r0 * (1.0 - params.pi)
    rho = params.gamma * (re - 1.0)
    return DerivedRates(beta_star=beta_star, r0=r0, re=re, rho=rho)


def initial_compartments(params: ModelParams, init: InitialConditions, integer: bool = False) -> CompartmentState:
    """Initial compartment occupancies.

    Args:
        params (ModelParams): Model parameters (uses p and pi).
        init (InitialConditions): Population size and reported initial fraction.
        integer (bool): Round to whole individuals for stochastic simulation.
            The four non-susceptible compartments are rounded to the nearest
            integer and S(0) takes the residual so the total is exactly n.

    Returns:
        CompartmentState: The initial state.

    Raises:
        InfeasibleInitialState: If S(0) would be negative.
    """
    n, p, pi = init.n, params.p, params.pi
    if init.i0 / p + pi >= 1.0:
        raise InfeasibleInitialState(
            f"i0/p + pi = {init.i0 / p + pi:.6g} leaves no susceptibles (needs < 1)")

    i_r = n * init.i0
    i_u = n * (1.0 - p) / p * init.i0
    r_r = n * p * pi
    r_u = n * (1.0 - p) * pi
    if not integer:
        s = n * (1.0 - pi) - n * init.i0 / p
        return CompartmentState(s, i_r, i_u, r_r, r_u)

    i_r, i_u, r_r, r_u = (int(round(v)) for v in (i_r, i_u, r_r, r_u))
    s = n - i_r - i_u - r_r - r_u
    if s < 0:
        raise InfeasibleInitialState(f"rounded initial state leaves S(0) = {s}")
    return CompartmentState(s, i_r, i_u, r_r, r_u)
