"""Exact stochastic simulation of the SIR model with under-reporting.

One event per iteration, Gillespie style: the four event rates are

    a1 = p * lambda * S / n          reported infection
    a2 = (1 - p) * lambda * S / n    unreported infection
    a3 = gamma * I_r                 reported recovery
    a4 = gamma * I_u                 unreported recovery

with lambda = beta_r * I_r + beta_u * I_u. The waiting time is exponential
with rate a1 + a2 + a3 + a4 and the event is picked by scanning the
cumulative rates in that fixed order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
import pandas as pd

from sir_ident.errors import NotExtinct
from sir_ident.model.parameters import CompartmentState, InitialConditions, ModelParams, initial_compartments
from sir_ident.util.seeding import SeededRng

logger = logging.getLogger(__name__)

# draws are taken from the generator in blocks of this size
_DRAW_BLOCK = 4096


class EventKind(IntEnum):
    REPORTED_INFECTION = 0
    UNREPORTED_INFECTION = 1
    REPORTED_RECOVERY = 2
    UNREPORTED_RECOVERY = 3

    @property
    def code(self) -> str:
        return _KIND_CODES[self]

    @classmethod
    def from_code(cls, code: str) -> EventKind:
        return _CODE_KINDS[code]


_KIND_CODES = {
    EventKind.REPORTED_INFECTION: "RI",
    EventKind.UNREPORTED_INFECTION: "UI",
    EventKind.REPORTED_RECOVERY: "RR",
    EventKind.UNREPORTED_RECOVERY: "UR",
}
_CODE_KINDS = {code: kind for kind, code in _KIND_CODES.items()}

# column of each kind in the (N1, N2, N3, N4) counting matrix:
# N1 reported infections, N2 reported recoveries, N3 unreported infections, N4 unreported recoveries
_COUNTER_COLUMN = np.array([0, 2, 1, 3])

# state change applied by each kind, in (S, I_r, I_u, R_r, R_u) order
_STOICHIOMETRY = np.array([
    [-1, 1, 0, 0, 0],
    [-1, 0, 1, 0, 0],
    [0, -1, 0, 1, 0],
    [0, 0, -1, 0, 1],
], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class EventLog:
    """Time-stamped events of one simulated epidemic.

    Stored column-wise: ``times[k]``, ``kinds[k]`` and ``states[k]`` (the
    state right after event ``k``, in S, I_r, I_u, R_r, R_u order).

    Attributes:
        initial_state (CompartmentState): State at time 0.
        n (int): Population size.
        times (np.ndarray): Event times, strictly increasing.
        kinds (np.ndarray): ``EventKind`` values as small integers.
        states (np.ndarray): Integer array of shape (k, 5).
    """
    initial_state: CompartmentState
    n: int
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    kinds: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int8))
    states: np.ndarray = field(default_factory=lambda: np.empty((0, 5), dtype=np.int64))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def all_times(self) -> np.ndarray:
        """Event times with a leading 0 for the initial state."""
        return np.concatenate(([0.0], self.times))

    @property
    def all_states(self) -> np.ndarray:
        """States with the initial state as row 0, shape (k + 1, 5)."""
        initial = self.initial_state.as_array(dtype=np.int64)[None, :]
        return np.vstack((initial, self.states.reshape(-1, 5)))

    @property
    def final_state(self) -> CompartmentState:
        if len(self) == 0:
            return self.initial_state
        return CompartmentState.from_array(self.states[-1].tolist())

    @property
    def is_extinct(self) -> bool:
        return self.final_state.infectious == 0

    def counts(self) -> np.ndarray:
        """Cumulative N1..N4 after each event, with a zero row 0; shape (k + 1, 4)."""
        counts = np.zeros((len(self) + 1, 4), dtype=np.int64)
        if len(self):
            one_hot = np.zeros((len(self), 4), dtype=np.int64)
            one_hot[np.arange(len(self)), _COUNTER_COLUMN[self.kinds.astype(np.int64)]] = 1
            counts[1:] = np.cumsum(one_hot, axis=0)
        return counts


@dataclass(frozen=True, eq=False)
class CountingPaths:
    """Right-continuous step functions N1..N4 with jumps at ``times``."""
    times: np.ndarray
    values: np.ndarray

    def at(self, t) -> np.ndarray:
        """N1..N4 at time(s) ``t``; shape (4,) for a scalar, (m, 4) for an array."""
        index = np.searchsorted(self.times, t, side="right") - 1
        return self.values[np.maximum(index, 0)]

    def n1(self, t):
        return self.at(t)[..., 0]


def simulate(params: ModelParams, init: InitialConditions, end_time: float = math.inf,
             rng: SeededRng | None = None, initial_state: CompartmentState | None = None) -> EventLog:
    """Simulate one epidemic until extinction or ``end_time``.

    Args:
        params (ModelParams): Model parameters.
        init (InitialConditions): Population size and initial reported fraction.
        end_time (float): Horizon; an event sampled after it is not applied.
        rng (SeededRng): Random stream; defaults to seed 0.
        initial_state (CompartmentState, optional): Overrides the state built
            from ``init``. Must sum to ``init.n``.

    Returns:
        EventLog: The recorded events.
    """
    if end_time <= 0:
        raise ValueError(f"end_time must be positive, got {end_time}")
    if initial_state is None:
        initial_state = initial_compartments(params, init, integer=True)
    elif initial_state.total != init.n:
        raise ValueError(f"initial state sums to {initial_state.total}, expected {init.n}")

    rng = rng if rng is not None else SeededRng(0)
    generator = rng.generator()

    n = init.n
    beta_r, beta_u, p, gamma = params.beta_r, params.beta_u, params.p, params.gamma
    s, i_r, i_u, r_r, r_u = (int(v) for v in (initial_state.s, initial_state.i_r, initial_state.i_u,
                                             initial_state.r_r, initial_state.r_u))

    times: list[float] = []
    kinds: list[int] = []
    rows: list[tuple[int, int, int, int, int]] = []
    waits: list[float] = []
    picks: list[float] = []
    draw = 0

    t = 0.0
    while t < end_time and i_r + i_u > 0:
        force = (beta_r * i_r + beta_u * i_u) * s / n
        a1 = p * force
        a2 = (1.0 - p) * force
        a3 = gamma * i_r
        a4 = gamma * i_u
        a_total = a1 + a2 + a3 + a4

        if draw == len(waits):
            waits = generator.standard_exponential(_DRAW_BLOCK).tolist()
            picks = generator.random(_DRAW_BLOCK).tolist()
            draw = 0
        t += waits[draw] / a_total
        threshold = picks[draw] * a_total
        draw += 1
        if t > end_time:
            break

        if threshold < a1:
            s -= 1
            i_r += 1
            kind = EventKind.REPORTED_INFECTION
        elif threshold < a1 + a2:
            s -= 1
            i_u += 1
            kind = EventKind.UNREPORTED_INFECTION
        elif threshold < a1 + a2 + a3:
            i_r -= 1
            r_r += 1
            kind = EventKind.REPORTED_RECOVERY
        else:
            i_u -= 1
            r_u += 1
            kind = EventKind.UNREPORTED_RECOVERY

        times.append(t)
        kinds.append(kind)
        rows.append((s, i_r, i_u, r_r, r_u))

    logger.debug("simulated %d events up to t=%.4g (seed %d)", len(times), t, rng.seed)
    return EventLog(
        initial_state=initial_state,
        n=n,
        times=np.asarray(times, dtype=float),
        kinds=np.asarray(kinds, dtype=np.int8),
        states=np.asarray(rows, dtype=np.int64).reshape(-1, 5),
    )


def counting_paths(log: EventLog) -> CountingPaths:
    """N1..N4 as right-continuous step functions with N(0) = 0."""
    return CountingPaths(times=log.all_times, values=log.counts())


def final_reported_fraction(log: EventLog) -> float:
    """Final fraction of the population with a reported infection, N1(inf)/n.

    Raises:
        NotExtinct: If infectious individuals remain at the end of the log.
    """
    if not log.is_extinct:
        raise NotExtinct(f"{log.final_state.infectious} infectious individuals remain at t={log.all_times[-1]:.6g}")
    n1 = int(np.count_nonzero(log.kinds == EventKind.REPORTED_INFECTION))
    return n1 / log.n


def replay_events(initial_state: CompartmentState, n: int, times, kinds) -> EventLog:
    """Rebuild an EventLog from event times and kinds alone.

    Raises:
        ValueError: If times are not strictly increasing or a compartment
            would go negative.
    """
    times = np.asarray(times, dtype=float)
    kinds = np.asarray([int(k) for k in kinds], dtype=np.int8)
    if len(times) != len(kinds):
        raise ValueError("times and kinds must have the same length")
    if len(times) and (times[0] <= 0.0 or np.any(np.diff(times) <= 0.0)):
        raise ValueError("event times must be positive and strictly increasing")
    start = initial_state.as_array(dtype=np.int64)
    states = start + np.cumsum(_STOICHIOMETRY[kinds.astype(np.int64)], axis=0) if len(kinds) else np.empty((0, 5), dtype=np.int64)
    if np.any(states < 0):
        raise ValueError("event sequence drives a compartment negative")
    return EventLog(initial_state=initial_state, n=n, times=times, kinds=kinds, states=states.reshape(-1, 5))


def compartment_table(log: EventLog) -> pd.DataFrame:
    """Aggregated compartments and counting processes over time.

    Columns: time, S, I (= I_r + I_u), R (= R_r + R_u), N1..N4.
    """
    states = log.all_states
    counts = log.counts()
    return pd.DataFrame({
        "time": log.all_times,
        "S": states[:, 0],
        "I": states[:, 1] + states[:, 2],
        "R": states[:, 3] + states[:, 4],
        "N1": counts[:, 0],
        "N2": counts[:, 1],
        "N3": counts[:, 2],
        "N4": counts[:, 3],
    })
