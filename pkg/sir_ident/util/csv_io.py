"""CSV codecs for event logs, deterministic paths and tables.

Floats are written with 17 significant digits and read back with pandas'
round-trip parser, so a file reproduces the doubles it was written from.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from sir_ident.errors import ConfigError
from sir_ident.model.gillespie import EventKind, EventLog, replay_events
from sir_ident.model.parameters import CompartmentState

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
EVENT_LOG_COLUMNS = ["time", "kind", "S", "Ir", "Iu", "Rr", "Ru", "N1", "N2", "N3", "N4"]
_STATE_COLUMNS = ["S", "Ir", "Iu", "Rr", "Ru"]
_INIT_KIND = "INIT"


def write_frame(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def read_frame(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def event_log_frame(log: EventLog) -> pd.DataFrame:
    """One row per event after an ``INIT`` row holding the state at time 0."""
    codes = [_INIT_KIND] + [EventKind(int(k)).code for k in log.kinds]
    frame = pd.DataFrame(log.all_states, columns=_STATE_COLUMNS)
    frame.insert(0, "kind", codes)
    frame.insert(0, "time", log.all_times)
    counts = log.counts()
    for j, name in enumerate(["N1", "N2", "N3", "N4"]):
        frame[name] = counts[:, j]
    return frame


def write_event_log_csv(log: EventLog, path: str | Path) -> Path:
    return write_frame(event_log_frame(log), path)


def read_event_log_csv(path: str | Path) -> EventLog:
    """Rebuild an EventLog from its CSV, checking the stored states against a replay.

    Raises:
        ConfigError: If the header, the INIT row or the stored states are inconsistent.
    """
    frame = read_frame(path)
    if list(frame.columns) != EVENT_LOG_COLUMNS:
        raise ConfigError(f"{path}: expected header {','.join(EVENT_LOG_COLUMNS)}")
    if frame.empty or frame["kind"].iloc[0] != _INIT_KIND:
        raise ConfigError(f"{path}: first row must be the INIT state")

    initial = CompartmentState.from_array([int(v) for v in frame[_STATE_COLUMNS].iloc[0]])
    events = frame.iloc[1:]
    try:
        kinds = [EventKind.from_code(code) for code in events["kind"]]
    except KeyError as e:
        raise ConfigError(f"{path}: unknown event kind {e}") from e
    try:
        log = replay_events(initial, int(initial.total), events["time"].to_numpy(dtype=float), kinds)
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e
    if not np.array_equal(log.states, events[_STATE_COLUMNS].to_numpy(dtype=np.int64).reshape(-1, 5)):
        raise ConfigError(f"{path}: stored compartments disagree with the event sequence")
    return log
