"""Building configurations and domain objects from files and the environment."""
from __future__ import annotations

import json
import logging
import os
from pathlib import Path

from dotenv import load_dotenv
from yacs.config import CfgNode

from sir_ident.config.defaults import _C
from sir_ident.errors import ConfigError, InvalidParameters
from sir_ident.model.parameters import InitialConditions, ModelParams

logger = logging.getLogger(__name__)

PARAM_KEYS = ("beta_r", "beta_u", "p", "pi", "gamma", "n", "i0")

# JSON key -> (config group, config key)
_PARAM_TARGETS = {
    "beta_r": ("MODEL", "BETA_R"),
    "beta_u": ("MODEL", "BETA_U"),
    "p": ("MODEL", "P"),
    "pi": ("MODEL", "PI"),
    "gamma": ("MODEL", "GAMMA"),
    "n": ("INIT", "N"),
    "i0": ("INIT", "I0"),
}


def get_cfg_defaults() -> CfgNode:
    """A fresh, mutable copy of the default configuration."""
    return _C.clone()


def apply_env_overrides(cfg: CfgNode) -> CfgNode:
    """Read ``.env`` and apply SIR_IDENT_RESULTS_DB / SIR_IDENT_NUM_WORKERS to ``cfg``."""
    load_dotenv()
    results_db = os.getenv("SIR_IDENT_RESULTS_DB")
    if results_db:
        cfg.RESULTS_DB = results_db
    workers = os.getenv("SIR_IDENT_NUM_WORKERS")
    if workers:
        try:
            cfg.EXPERIMENT.NUM_WORKERS = int(workers)
        except ValueError as e:
            raise ConfigError(f"SIR_IDENT_NUM_WORKERS must be an integer, got {workers!r}") from e
    return cfg


def load_config(config_file: str | Path | None = None, opts: list | None = None,
                params_file: str | Path | None = None) -> CfgNode:
    """Defaults, then the YAML file, then the environment, then a JSON parameter file, then ``opts``.

    Returns:
        CfgNode: A frozen configuration.
    """
    cfg = get_cfg_defaults()
    if config_file:
        try:
            cfg.merge_from_file(str(config_file))
        except (KeyError, FileNotFoundError) as e:
            raise ConfigError(f"cannot merge {config_file}: {e}") from e
    apply_env_overrides(cfg)
    if params_file:
        merge_params_json(cfg, params_file)
    if opts:
        try:
            cfg.merge_from_list(list(opts))
        except (KeyError, AssertionError, ValueError) as e:
            raise ConfigError(f"bad override {opts}: {e}") from e
    cfg.freeze()
    return cfg


def read_params_json(path: str | Path) -> dict:
    """Read a JSON parameter file; keys must be a subset of :data:`PARAM_KEYS`."""
    try:
        with open(path) as f:
            values = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(values, dict):
        raise ConfigError(f"{path} must contain a JSON object")
    unknown = sorted(set(values) - set(PARAM_KEYS))
    if unknown:
        raise ConfigError(f"unknown parameter keys in {path}: {', '.join(unknown)}")
    for key, value in values.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
    if "n" in values:
        n = values["n"]
        if float(n) != int(n):
            raise ConfigError(f"n must be a whole number, got {n}")
        values["n"] = int(n)
    return values


def merge_params_json(cfg: CfgNode, path: str | Path) -> CfgNode:
    for key, value in read_params_json(path).items():
        group, name = _PARAM_TARGETS[key]
        setattr(cfg[group], name, type(cfg[group][name])(value))
    logger.debug("merged parameters from %s", path)
    return cfg


def params_from_cfg(cfg: CfgNode) -> ModelParams:
    try:
        return ModelParams(beta_r=float(cfg.MODEL.BETA_R), beta_u=float(cfg.MODEL.BETA_U), p=float(cfg.MODEL.P),
                           pi=float(cfg.MODEL.PI), gamma=float(cfg.MODEL.GAMMA))
    except InvalidParameters as e:
        raise ConfigError(str(e)) from e


def initial_conditions_from_cfg(cfg: CfgNode) -> InitialConditions:
    try:
        return InitialConditions(n=int(cfg.INIT.N), i0=float(cfg.INIT.I0))
    except InvalidParameters as e:
        raise ConfigError(str(e)) from e


def load_params_json(path: str | Path) -> tuple[ModelParams, InitialConditions]:
    """Model parameters and initial conditions from a JSON file; missing keys take the defaults."""
    cfg = merge_params_json(get_cfg_defaults(), path)
    return params_from_cfg(cfg), initial_conditions_from_cfg(cfg)
