from .loader import (
    PARAM_KEYS,
    apply_env_overrides,
    get_cfg_defaults,
    initial_conditions_from_cfg,
    load_config,
    load_params_json,
    merge_params_json,
    params_from_cfg,
    read_params_json,
)
