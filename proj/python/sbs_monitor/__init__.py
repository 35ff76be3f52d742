"""Python bindings for the spectrum broadcast structure monitor."""

import json as _json

from ._core import (
    ConfigError,
    SpinParams,
    __version__,
    broadcast_entropy_bound,
    chernoff_bound,
    decoherence_factor,
    default_config,
    lln_exponents,
    local_success_probability,
    macrofraction_fidelity,
    majority_success,
    majority_success_heterogeneous,
    scenario_names,
    time_scales,
    verify,
)
from ._core import run_scenario as _run_scenario


def run_scenario(name, config=None, out_dir="out"):
    """Run a named scenario. `config` may be a dict or JSON text."""
    if isinstance(config, dict):
        config = _json.dumps(config)
    return _run_scenario(name, config or "", str(out_dir))


__all__ = [
    "ConfigError",
    "SpinParams",
    "__version__",
    "broadcast_entropy_bound",
    "chernoff_bound",
    "decoherence_factor",
    "default_config",
    "lln_exponents",
    "local_success_probability",
    "macrofraction_fidelity",
    "majority_success",
    "majority_success_heterogeneous",
    "run_scenario",
    "scenario_names",
    "time_scales",
    "verify",
]
