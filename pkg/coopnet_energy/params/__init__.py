"""Parameter sets and settings for coopnet_energy."""

from coopnet_energy.params.network_params import (
    Geometry,
    NetworkParams,
    get_default_params,
    get_network_schema,
)
from coopnet_energy.params.run_settings import (
    OutageModel,
    RunSettings,
    get_run_schema,
    get_run_settings,
)

__all__ = [
    "Geometry",
    "NetworkParams",
    "get_default_params",
    "get_network_schema",
    "OutageModel",
    "RunSettings",
    "get_run_schema",
    "get_run_settings",
]
