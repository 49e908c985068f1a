"""Run Settings controller."""

from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Literal, Mapping, Optional

from coopnet_energy.exceptions import ValidationError
from coopnet_energy.params.schema import coerce_field, get_defaults, load_schema, schema_path

SCHEMA_FILE = "run_settings.json"

OutageModel = Literal["joint", "product"]


def get_run_schema() -> Dict[str, dict]:
    """Field records of run_settings.json keyed by fieldname."""
    return load_schema(schema_path(SCHEMA_FILE))


@dataclass(frozen=True)
class RunSettings:
    """Settings for sweep execution and analytic/Monte Carlo validation."""

    workers: int = 1
    mrc_outage_model: OutageModel = "joint"
    quad_tol: float = 1e-10
    max_rounds: int = 1_000_000
    z_threshold: float = 3.0
    pass_fraction: float = 0.99

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Validate settings before use."""
        schema = get_run_schema()
        for f in fields(self):
            object.__setattr__(self, f.name, coerce_field(schema[f.name], getattr(self, f.name)))

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def replace(self, **changes) -> "RunSettings":
        return replace(self, **changes)


def get_run_settings(overrides: Optional[Mapping[str, Any]] = None) -> RunSettings:
    """
    Get run settings, falling back to schema defaults.

    Args:
        overrides: {fieldname: value, ...} taking precedence over defaults

    Returns:
        RunSettings
    """
    schema = get_run_schema()
    overrides = dict(overrides or {})

    unknown = sorted(set(overrides) - set(schema))
    if unknown:
        raise ValidationError(f"Unknown run setting: {unknown[0]}", key=unknown[0])

    settings = get_defaults(schema)
    settings.update(overrides)
    return RunSettings(**settings)
