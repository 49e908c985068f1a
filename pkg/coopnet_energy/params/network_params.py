"""Network Params controller - radio and circuit constants and relay geometry."""

from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional

from coopnet_energy.exceptions import ValidationError
from coopnet_energy.params.schema import coerce_field, get_defaults, load_schema, schema_path

SCHEMA_FILE = "network_params.json"


def get_network_schema() -> Dict[str, dict]:
    """Field records of network_params.json keyed by fieldname."""
    return load_schema(schema_path(SCHEMA_FILE))


@dataclass(frozen=True)
class NetworkParams:
    """Radio, circuit and protocol constants shared by every scheme."""

    p_t: float
    n_0: float
    beta: float
    l_bits: int
    bandwidth_b: float
    p_tr: float
    t_tr: float
    p_ct: float
    p_cr: float
    eta: float
    target_ber: float
    carrier_freq: float = 2.5e9

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Coerce every field and enforce its bounds."""
        schema = get_network_schema()
        for f in fields(self):
            value = coerce_field(schema[f.name], getattr(self, f.name))
            object.__setattr__(self, f.name, value)

    @classmethod
    def from_dict(cls, values: Optional[Mapping[str, Any]] = None) -> "NetworkParams":
        """
        Build parameters from a partial mapping; missing keys take the schema defaults.

        Args:
            values: {fieldname: value, ...}

        Raises:
            ValidationError: On unknown keys or invariant violations
        """
        values = dict(values or {})
        schema = get_network_schema()

        unknown = sorted(set(values) - set(schema))
        if unknown:
            raise ValidationError(f"Unknown network parameter: {unknown[0]}", key=unknown[0])

        merged = get_defaults(schema)
        merged.update(values)
        return cls(**merged)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def replace(self, **changes) -> "NetworkParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Geometry:
    """
    Collinear relay placement.

    The relay sits on the source-destination segment at fraction
    relay_frac of the S-D distance from the source.
    """

    d_sd: float
    relay_frac: float = 0.5

    def __post_init__(self):
        if not (self.d_sd > 0):
            raise ValidationError(f"d_sd must be positive, got {self.d_sd}", key="d_sd")
        if not (0 < self.relay_frac < 1):
            raise ValidationError(
                f"relay_frac must lie strictly between 0 and 1, got {self.relay_frac}",
                key="relay_frac",
            )

    @property
    def d_sr(self) -> float:
        return self.relay_frac * self.d_sd

    @property
    def d_rd(self) -> float:
        return (1 - self.relay_frac) * self.d_sd

    def reflected(self) -> "Geometry":
        """Same link with the relay mirrored about the midpoint."""
        return Geometry(self.d_sd, 1 - self.relay_frac)


def get_default_params() -> NetworkParams:
    """
    Get the default parameter set.

    Returns:
        NetworkParams with every field at its schema default
    """
    return NetworkParams.from_dict({})
