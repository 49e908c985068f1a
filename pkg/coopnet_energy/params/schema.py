"""Field schemas backing the parameter controllers."""

import json
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

from coopnet_energy.exceptions import ValidationError


@lru_cache(maxsize=None)
def load_schema(path: str) -> Dict[str, dict]:
    """
    Load a field schema JSON file.

    Args:
        path: Path of the schema file

    Returns:
        {fieldname: field_record, ...} in field_order
    """
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)

    by_name = {field["fieldname"]: field for field in doc["fields"]}
    return {name: by_name[name] for name in doc.get("field_order", by_name)}


def schema_path(filename: str) -> str:
    """Internal: Absolute path of a schema shipped next to this module."""
    return str(Path(__file__).with_name(filename))


def get_defaults(schema: Dict[str, dict]) -> Dict[str, Any]:
    """Default value of every field in a schema."""
    return {name: field.get("default") for name, field in schema.items()}


def coerce_field(field: dict, value: Any) -> Any:
    """
    Coerce and bounds-check one field value.

    Args:
        field: Field record from the schema
        value: Raw value (number, numeric string or option name)

    Returns:
        The value converted to the field's type

    Raises:
        ValidationError: If the value has the wrong type or is out of bounds
    """
    name = field["fieldname"]
    fieldtype = field.get("fieldtype", "Float")

    if fieldtype == "Select":
        options = field.get("options", [])
        if value not in options:
            raise ValidationError(
                f"{name} must be one of {', '.join(options)}, got {value!r}", key=name
            )
        return value

    if isinstance(value, bool):
        raise ValidationError(f"{name} must be numeric, got {value!r}", key=name)

    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be numeric, got {value!r}", key=name)

    if not math.isfinite(number):
        raise ValidationError(f"{name} must be finite, got {value!r}", key=name)

    if fieldtype == "Int":
        if not number.is_integer():
            raise ValidationError(f"{name} must be an integer, got {value!r}", key=name)
        number = int(number)

    _check_bounds(field, number)
    return number


def _check_bounds(field: dict, number: float) -> None:
    """Internal: Raise if a number violates the field's min/max bounds."""
    name = field["fieldname"]

    low = field.get("min_value")
    if low is not None:
        if field.get("exclusive_min") and number <= low:
            raise ValidationError(f"{name} must be greater than {low}, got {number}", key=name)
        if not field.get("exclusive_min") and number < low:
            raise ValidationError(f"{name} must be at least {low}, got {number}", key=name)

    high = field.get("max_value")
    if high is not None:
        if field.get("exclusive_max") and number >= high:
            raise ValidationError(f"{name} must be less than {high}, got {number}", key=name)
        if not field.get("exclusive_max") and number > high:
            raise ValidationError(f"{name} must be at most {high}, got {number}", key=name)
