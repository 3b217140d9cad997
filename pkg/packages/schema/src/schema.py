from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

from packages.utils.src.errors import Errors
from .schema_types import ExperimentConfigModel


def format_path(parts) -> str:
    """
    Renders a JSON path as `room.users[1]`.
    """
    out = ""
    for part in parts:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out


def _error_path(error) -> str:
    parts = list(error.absolute_path)
    if error.validator == "required" and isinstance(error.instance, dict):
        missing = [key for key in error.validator_value if key not in error.instance]
        if missing:
            parts.append(missing[0])
    elif error.validator == "additionalProperties" and isinstance(error.instance, dict):
        known = set(error.schema.get("properties", {}))
        unknown = sorted(key for key in error.instance if key not in known)
        if unknown:
            parts.append(unknown[0])
    return format_path(parts)


def verify_object_against_schema(obj, schema=ExperimentConfigModel, messages=None):
    """
    Validates an object against a JSON schema model (draft-07).

    All validation failures are collected; if `messages` is given they are appended to it as
    `path: message` strings. The most relevant failure is raised.

    @param obj: The object to be validated against the schema.
    @param schema: The JSON schema to validate the object against.
    @param messages: An optional list receiving every validation message.
    @throws: ConfigValidationError naming the JSON path of the offending field.
    """
    validator = Draft7Validator(schema)
    errors = list(validator.iter_errors(obj))
    if not errors:
        return

    if messages is not None:
        for error in errors:
            messages.append(f"{_error_path(error) or '<root>'}: {error.message}")

    error = best_match(errors)
    raise Errors.ConfigValidationError(_error_path(error), error.message)
