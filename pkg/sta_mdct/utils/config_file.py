"""
Reader/writer for the `key = value` text config format.

Blank lines and lines starting with `#` are ignored. Values are kept as strings;
the pydantic schema that consumes them does the type coercion and rejects
unknown keys.
"""

import logging
from collections.abc import Mapping
from enum import Enum
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from sta_mdct.errors import ConfigError

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def parse_kv_text(text: str, source: str = "<string>") -> dict[str, str]:
    """
    Parse `key = value` lines into a dict.

    Args:
        text (str): File contents.
        source (str): Name used in error messages.

    Returns:
        dict[str, str]: Keys and raw string values, in file order.

    Raises:
        ConfigError: On a line without `=`, an empty key, or a duplicate key.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        values[key] = value.strip()
    return values


def load_kv_file(path: Path | str) -> dict[str, str]:
    """Read and parse a config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    values = parse_kv_text(text, source=str(path))
    logger.debug("Loaded %d keys from %s", len(values), path)
    return values


def format_value(value: Any) -> str:
    """Render one value the way `parse_kv_text` reads it back."""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list | tuple):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, Mapping):
        return ",".join(f"{k}:{format_value(v)}" for k, v in value.items())
    if value is None:
        return ""
    return str(value)


def dump_kv(values: Mapping[str, Any]) -> str:
    """Serialize a mapping as `key = value` lines, one per key, in insertion order."""
    return "".join(f"{key} = {format_value(value)}\n" for key, value in values.items())


def split_list(value: Any) -> Any:
    """Split a comma-separated string into a list; other values pass through.

    Used as a pydantic `mode="before"` validator for list fields read from files.
    """
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def split_mapping(value: Any) -> Any:
    """Split `name:value,name:value` into a dict; other values pass through."""
    if isinstance(value, str):
        result: dict[str, str] = {}
        for item in split_list(value):
            name, sep, rest = item.partition(":")
            if not sep:
                raise ValueError(f"expected name:value, got {item!r}")
            result[name.strip()] = rest.strip()
        return result
    return value


def validate_config(schema: type[ModelT], values: Mapping[str, Any], source: str = "<config>") -> ModelT:
    """
    Validate raw values into a pydantic schema.

    Unset values (None, or an empty `key =` line) fall back to the schema default.

    Args:
        schema (type[BaseModel]): Target schema.
        values (Mapping[str, Any]): File values merged with CLI overrides.
        source (str): Name used in error messages.

    Returns:
        BaseModel: Validated instance.

    Raises:
        ConfigError: Unknown keys or invalid values, one line per problem.
    """
    cleaned = {key: value for key, value in values.items() if value is not None and value != ""}
    try:
        return schema.model_validate(cleaned)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"{source}: {problems}") from e


def load_config(schema: type[ModelT], path: Path | str | None, overrides: Mapping[str, Any] | None = None) -> ModelT:
    """Load `path` (optional), apply CLI overrides on top and validate."""
    values: dict[str, Any] = dict(load_kv_file(path)) if path else {}
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    return validate_config(schema, values, source=str(path) if path else "<flags>")
