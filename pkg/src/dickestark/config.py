"""Flat ``key = value`` configuration files.

One assignment per line; ``#`` starts a comment; blank lines are ignored.
Keys are ASCII identifiers and physical quantities carry their unit in the
key name (``omega_trap_2pi_khz``, ``g_wc``). A file may start with
``format_version = 1``. Values are parsed against a schema supplied by the
caller; unknown or repeated keys are errors that cite the line number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError

__all__ = [
    "FORMAT_VERSION",
    "Field",
    "parse_lines",
    "parse_config",
    "load_config",
    "format_config",
    "parse_float",
    "parse_int",
    "parse_float_list",
    "parse_int_list",
    "parse_range",
]

FORMAT_VERSION = 1
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Field:
    """Schema entry: a parser turning the raw string into a value, plus a default."""

    parse: Callable[[str], Any]
    default: Any = None
    help: str = ""


def parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def parse_int(text: str) -> int:
    return int(text)


def parse_float_list(text: str) -> list[float]:
    items = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not items:
        raise ValueError("empty list")
    return [parse_float(t) for t in items]


def parse_int_list(text: str) -> list[int]:
    items = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not items:
        raise ValueError("empty list")
    return [int(t) for t in items]


def parse_range(text: str) -> tuple[float, float, int]:
    """``start:stop:count`` (inclusive, ``count >= 1``) or a single number."""
    parts = text.split(":")
    if len(parts) == 1:
        v = parse_float(parts[0])
        return (v, v, 1)
    if len(parts) != 3:
        raise ValueError("expected start:stop:count")
    start, stop, count = parse_float(parts[0]), parse_float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("count must be >= 1 (empty range)")
    if count > 1 and not stop > start:
        raise ValueError("stop must exceed start (empty range)")
    return (start, stop, count)


def parse_lines(text: str) -> list[tuple[int, str, str]]:
    """Split into ``(line_number, key, raw_value)`` triples."""
    out = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"invalid key {key!r}", lineno)
        if value == "":
            raise ConfigError(f"missing value for {key!r}", lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[key]})", lineno)
        seen[key] = lineno
        out.append((lineno, key, value))
    return out


def parse_config(text: str, schema: dict[str, Field]) -> dict[str, Any]:
    """Validate ``text`` against ``schema`` and fill in defaults."""
    values = {k: f.default for k, f in schema.items()}
    for lineno, key, raw in parse_lines(text):
        if key == "format_version":
            try:
                version = int(raw)
            except ValueError:
                raise ConfigError(f"format_version must be an integer, got {raw!r}", lineno)
            if version != FORMAT_VERSION:
                raise ConfigError(f"unsupported format_version {version}", lineno)
            continue
        if key not in schema:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            values[key] = schema[key].parse(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
    return values


def load_config(path, schema: dict[str, Field]) -> dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, schema)


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        if len(v) == 3 and isinstance(v[2], int) and not isinstance(v[0], int):
            return f"{v[0]!r}:{v[1]!r}:{v[2]}"
        return ", ".join(_format_value(x) for x in v)
    return str(v)


def format_config(values: dict[str, Any], header: str | None = None) -> str:
    """Serialize ``values``; floats use ``repr`` so a round trip is exact."""
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    lines.append(f"format_version = {FORMAT_VERSION}")
    for k, v in values.items():
        if v is None:
            continue
        lines.append(f"{k} = {_format_value(v)}")
    return "\n".join(lines) + "\n"
