"""Minimal TOML writer for reports and manifests.

Covers the subset this package emits: scalar keys, flat arrays, nested
tables and arrays of tables. Floats are written with repr so they parse
back to the identical binary value.
"""

from __future__ import annotations

import re
from typing import Any

_BARE_KEY = re.compile(r"^[A-Za-z0-9_-]+$")


def _fmt_key(key: str) -> str:
    return key if _BARE_KEY.match(key) else _fmt_scalar(key)


def _fmt_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        if isinstance(value, float) and (value != value or value in (float("inf"), float("-inf"))):
            return {float("inf"): "inf", float("-inf"): "-inf"}.get(value, "nan")
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'
    raise TypeError(f"cannot serialize {type(value).__name__} as TOML scalar")


def _fmt_value(value) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt_value(v) for v in value) + "]"
    return _fmt_scalar(value)


def _is_table_array(value) -> bool:
    return (
        isinstance(value, (list, tuple))
        and len(value) > 0
        and all(isinstance(v, dict) for v in value)
    )


def _emit(table: dict, prefix: str, lines: list) -> None:
    plain = {k: v for k, v in table.items() if not isinstance(v, dict) and not _is_table_array(v)}
    subtables = {k: v for k, v in table.items() if isinstance(v, dict)}
    arrays = {k: v for k, v in table.items() if _is_table_array(v)}

    for key, value in plain.items():
        lines.append(f"{_fmt_key(key)} = {_fmt_value(value)}")
    for key, sub in subtables.items():
        name = f"{prefix}{_fmt_key(key)}"
        lines.append("")
        lines.append(f"[{name}]")
        _emit(sub, name + ".", lines)
    for key, rows in arrays.items():
        name = f"{prefix}{_fmt_key(key)}"
        for row in rows:
            lines.append("")
            lines.append(f"[[{name}]]")
            _emit(row, name + ".", lines)


def dumps(document: dict[str, Any]) -> str:
    lines: list[str] = []
    _emit(document, "", lines)
    return "\n".join(lines).lstrip("\n") + "\n"


def dump(document: dict[str, Any], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(document))
