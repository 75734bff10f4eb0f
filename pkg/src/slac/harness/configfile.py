"""Flat key-value experiment config files.

Format: optional  [section]  headers prefix subsequent keys with
"section.".  Each line is  key = value  with typed scalars (int, float,
bool, quoted or bare string) or flat arrays like  [1, 0, 0]  /
[128, 128].  '#' starts a comment.  Parse errors carry file and line.
"""

from __future__ import annotations

import re
from pathlib import Path

from slac.errors import ConfigError

_BARE_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")
_BARE_VALUE = re.compile(r"^[A-Za-z0-9_./~+-]+$")  # bare words and filesystem paths


def _parse_scalar(token: str, where: str):
    token = token.strip()
    if not token:
        raise ConfigError(f"{where}: empty value")
    if token.lower() in ("true", "false"):
        return token.lower() == "true"
    if (token.startswith('"') and token.endswith('"')) or (
        token.startswith("'") and token.endswith("'")
    ):
        return token[1:-1]
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    if _BARE_VALUE.match(token):
        return token  # bare word or path, e.g. variant = sim
    raise ConfigError(f"{where}: cannot parse value {token!r}")


def _parse_value(raw: str, where: str):
    raw = raw.strip()
    if raw.startswith("["):
        if not raw.endswith("]"):
            raise ConfigError(f"{where}: unterminated array")
        inner = raw[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(t, where) for t in inner.split(",")]
    return _parse_scalar(raw, where)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse config text into a flat dict with dotted keys."""
    out: dict = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"{source}:{lineno}"
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(f"{where}: malformed section header {stripped!r}")
            section = stripped[1:-1].strip()
            if section and not _BARE_KEY.match(section):
                raise ConfigError(f"{where}: bad section name {section!r}")
            continue
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected 'key = value', got {stripped!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if not _BARE_KEY.match(key):
            raise ConfigError(f"{where}: bad key {key!r}")
        full = f"{section}.{key}" if section else key
        if full in out:
            raise ConfigError(f"{where}: duplicate key {full!r}")
        out[full] = _parse_value(raw, where)
    return out


def parse_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return value if _BARE_KEY.match(value) else f'"{value}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize config value of type {type(value).__name__}")


def emit_config(flat: dict) -> str:
    """Serialize a flat dotted-key dict back to config text (sorted, sectioned)."""
    top = {k: v for k, v in flat.items() if "." not in k}
    sections: dict = {}
    for k, v in flat.items():
        if "." in k:
            sec, sub = k.split(".", 1)
            sections.setdefault(sec, {})[sub] = v
    lines = [f"{k} = {_format_value(top[k])}" for k in sorted(top)]
    for sec in sorted(sections):
        lines.append("")
        lines.append(f"[{sec}]")
        for sub in sorted(sections[sec]):
            lines.append(f"{sub} = {_format_value(sections[sec][sub])}")
    return "\n".join(lines) + "\n"
