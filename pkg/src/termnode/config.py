"""Node configuration.

The config file is a small TOML-style dialect: ``key = value`` lines,
optional ``[section]`` headers (cosmetic grouping; keys live in one flat
namespace), ``#`` comments, quoted strings, integers, and booleans.
Environment variables with the ``ETB_`` prefix override file values,
e.g. ``ETB_LISTEN_ADDRESS`` beats ``listen_address`` from the file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .model import new_id

ENV_PREFIX = "ETB_"

_INT_KEYS = {"sync_interval_seconds", "session_ttl_hours"}
_KNOWN_KEYS = {
    "mode",
    "listen_address",
    "data_dir",
    "node_id",
    "display_name",
    "central_endpoint",
    "central_token",
    "admin_token",
    "sync_interval_seconds",
    "session_ttl_hours",
}


@dataclass
class NodeConfig:
    mode: str = "node"
    listen_address: str = "127.0.0.1:8042"
    data_dir: str = "."
    node_id: str = field(default_factory=new_id)
    display_name: str = ""
    central_endpoint: Optional[str] = None
    central_token: Optional[str] = None
    admin_token: Optional[str] = None
    sync_interval_seconds: int = 60
    session_ttl_hours: int = 12

    @property
    def host(self) -> str:
        return self.listen_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rsplit(":", 1)[1])

    @property
    def sync_enabled(self) -> bool:
        return (
            self.mode == "node"
            and self.central_endpoint is not None
            and self.central_token is not None
        )

    # File layout under data_dir; one append-only log per component.
    def path(self, name: str) -> str:
        return os.path.join(self.data_dir, name)

    @property
    def store_log_path(self) -> str:
        return self.path("store.jsonl")

    @property
    def accounts_log_path(self) -> str:
        return self.path("accounts.jsonl")

    @property
    def central_log_path(self) -> str:
        return self.path("central.jsonl")

    @property
    def log_path(self) -> str:
        return self.path("logs.jsonl")

    def validate(self) -> None:
        if self.mode not in ("node", "central"):
            raise ConfigError(f"mode must be 'node' or 'central', not {self.mode!r}")
        if self.sync_interval_seconds < 1:
            raise ConfigError("sync_interval_seconds must be at least 1")
        if self.session_ttl_hours < 1:
            raise ConfigError("session_ttl_hours must be at least 1")
        if not self.data_dir:
            raise ConfigError("data_dir is required")
        try:
            self.port
        except (ValueError, IndexError):
            raise ConfigError(
                f"listen_address must look like host:port, not {self.listen_address!r}"
            ) from None
        if self.mode == "node":
            half = (self.central_endpoint is None) != (self.central_token is None)
            if half:
                raise ConfigError(
                    "central_endpoint and central_token must be set together "
                    "(or both omitted for a standalone node)"
                )
        if self.mode == "central" and not self.admin_token:
            raise ConfigError("central mode requires admin_token")


def _parse_value(raw: str, lineno: int):
    raw = raw.strip()
    if raw.startswith('"'):
        if not raw.endswith('"') or len(raw) < 2:
            raise ConfigError(f"line {lineno}: unterminated string")
        body = raw[1:-1]
        out = []
        i = 0
        while i < len(body):
            ch = body[i]
            if ch == "\\":
                if i + 1 >= len(body):
                    raise ConfigError(f"line {lineno}: dangling escape")
                nxt = body[i + 1]
                mapped = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}.get(nxt)
                if mapped is None:
                    raise ConfigError(f"line {lineno}: unknown escape \\{nxt}")
                out.append(mapped)
                i += 2
            elif ch == '"':
                raise ConfigError(f"line {lineno}: stray quote inside string")
            else:
                out.append(ch)
                i += 1
        return "".join(out)
    if raw == "true":
        return True
    if raw == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: unquoted value {raw!r}") from None


def parse_config_text(text: str) -> dict:
    """Parse the config dialect into a flat key/value dict."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            continue  # section headers group keys visually, nothing more
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        # Allow a trailing comment after an unquoted value.
        raw = raw.strip()
        if raw and not raw.startswith('"') and "#" in raw:
            raw = raw[: raw.index("#")].strip()
        values[key] = _parse_value(raw, lineno)
    return values


def load_config(path: str, env: Optional[dict] = None) -> NodeConfig:
    """Read a config file, apply ETB_ environment overrides, validate."""
    environ = os.environ if env is None else env
    try:
        with open(path, "r", encoding="utf-8") as handle:
            values = parse_config_text(handle.read())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    unknown = sorted(set(values) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in _KNOWN_KEYS:
        override = environ.get(ENV_PREFIX + key.upper())
        if override is None:
            continue
        if key in _INT_KEYS:
            try:
                values[key] = int(override)
            except ValueError:
                raise ConfigError(
                    f"{ENV_PREFIX}{key.upper()} must be an integer, not {override!r}"
                ) from None
        else:
            values[key] = override
    config = NodeConfig(**values)
    config.validate()
    return config


def dump_config(config: NodeConfig) -> str:
    """Render a config back to file form (inverse of parse for our keys)."""

    def quote(value: str) -> str:
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = [
        f"mode = {quote(config.mode)}",
        f"listen_address = {quote(config.listen_address)}",
        f"data_dir = {quote(config.data_dir)}",
        f"node_id = {quote(config.node_id)}",
    ]
    if config.display_name:
        lines.append(f"display_name = {quote(config.display_name)}")
    if config.central_endpoint is not None:
        lines.append(f"central_endpoint = {quote(config.central_endpoint)}")
    if config.central_token is not None:
        lines.append(f"central_token = {quote(config.central_token)}")
    if config.admin_token is not None:
        lines.append(f"admin_token = {quote(config.admin_token)}")
    lines.append(f"sync_interval_seconds = {config.sync_interval_seconds}")
    lines.append(f"session_ttl_hours = {config.session_ttl_hours}")
    return "\n".join(lines) + "\n"
