"""Application configuration.

Precedence, lowest to highest: built-in defaults, JSON config file,
SANDPIPER_* environment variables, explicit overrides (CLI flags).
Secrets stay out of this object: the gateway key itself is read from the
environment at request time, only its variable *name* is configured.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import InvalidInput
from .gateway import DEFAULT_KEY_ENV

CONFIG_PATH_ENV = "SANDPIPER_CONFIG"


@dataclass(frozen=True)
class AppConfig:
    db_path: str = "sandpiper.db"
    api_token: str = ""  # empty disables bearer auth (local use)
    maskmap_token: str = ""  # empty disables privileged mask-map export
    gateway_base_url: str = ""
    gateway_key_env: str = DEFAULT_KEY_ENV
    allowed_models: tuple[str, ...] = ()
    surrogate_seed: str = "sandpiper-default-seed"
    port: int = 8400

    def __post_init__(self):
        if not (0 < self.port < 65536):
            raise InvalidInput(f"port {self.port} out of range")


_ENV_PREFIX = "SANDPIPER_"


def _coerce(name: str, value, kind) -> object:
    if kind == "int":
        try:
            return int(value)
        except (TypeError, ValueError):
            raise InvalidInput(f"config field {name!r} must be an integer, got {value!r}")
    if kind == "models":
        if isinstance(value, str):
            return tuple(m.strip() for m in value.split(",") if m.strip())
        if isinstance(value, (list, tuple)):
            return tuple(str(m) for m in value)
        raise InvalidInput(f"config field {name!r} must be a list or comma string")
    if not isinstance(value, str):
        raise InvalidInput(f"config field {name!r} must be a string, got {value!r}")
    return value


_FIELD_KINDS = {
    "db_path": "str",
    "api_token": "str",
    "maskmap_token": "str",
    "gateway_base_url": "str",
    "gateway_key_env": "str",
    "allowed_models": "models",
    "surrogate_seed": "str",
    "port": "int",
}


def load_config(path: str | Path | None = None,
                env: dict | None = None,
                overrides: dict | None = None) -> AppConfig:
    """Merge config sources. ``path=None`` falls back to $SANDPIPER_CONFIG;
    a missing explicit file is an error, a missing fallback is not."""
    env = os.environ if env is None else env
    merged: dict = {}

    explicit = path is not None
    if path is None:
        path = env.get(CONFIG_PATH_ENV) or None
        explicit = False
    if path is not None:
        p = Path(path)
        if p.exists():
            try:
                data = json.loads(p.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise InvalidInput(f"could not read config {p}: {exc}") from exc
            if not isinstance(data, dict):
                raise InvalidInput(f"config {p} must hold a JSON object")
            for key, value in data.items():
                if key not in _FIELD_KINDS:
                    raise InvalidInput(f"unknown config field {key!r} in {p}")
                merged[key] = _coerce(key, value, _FIELD_KINDS[key])
        elif explicit:
            raise InvalidInput(f"config file {p} does not exist")

    for name, kind in _FIELD_KINDS.items():
        env_name = _ENV_PREFIX + name.upper()
        if env_name in env and env[env_name] != "":
            merged[name] = _coerce(name, env[env_name], kind)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_KINDS:
            raise InvalidInput(f"unknown config override {key!r}")
        merged[key] = _coerce(key, value, _FIELD_KINDS[key])

    return AppConfig(**merged)


def config_fields() -> tuple[str, ...]:
    return tuple(f.name for f in fields(AppConfig))
