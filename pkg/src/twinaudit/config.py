"""Runtime configuration: one optional file, environment overrides on top."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional

import yaml

__all__ = ["AppConfig", "load_config"]

ENV_CONFIG = "TWINAUDIT_CONFIG"
ENV_STORE = "TWINAUDIT_STORE"
ENV_MANAGER = "TWINAUDIT_MANAGER_URL"
ENV_FEED = "TWINAUDIT_FEED"


@dataclass(frozen=True)
class AppConfig:
    store_path: str = "twinaudit-store"
    manager_url: Optional[str] = None  # None runs an embedded manager
    feed_path: Optional[str] = None

    @property
    def store(self) -> Path:
        return Path(self.store_path)


def load_config(
    path: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
) -> AppConfig:
    """File values first (YAML or JSON by suffix), then env overrides."""
    env = os.environ if env is None else env
    path = path or env.get(ENV_CONFIG)

    config = AppConfig()
    if path:
        text = Path(path).read_text(encoding="utf-8")
        if path.endswith((".yaml", ".yml")):
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: expected a mapping at top level")
        known = {k: v for k, v in data.items() if k in AppConfig.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ValueError(f"{path}: unknown settings {sorted(unknown)}")
        config = replace(config, **known)

    if env.get(ENV_STORE):
        config = replace(config, store_path=env[ENV_STORE])
    if env.get(ENV_MANAGER):
        config = replace(config, manager_url=env[ENV_MANAGER])
    if env.get(ENV_FEED):
        config = replace(config, feed_path=env[ENV_FEED])
    return config
