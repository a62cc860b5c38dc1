"""Service configuration: flags override environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

ENV_PREFIX = "REVIEWDESK_"


@dataclass
class ServiceConfig:
    data_dir: Path | None = None
    provider_url: str = ""
    provider_key: str = ""
    provider_model: str = "gpt-4"
    metadata_url: str = ""
    metadata_key: str = ""
    extraction_url: str = ""
    replay_dir: Path | None = None
    recorded_metadata: Path | None = None
    default_venue: str | None = None
    eager_cues: bool = True
    temperature: float = 0.2
    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        def env(name: str, default=None):
            return os.environ.get(ENV_PREFIX + name, default)

        values = {
            "data_dir": env("DATA_DIR"),
            "provider_url": env("PROVIDER_URL", ""),
            "provider_key": env("PROVIDER_KEY", ""),
            "provider_model": env("PROVIDER_MODEL", "gpt-4"),
            "metadata_url": env("METADATA_URL", ""),
            "metadata_key": env("METADATA_KEY", ""),
            "extraction_url": env("EXTRACTION_URL", ""),
            "replay_dir": env("REPLAY_DIR"),
            "recorded_metadata": env("RECORDED_METADATA"),
            "default_venue": env("VENUE"),
            "temperature": float(env("TEMPERATURE", "0.2")),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        for key in ("data_dir", "replay_dir", "recorded_metadata"):
            if values.get(key) is not None:
                values[key] = Path(values[key])
        return cls(**values)
