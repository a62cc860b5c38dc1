"""Pluggable JSON document storage: in-memory and on-disk backends."""

from __future__ import annotations

import json
import re
import threading
from pathlib import Path
from typing import Any, Protocol

_SAFE_KEY = re.compile(r"[^A-Za-z0-9._-]")


class StorageBackend(Protocol):
    def load_all(self, kind: str) -> dict[str, Any]: ...

    def save(self, kind: str, key: str, value: Any) -> None: ...

    def delete(self, kind: str, key: str) -> None: ...

    def save_blob(self, kind: str, key: str, data: bytes) -> None: ...

    def load_blob(self, kind: str, key: str) -> bytes | None: ...


class MemoryBackend:
    """Dict-backed store; the default for tests and ephemeral runs."""

    def __init__(self):
        self._data: dict[str, dict[str, Any]] = {}
        self._blobs: dict[tuple[str, str], bytes] = {}
        self._lock = threading.Lock()

    def load_all(self, kind: str) -> dict[str, Any]:
        with self._lock:
            return dict(self._data.get(kind, {}))

    def save(self, kind: str, key: str, value: Any) -> None:
        with self._lock:
            self._data.setdefault(kind, {})[key] = value

    def delete(self, kind: str, key: str) -> None:
        with self._lock:
            self._data.get(kind, {}).pop(key, None)

    def save_blob(self, kind: str, key: str, data: bytes) -> None:
        with self._lock:
            self._blobs[(kind, key)] = data

    def load_blob(self, kind: str, key: str) -> bytes | None:
        with self._lock:
            return self._blobs.get((kind, key))


class JsonDirBackend:
    """One JSON file per record under ``root/<kind>/<key>.json``."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, kind: str, key: str, suffix: str = ".json") -> Path:
        safe = _SAFE_KEY.sub("_", key)
        directory = self.root / _SAFE_KEY.sub("_", kind)
        directory.mkdir(parents=True, exist_ok=True)
        return directory / f"{safe}{suffix}"

    def load_all(self, kind: str) -> dict[str, Any]:
        directory = self.root / _SAFE_KEY.sub("_", kind)
        if not directory.is_dir():
            return {}
        out = {}
        for path in sorted(directory.glob("*.json")):
            out[path.stem] = json.loads(path.read_text())
        return out

    def save(self, kind: str, key: str, value: Any) -> None:
        path = self._path(kind, key)
        with self._lock:
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(value, ensure_ascii=False, sort_keys=True))
            tmp.replace(path)

    def delete(self, kind: str, key: str) -> None:
        with self._lock:
            self._path(kind, key).unlink(missing_ok=True)

    def save_blob(self, kind: str, key: str, data: bytes) -> None:
        path = self._path(kind, key, suffix=".bin")
        with self._lock:
            tmp = path.with_suffix(".bin.tmp")
            tmp.write_bytes(data)
            tmp.replace(path)

    def load_blob(self, kind: str, key: str) -> bytes | None:
        path = self._path(kind, key, suffix=".bin")
        if not path.exists():
            return None
        return path.read_bytes()
