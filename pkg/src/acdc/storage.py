"""Record stores: a dict-shaped interface with memory and file backends.

Records are plain JSON-serializable dicts keyed by string. Every store
exposes a re-entrant ``lock``; single calls are atomic on their own, and
compound read-modify-write sequences take the lock explicitly, which is
what makes voucher redemption linearizable per code.

The file backend keeps the whole table in memory and persists each mutation
by writing a temporary file, fsyncing it and renaming it over the previous
snapshot, so a crash at any point leaves either the old or the new file,
never a torn one.
"""

from __future__ import annotations

import json
import os
import threading
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Iterator

from .errors import StorageUnavailable


class RecordStore(ABC):
    """Minimal key-value contract shared by all backends."""

    lock: threading.RLock

    @abstractmethod
    def get(self, key: str) -> dict | None: ...

    @abstractmethod
    def put(self, key: str, record: dict) -> None: ...

    @abstractmethod
    def delete(self, key: str) -> bool:
        """Remove the record; returns False when the key was absent."""

    @abstractmethod
    def items(self) -> list[tuple[str, dict]]: ...

    def keys(self) -> list[str]:
        return [k for k, _ in self.items()]

    def __len__(self) -> int:
        return len(self.items())

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None

    def close(self) -> None:
        pass


class MemoryStore(RecordStore):
    def __init__(self) -> None:
        self.lock = threading.RLock()
        self._records: dict[str, dict] = {}

    def get(self, key: str) -> dict | None:
        with self.lock:
            rec = self._records.get(key)
            return dict(rec) if rec is not None else None

    def put(self, key: str, record: dict) -> None:
        with self.lock:
            self._records[key] = dict(record)

    def delete(self, key: str) -> bool:
        with self.lock:
            return self._records.pop(key, None) is not None

    def items(self) -> list[tuple[str, dict]]:
        with self.lock:
            return [(k, dict(v)) for k, v in self._records.items()]


class FileStore(RecordStore):
    """Crash-consistent JSON snapshot store (write temp, fsync, rename)."""

    def __init__(self, path: str | Path) -> None:
        self.lock = threading.RLock()
        self.path = Path(path)
        self._records: dict[str, dict] = {}
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            return
        try:
            with self.path.open("r", encoding="utf-8") as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageUnavailable(f"cannot read store file {self.path}: {exc}") from exc
        self._records = dict(payload.get("records", {}))

    def _persist(self) -> None:
        tmp = self.path.with_name(self.path.name + ".tmp")
        data = json.dumps({"records": self._records}, sort_keys=True)
        try:
            with tmp.open("w", encoding="utf-8") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except OSError as exc:
            raise StorageUnavailable(f"cannot persist store file {self.path}: {exc}") from exc

    def get(self, key: str) -> dict | None:
        with self.lock:
            rec = self._records.get(key)
            return dict(rec) if rec is not None else None

    def put(self, key: str, record: dict) -> None:
        with self.lock:
            self._records[key] = dict(record)
            self._persist()

    def delete(self, key: str) -> bool:
        with self.lock:
            existed = self._records.pop(key, None) is not None
            if existed:
                self._persist()
            return existed

    def items(self) -> list[tuple[str, dict]]:
        with self.lock:
            return [(k, dict(v)) for k, v in self._records.items()]


def open_store(directory: str | Path | None, name: str) -> RecordStore:
    """File-backed store under ``directory``, or in-memory when it is None."""
    if directory is None:
        return MemoryStore()
    return FileStore(Path(directory) / f"{name}.json")
