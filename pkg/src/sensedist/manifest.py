"""Run-directory manifests and the single-writer directory lock.

Every command that writes a run directory leaves exactly one
manifest.json behind describing what produced the outputs: the config
and hierarchy hashes, the input file hashes, the seed list, and the
output paths. Reloading a manifest re-hashes the input files so stale
or tampered directories are caught before anything downstream trusts
them.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import LockError, ManifestError

MANIFEST_NAME = "manifest.json"
LOCK_NAME = ".writer.lock"
_HASH_CHUNK = 1 << 20


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        while chunk := fh.read(_HASH_CHUNK):
            digest.update(chunk)
    return digest.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class RunManifest:
    command: str
    config_sha256: str
    hierarchy_sha256: str
    input_hashes: dict[str, str] = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    created_at: str = field(default_factory=utc_now)
    completed_at: str = ""
    complete: bool = False

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_sha256": self.config_sha256,
            "hierarchy_sha256": self.hierarchy_sha256,
            "input_hashes": dict(sorted(self.input_hashes.items())),
            "seeds": list(self.seeds),
            "outputs": list(self.outputs),
            "tool_version": self.tool_version,
            "created_at": self.created_at,
            "completed_at": self.completed_at,
            "complete": self.complete,
        }

    def mark_complete(self) -> None:
        self.complete = True
        self.completed_at = utc_now()

    def save(self, run_dir: str | Path) -> Path:
        path = Path(run_dir) / MANIFEST_NAME
        path.write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return path

    @classmethod
    def from_dict(cls, payload: dict) -> "RunManifest":
        try:
            return cls(
                command=payload["command"],
                config_sha256=payload["config_sha256"],
                hierarchy_sha256=payload["hierarchy_sha256"],
                input_hashes=dict(payload.get("input_hashes", {})),
                seeds=list(payload.get("seeds", [])),
                outputs=list(payload.get("outputs", [])),
                tool_version=payload.get("tool_version", ""),
                created_at=payload.get("created_at", ""),
                completed_at=payload.get("completed_at", ""),
                complete=bool(payload.get("complete", False)),
            )
        except KeyError as exc:
            raise ManifestError(f"manifest is missing required key {exc}") from exc

    @classmethod
    def load(cls, run_dir: str | Path, verify_inputs: bool = True) -> "RunManifest":
        path = Path(run_dir) / MANIFEST_NAME
        if not path.exists():
            raise ManifestError(f"no {MANIFEST_NAME} in {run_dir}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
        manifest = cls.from_dict(payload)
        if verify_inputs:
            manifest.verify_inputs()
        return manifest

    def verify_inputs(self) -> None:
        """Re-hash the recorded input files; any drift is an error."""
        for name, recorded in self.input_hashes.items():
            path = Path(name)
            if not path.exists():
                raise ManifestError(f"manifest input no longer exists: {name}")
            actual = file_sha256(path)
            if actual != recorded:
                raise ManifestError(
                    f"manifest input hash mismatch for {name}: "
                    f"recorded {recorded[:12]}..., found {actual[:12]}..."
                )


class DirectoryLock:
    """O_EXCL lockfile guarding a run directory against concurrent writers."""

    def __init__(self, run_dir: str | Path):
        self.path = Path(run_dir) / LOCK_NAME
        self._fd: int | None = None

    def __enter__(self) -> "DirectoryLock":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockError(
                f"run directory {self.path.parent} is locked by another process "
                f"(remove {self.path} if that process is gone)"
            ) from None
        os.write(self._fd, f"pid={os.getpid()} at={utc_now()}\n".encode("utf-8"))
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
        self.path.unlink(missing_ok=True)
