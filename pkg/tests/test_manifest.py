"""Tests for run manifests, file hashing, and the directory lock."""

import hashlib
import json

import pytest

from sensedist.errors import LockError, ManifestError
from sensedist.manifest import DirectoryLock, RunManifest, file_sha256


class TestFileSha256:
    def test_matches_hashlib(self, tmp_path):
        path = tmp_path / "blob.bin"
        payload = b"abc" * 10_000
        path.write_bytes(payload)
        assert file_sha256(path) == hashlib.sha256(payload).hexdigest()

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty"
        path.write_bytes(b"")
        assert file_sha256(path) == hashlib.sha256(b"").hexdigest()


class TestRunManifest:
    def make(self, tmp_path):
        data = tmp_path / "input.csv"
        data.write_text("a,b\n1,2\n", encoding="utf-8")
        return RunManifest(
            command="prepare",
            config_sha256="c" * 64,
            hierarchy_sha256="h" * 64,
            input_hashes={str(data): file_sha256(data)},
            seeds=[1, 2],
            outputs=["instances.jsonl"],
        ), data

    def test_round_trip(self, tmp_path):
        manifest, _ = self.make(tmp_path)
        manifest.mark_complete()
        manifest.save(tmp_path)
        loaded = RunManifest.load(tmp_path)
        assert loaded.command == "prepare"
        assert loaded.seeds == [1, 2]
        assert loaded.complete is True
        assert loaded.completed_at

    def test_incomplete_until_marked(self, tmp_path):
        manifest, _ = self.make(tmp_path)
        manifest.save(tmp_path)
        loaded = RunManifest.load(tmp_path)
        assert loaded.complete is False
        assert loaded.completed_at == ""

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ManifestError, match="manifest.json"):
            RunManifest.load(tmp_path)

    def test_tampered_input_rejected(self, tmp_path):
        manifest, data = self.make(tmp_path)
        manifest.save(tmp_path)
        data.write_text("a,b\n9,9\n", encoding="utf-8")
        with pytest.raises(ManifestError, match="hash mismatch"):
            RunManifest.load(tmp_path)
        # but loading without verification still works for inspection
        loaded = RunManifest.load(tmp_path, verify_inputs=False)
        assert loaded.command == "prepare"

    def test_deleted_input_rejected(self, tmp_path):
        manifest, data = self.make(tmp_path)
        manifest.save(tmp_path)
        data.unlink()
        with pytest.raises(ManifestError, match="no longer exists"):
            RunManifest.load(tmp_path)

    def test_malformed_json(self, tmp_path):
        (tmp_path / "manifest.json").write_text("{nope", encoding="utf-8")
        with pytest.raises(ManifestError, match="not valid JSON"):
            RunManifest.load(tmp_path)

    def test_missing_key(self, tmp_path):
        (tmp_path / "manifest.json").write_text(
            json.dumps({"command": "train"}), encoding="utf-8"
        )
        with pytest.raises(ManifestError, match="missing required key"):
            RunManifest.load(tmp_path)


class TestDirectoryLock:
    def test_exclusive(self, tmp_path):
        with DirectoryLock(tmp_path):
            assert (tmp_path / ".writer.lock").exists()
            with pytest.raises(LockError, match="locked"):
                with DirectoryLock(tmp_path):
                    pass
        assert not (tmp_path / ".writer.lock").exists()

    def test_released_on_error(self, tmp_path):
        with pytest.raises(RuntimeError):
            with DirectoryLock(tmp_path):
                raise RuntimeError("boom")
        with DirectoryLock(tmp_path):
            pass

    def test_creates_directory(self, tmp_path):
        target = tmp_path / "fresh" / "run"
        with DirectoryLock(target):
            assert target.exists()
