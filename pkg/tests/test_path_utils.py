"""Tests for path utilities."""

import os
import tempfile
from pathlib import Path

import pytest

from segcause.utils.exceptions import ArtifactIOError
from segcause.utils.path_utils import (
    check_file_permissions,
    ensure_output_dir,
    guard_overwrite,
    sidecar_path,
)


class TestCheckFilePermissions:
    """Tests for check_file_permissions function."""

    def test_nonexistent_file(self):
        """Test checking nonexistent file."""
        result = check_file_permissions("/nonexistent/path/file.txt")
        assert result["exists"] is False
        assert result["readable"] is False
        assert result["writable"] is False
        assert result["is_file"] is False
        assert result["is_directory"] is False

    def test_existing_file(self):
        """Test checking existing file."""
        with tempfile.NamedTemporaryFile(delete=False) as f:
            f.write(b"series_id,t,x0\n")
            temp_path = f.name

        try:
            result = check_file_permissions(temp_path)
            assert result["exists"] is True
            assert result["is_file"] is True
            assert result["is_directory"] is False
            assert result["readable"] is True
            assert isinstance(result["writable"], bool)
        finally:
            os.unlink(temp_path)

    def test_existing_directory(self):
        """Test checking existing directory."""
        with tempfile.TemporaryDirectory() as temp_dir:
            result = check_file_permissions(temp_dir)
            assert result["exists"] is True
            assert result["is_file"] is False
            assert result["is_directory"] is True
            assert result["readable"] is True

    def test_pathlib_input(self, tmp_path):
        """Test Path objects are accepted as well as strings."""
        result = check_file_permissions(tmp_path)
        assert result["is_directory"] is True


class TestEnsureOutputDir:
    """Tests for ensure_output_dir function."""

    def test_creates_nested_directories(self, tmp_path):
        """Test missing parents are created."""
        target = tmp_path / "runs" / "seed0"
        result = ensure_output_dir(target)
        assert result == target
        assert target.is_dir()

    def test_existing_directory_is_kept(self, tmp_path):
        """Test an existing directory is returned unchanged."""
        (tmp_path / "keep.txt").write_text("x")
        ensure_output_dir(tmp_path)
        assert (tmp_path / "keep.txt").exists()

    def test_file_in_the_way(self, tmp_path):
        """Test a regular file at the target path is reported."""
        blocker = tmp_path / "out"
        blocker.write_text("not a directory")
        with pytest.raises(ArtifactIOError, match="Cannot create output directory"):
            ensure_output_dir(blocker)


class TestGuardOverwrite:
    """Tests for guard_overwrite function."""

    def test_no_existing_files(self, tmp_path):
        """Test fresh paths pass without force."""
        guard_overwrite([tmp_path / "checkpoint.pt"], force=False)

    def test_existing_file_refused(self, tmp_path):
        """Test existing outputs are protected."""
        existing = tmp_path / "checkpoint.pt"
        existing.write_bytes(b"")
        with pytest.raises(ArtifactIOError, match="use --force"):
            guard_overwrite([existing, tmp_path / "other.csv"], force=False)

    def test_force_allows_overwrite(self, tmp_path):
        """Test force bypasses the guard."""
        existing = tmp_path / "checkpoint.pt"
        existing.write_bytes(b"")
        guard_overwrite([existing], force=True)


class TestSidecarPath:
    """Tests for sidecar_path function."""

    def test_sidecar_next_to_dataset(self):
        """Test the sidecar sits beside the CSV with the stem kept."""
        assert sidecar_path("data/train.csv", ".labels.json") == Path("data/train.labels.json")

    def test_nested_suffixes(self):
        """Test only the last suffix of the dataset is replaced."""
        assert sidecar_path("/tmp/a.b.csv", ".meta.json") == Path("/tmp/a.b.meta.json")
