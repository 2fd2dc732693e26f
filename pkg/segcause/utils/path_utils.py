"""Path utilities for run directories and artifact files."""

import os
from pathlib import Path
from typing import Union

from segcause.utils.exceptions import ArtifactIOError

PathLike = Union[str, os.PathLike]


def check_file_permissions(file_path: PathLike) -> dict[str, bool]:
    """Check file/directory permissions.

    Args:
        file_path: Path to check

    Returns:
        Dictionary with exists, readable, writable, is_file, is_directory status
    """
    result = {
        "exists": False,
        "readable": False,
        "writable": False,
        "is_file": False,
        "is_directory": False,
    }

    try:
        path_obj = Path(file_path)
        result["exists"] = path_obj.exists()

        if result["exists"]:
            result["is_file"] = path_obj.is_file()
            result["is_directory"] = path_obj.is_dir()
            result["readable"] = os.access(path_obj, os.R_OK)
            if result["is_file"]:
                result["writable"] = os.access(path_obj, os.W_OK) and os.access(
                    path_obj.parent, os.W_OK
                )
            else:
                result["writable"] = os.access(path_obj, os.W_OK)

    except OSError:
        pass

    return result


def ensure_output_dir(directory: PathLike) -> Path:
    """Create an output directory (and parents) if it does not exist.

    Raises:
        ArtifactIOError: If the directory cannot be created or is not writable
    """
    path = Path(directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ArtifactIOError(f"Cannot create output directory {path}: {e}") from e

    if not check_file_permissions(path)["writable"]:
        raise ArtifactIOError(f"Output directory is not writable: {path}")
    return path


def guard_overwrite(paths: list[Path], force: bool) -> None:
    """Refuse to clobber existing files unless ``force`` is set.

    Raises:
        ArtifactIOError: If any path exists and force is False
    """
    existing = [str(p) for p in paths if Path(p).exists()]
    if existing and not force:
        raise ArtifactIOError(
            f"Refusing to overwrite existing files (use --force): {', '.join(existing)}"
        )


def sidecar_path(dataset_path: PathLike, suffix: str) -> Path:
    """Return the sidecar JSON path that accompanies a dataset CSV."""
    path = Path(dataset_path)
    return path.with_name(path.stem + suffix)
