"""Project-relative filesystem paths."""

from __future__ import annotations

from pathlib import Path


PROJECT_ROOT = Path(__file__).resolve().parent.parent


def output_path(output_dir: Path, filename: str) -> Path:
    """Resolve *filename* inside *output_dir*; relative directories are taken from the working directory."""

    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / filename
