import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Union


def create_temporary_path(target_path: Path) -> Path:
    target_path.parent.mkdir(parents=True, exist_ok=True)
    file_descriptor, temporary_name = tempfile.mkstemp(
        prefix=f".{target_path.name}.", suffix=".tmp", dir=str(target_path.parent)
    )
    os.close(file_descriptor)
    return Path(temporary_name)


@contextmanager
def atomic_write_path(target_path: Union[str, Path]) -> Iterator[Path]:
    """
    Yields a temporary path next to `target_path`; on clean exit the temporary file replaces the target,
    on error it is removed so no partial output is left behind.
    """
    with atomic_write_paths(target_path) as (temporary_path,):
        yield temporary_path


@contextmanager
def atomic_write_paths(*target_paths: Union[str, Path]) -> Iterator[List[Path]]:
    """
    One temporary path per target, all created before anything is written. The targets are only replaced
    once every file has been written; if any write fails, none of them appears.
    """
    target_paths = [Path(target_path) for target_path in target_paths]
    temporary_paths: List[Path] = []
    committed_paths: List[Path] = []
    try:
        for target_path in target_paths:
            temporary_paths.append(create_temporary_path(target_path))
        yield temporary_paths
        for temporary_path, target_path in zip(temporary_paths, target_paths):
            os.replace(temporary_path, target_path)
            committed_paths.append(target_path)
    except BaseException:
        if len(committed_paths) < len(target_paths):
            for committed_path in committed_paths:
                committed_path.unlink(missing_ok=True)
        raise
    finally:
        for temporary_path in temporary_paths:
            temporary_path.unlink(missing_ok=True)


def atomic_write_text(target_path: Union[str, Path], text: str) -> None:
    with atomic_write_path(target_path) as temporary_path:
        temporary_path.write_text(text, encoding="utf-8")
