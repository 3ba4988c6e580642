import os
import time
from pathlib import Path
from typing import Optional, Union

from hetcoef.system.paths_and_filenames.file_and_folder_names import (
    BASE_HETCOEF_DATA_FOLDER_NAME,
    GROUND_TRUTH_JSON_SUFFIX,
    HETCOEF_LOG_FOLDER_ENV_VAR,
    HETCOEF_THREADS_ENV_VAR,
    LOG_FILE_FOLDER_NAME,
)


def os_independent_home_dir():
    return str(Path.home())


def get_hetcoef_data_folder_path(create_folder: bool = True) -> str:
    hetcoef_data_folder_path = Path(os_independent_home_dir(), BASE_HETCOEF_DATA_FOLDER_NAME)
    if create_folder:
        hetcoef_data_folder_path.mkdir(exist_ok=True, parents=True)
    return str(hetcoef_data_folder_path)


def get_log_file_path() -> Optional[str]:
    """Path of this run's log file, or None when file logging is switched off (empty env var)."""
    log_folder_override = os.environ.get(HETCOEF_LOG_FOLDER_ENV_VAR)
    if log_folder_override is not None:
        if log_folder_override.strip() == "":
            return None
        log_folder_path = Path(log_folder_override)
    else:
        log_folder_path = Path(get_hetcoef_data_folder_path()) / LOG_FILE_FOLDER_NAME

    try:
        log_folder_path.mkdir(exist_ok=True, parents=True)
    except OSError as e:
        print(f"Could not create log folder {log_folder_path}: {e}")  # logging is not configured yet
        return None
    return str(log_folder_path / create_log_file_name())


def create_log_file_name():
    return "log_" + time.strftime("%m-%d-%Y-%H_%M_%S") + f"_{os.getpid()}.log"


def get_ground_truth_json_path(dataset_csv_path: Union[str, Path]) -> str:
    dataset_csv_path = Path(dataset_csv_path)
    return str(dataset_csv_path.with_name(f"{dataset_csv_path.stem}{GROUND_TRUTH_JSON_SUFFIX}"))


def get_thread_count(requested_threads: Optional[int] = None, default: int = 1) -> int:
    """--threads wins, then HETCOEF_THREADS, then `default`"""
    if requested_threads is not None:
        if requested_threads < 1:
            raise ValueError(f"Thread count must be positive, got {requested_threads}")
        return requested_threads

    env_value = os.environ.get(HETCOEF_THREADS_ENV_VAR)
    if env_value is None or env_value.strip() == "":
        return default
    try:
        env_threads = int(env_value)
    except ValueError as e:
        raise ValueError(f"{HETCOEF_THREADS_ENV_VAR} must be a positive integer, got {env_value!r}") from e
    if env_threads < 1:
        raise ValueError(f"{HETCOEF_THREADS_ENV_VAR} must be a positive integer, got {env_value!r}")
    return env_threads
