import json
import logging
from pathlib import Path
from typing import Union

from hetcoef.system.paths_and_filenames.file_and_folder_names import SCHEMA_VERSION
from hetcoef.utilities.atomic_write import atomic_write_text

logger = logging.getLogger(__name__)


def save_dictionary_to_json(save_path: Union[Path, str], dictionary: dict, file_name: str = None) -> Path:
    """Writes `dictionary` (stamped with `schema_version`) to `save_path` or `save_path / file_name`."""
    json_file_path = Path(save_path)
    if file_name is not None:
        if file_name.split(".")[-1] != "json":
            file_name = f"{file_name}.json"
        json_file_path = json_file_path / file_name

    document = {"schema_version": SCHEMA_VERSION, **dictionary}
    atomic_write_text(json_file_path, json.dumps(document, indent=4))

    logger.info(f"Saved dictionary as json at: {json_file_path}")
    return json_file_path
