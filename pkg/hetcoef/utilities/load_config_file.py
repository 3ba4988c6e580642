import json
import logging
from pathlib import Path
from typing import Type, TypeVar, Union

import toml
from pydantic import BaseModel

logger = logging.getLogger(__name__)

ModelType = TypeVar("ModelType", bound=BaseModel)


def load_config_dictionary(config_path: Union[str, Path]) -> dict:
    config_path = Path(config_path)
    if not config_path.is_file():
        raise FileNotFoundError(f"No config file found at: {config_path}")

    suffix = config_path.suffix.lower()
    if suffix == ".json":
        config_dictionary = json.loads(config_path.read_text(encoding="utf-8"))
    elif suffix == ".toml":
        config_dictionary = toml.load(str(config_path))
    else:
        raise ValueError(f"Config file must be .json or .toml, got: {config_path.name}")

    config_dictionary.pop("schema_version", None)
    return config_dictionary


def load_config_model(config_path: Union[str, Path], model_class: Type[ModelType]) -> ModelType:
    config_dictionary = load_config_dictionary(config_path)
    logger.info(f"Loading {model_class.__name__} from {config_path}")
    return model_class.model_validate(config_dictionary)
