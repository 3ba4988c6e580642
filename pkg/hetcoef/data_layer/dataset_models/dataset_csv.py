import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.system.paths_and_filenames.file_and_folder_names import (
    CONTROL_COLUMN_NAME,
    INSTRUMENT_COLUMN_NAME,
    OUTCOME_COLUMN_NAME,
    TREATMENT_COLUMN_NAME,
)
from hetcoef.utilities.atomic_write import atomic_write_path

logger = logging.getLogger(__name__)


def load_dataset_from_csv(csv_path: Union[str, Path], mutually_exclusive: bool = False) -> Dataset:
    """
    Reads a dataset csv: header row, columns `y`, `x` (or `x1..xT`), optional `z`, optional `v`.
    """
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise FileNotFoundError(f"No dataset csv found at: {csv_path}")

    dataframe = pd.read_csv(csv_path, encoding="utf-8", float_precision="round_trip")
    logger.info(f"Loaded {len(dataframe)} rows with columns {list(dataframe.columns)} from {csv_path}")
    return dataset_from_dataframe(dataframe, mutually_exclusive=mutually_exclusive)


def dataset_from_dataframe(dataframe: pd.DataFrame, mutually_exclusive: bool = False) -> Dataset:
    if OUTCOME_COLUMN_NAME not in dataframe.columns:
        raise ValueError(f"Dataset is missing the outcome column `{OUTCOME_COLUMN_NAME}`")

    treatment_columns = get_treatment_column_names(dataframe.columns)
    if dataframe[[OUTCOME_COLUMN_NAME, *treatment_columns]].isna().any().any():
        raise ValueError("Dataset has missing values in the outcome or treatment columns")

    instrument = None
    if INSTRUMENT_COLUMN_NAME in dataframe.columns:
        instrument = dataframe[INSTRUMENT_COLUMN_NAME].to_numpy()

    control = None
    if CONTROL_COLUMN_NAME in dataframe.columns:
        control = dataframe[CONTROL_COLUMN_NAME].to_numpy(dtype=float)

    return Dataset(
        y=dataframe[OUTCOME_COLUMN_NAME].to_numpy(dtype=float),
        x=dataframe[treatment_columns].to_numpy(dtype=float),
        z=instrument,
        v=control,
        mutually_exclusive=mutually_exclusive,
    )


def get_treatment_column_names(columns) -> list:
    columns = list(columns)
    if TREATMENT_COLUMN_NAME in columns:
        return [TREATMENT_COLUMN_NAME]

    numbered_columns = []
    treatment_number = 1
    while f"{TREATMENT_COLUMN_NAME}{treatment_number}" in columns:
        numbered_columns.append(f"{TREATMENT_COLUMN_NAME}{treatment_number}")
        treatment_number += 1
    if not numbered_columns:
        raise ValueError(
            f"Dataset needs a treatment column `{TREATMENT_COLUMN_NAME}` or `{TREATMENT_COLUMN_NAME}1..{TREATMENT_COLUMN_NAME}T`"
        )
    return numbered_columns


def dataset_to_dataframe(dataset: Dataset) -> pd.DataFrame:
    columns = {OUTCOME_COLUMN_NAME: dataset.y}
    if dataset.treatment_dimension == 1:
        columns[TREATMENT_COLUMN_NAME] = dataset.x[:, 0]
    else:
        for treatment_index in range(dataset.treatment_dimension):
            columns[f"{TREATMENT_COLUMN_NAME}{treatment_index + 1}"] = dataset.x[:, treatment_index]
    if dataset.z is not None:
        columns[INSTRUMENT_COLUMN_NAME] = dataset.z.astype(np.int64)
    if dataset.v is not None:
        columns[CONTROL_COLUMN_NAME] = dataset.v
    return pd.DataFrame(columns)


def save_dataset_to_csv(dataset: Dataset, csv_path: Union[str, Path]) -> Path:
    csv_path = Path(csv_path)
    save_dataframe_to_csv(dataset_to_dataframe(dataset), csv_path)
    logger.info(f"Saved dataset with {dataset.n} rows to {csv_path}")
    return csv_path


def save_dataframe_to_csv(dataframe: pd.DataFrame, csv_path: Union[str, Path]) -> None:
    with atomic_write_path(csv_path) as temporary_path:
        dataframe.to_csv(temporary_path, index=False, encoding="utf-8", float_format="%.17g")
