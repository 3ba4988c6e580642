import logging

import numpy as np
from scipy.stats import rankdata

from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate

logger = logging.getLogger(__name__)

MINIMUM_CELL_SIZE = 2
PASSTHROUGH_CLIP = 1e-6


def estimate_control(data: Dataset) -> ControlEstimate:
    """
    Empirical CDF of X within each instrument cell: v_hat_i = (rank_i - 0.5) / n_z,
    with tied X values sharing their average rank.
    """
    if data.z is None:
        raise ValueError("Estimating the control variable needs an instrument column `z`")
    if data.treatment_dimension != 1:
        raise ValueError(f"Estimating the control variable needs a scalar treatment, got {data.treatment_dimension} columns")
    treatments = data.x[:, 0]
    if not np.all(np.isfinite(treatments)):
        raise ValueError("Treatment values must be finite to estimate the control variable")

    instrument_codes, cell_sizes = np.unique(data.z, return_counts=True)
    too_small = cell_sizes < MINIMUM_CELL_SIZE
    if np.any(too_small):
        raise ValueError(
            f"Instrument cells {instrument_codes[too_small].tolist()} have fewer than {MINIMUM_CELL_SIZE} observations"
        )

    v_hat = np.empty(data.n)
    for instrument_code, cell_size in zip(instrument_codes, cell_sizes):
        cell_rows = np.flatnonzero(data.z == instrument_code)
        v_hat[cell_rows] = (rankdata(treatments[cell_rows], method="average") - 0.5) / cell_size
        logger.trace(f"Instrument cell z={instrument_code}: {cell_size} observations")

    logger.info(f"Estimated control variable across {len(instrument_codes)} instrument cells (n={data.n})")
    return ControlEstimate(
        v_hat=v_hat,
        cell_counts={int(code): int(size) for code, size in zip(instrument_codes, cell_sizes)},
    )


def passthrough_control(data: Dataset) -> ControlEstimate:
    if data.v is None:
        raise ValueError("Dataset has no observed control column `v`")
    v_values = np.asarray(data.v, dtype=float)
    if np.any(~np.isfinite(v_values)) or np.any(v_values < 0.0) or np.any(v_values > 1.0):
        raise ValueError("Observed control values must lie in [0, 1]")
    return ControlEstimate(v_hat=np.clip(v_values, PASSTHROUGH_CLIP, 1.0 - PASSTHROUGH_CLIP))
