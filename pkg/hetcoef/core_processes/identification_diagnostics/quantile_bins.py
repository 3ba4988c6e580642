import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.linalg import eigvalsh

logger = logging.getLogger(__name__)


@dataclass
class QuantileBin:
    index: int
    rows: np.ndarray
    v_lower: float
    v_upper: float

    @property
    def v_midpoint(self) -> float:
        return (self.v_lower + self.v_upper) / 2.0

    @property
    def count(self) -> int:
        return int(self.rows.shape[0])


def assign_quantile_bins(v_hat: np.ndarray, n_bins: int) -> List[QuantileBin]:
    """
    Sort rows by v_hat (stable) and split them into n_bins groups of near-equal size,
    so every row lands in exactly one bin. A bin's interval spans its members' v_hat.
    """
    v_hat = np.asarray(v_hat, dtype=float).reshape(-1)
    if v_hat.shape[0] == 0:
        raise ValueError("Cannot bin an empty dataset")
    if n_bins < 1:
        raise ValueError(f"n_bins must be positive, got {n_bins}")
    if n_bins > v_hat.shape[0]:
        raise ValueError(f"n_bins = {n_bins} exceeds the number of observations n = {v_hat.shape[0]}")

    sorted_rows = np.argsort(v_hat, kind="stable")
    return [
        QuantileBin(
            index=bin_index,
            rows=bin_rows,
            v_lower=float(v_hat[bin_rows[0]]),
            v_upper=float(v_hat[bin_rows[-1]]),
        )
        for bin_index, bin_rows in enumerate(np.array_split(sorted_rows, n_bins))
    ]


def adequate_bin_count(basis_dimension: int, min_bin_count: int) -> int:
    return max(basis_dimension, min_bin_count)


def second_moment_matrix(p_matrix: np.ndarray) -> np.ndarray:
    """(1/m) sum_i p_i p_i', symmetrised"""
    moment = p_matrix.T @ p_matrix / p_matrix.shape[0]
    return (moment + moment.T) / 2.0


def symmetric_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    return eigvalsh(matrix)


def is_relatively_nonsingular(eigenvalues: np.ndarray, relative_tolerance: float) -> bool:
    """lambda_min >= tolerance * lambda_max (and the matrix is not zero)"""
    max_eigenvalue = float(eigenvalues[-1])
    if max_eigenvalue <= 0.0:
        return False
    return float(eigenvalues[0]) >= relative_tolerance * max_eigenvalue


def bin_second_moment(
    p_matrix: np.ndarray, rows: np.ndarray, instrument_codes: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    E[p(X)p(X)' | V in bin]. With an instrument column, (V, Z) pins X down, so the moment is
    sum_z share_z pbar_z pbar_z' over the per-cell means of p(X) in the bin; its rank is at most
    the number of instrument cells present.
    """
    bin_p_matrix = p_matrix[rows]
    if instrument_codes is None:
        return second_moment_matrix(bin_p_matrix)

    _, cell_index, cell_counts = np.unique(instrument_codes[rows], return_inverse=True, return_counts=True)
    cell_means = np.zeros((cell_counts.shape[0], bin_p_matrix.shape[1]))
    np.add.at(cell_means, cell_index.reshape(-1), bin_p_matrix)
    cell_means /= cell_counts[:, np.newaxis]
    cell_shares = cell_counts / bin_p_matrix.shape[0]
    moment = (cell_means * cell_shares[:, np.newaxis]).T @ cell_means
    return (moment + moment.T) / 2.0
