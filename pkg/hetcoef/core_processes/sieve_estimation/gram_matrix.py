import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.linalg import eigvalsh

logger = logging.getLogger(__name__)

ROWS_PER_BLOCK = 8192
RELATIVE_SINGULARITY_THRESHOLD = 1e-10


def accumulate_gram_matrix(design: np.ndarray, n_threads: int = 1) -> np.ndarray:
    """D'D / n summed over row blocks; blocks are reduced in order so the result does not depend on n_threads"""
    number_of_rows = design.shape[0]
    if number_of_rows == 0:
        raise ValueError("Cannot form a Gram matrix from an empty design")

    number_of_blocks = max(1, int(np.ceil(number_of_rows / ROWS_PER_BLOCK)))
    row_blocks = np.array_split(np.arange(number_of_rows), number_of_blocks)

    def block_cross_product(rows: np.ndarray) -> np.ndarray:
        block = design[rows]
        return block.T @ block

    if n_threads > 1 and number_of_blocks > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as executor:
            partial_sums = list(executor.map(block_cross_product, row_blocks))
    else:
        partial_sums = [block_cross_product(rows) for rows in row_blocks]

    gram_matrix = np.zeros((design.shape[1], design.shape[1]))
    for partial_sum in partial_sums:
        gram_matrix += partial_sum
    gram_matrix /= number_of_rows
    return (gram_matrix + gram_matrix.T) / 2.0


def gram_eigenvalues(gram_matrix: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix"""
    return eigvalsh(gram_matrix)


def singularity_threshold(max_eigenvalue: float, dimension: int) -> float:
    """tau = 1e-10 * dim * lambda_max"""
    return RELATIVE_SINGULARITY_THRESHOLD * dimension * max(float(max_eigenvalue), 0.0)


def is_numerically_singular(eigenvalues: np.ndarray) -> bool:
    max_eigenvalue = float(eigenvalues[-1])
    if max_eigenvalue <= 0.0:
        return True
    return float(eigenvalues[0]) < singularity_threshold(max_eigenvalue, eigenvalues.shape[0])
