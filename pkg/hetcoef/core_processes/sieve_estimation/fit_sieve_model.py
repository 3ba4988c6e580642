import logging

import numpy as np
from scipy.linalg import lstsq

from hetcoef.core_processes.basis_functions.evaluate_basis import design_matrix
from hetcoef.core_processes.sieve_estimation.gram_matrix import (
    accumulate_gram_matrix,
    gram_eigenvalues,
    is_numerically_singular,
    singularity_threshold,
)
from hetcoef.data_layer.basis_models.basis_spec import BasisKind, BasisSpec
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate
from hetcoef.data_layer.estimation_models.fitted_model import FittedModel
from hetcoef.utilities.identification_failure_exception import IdentificationFailureError

logger = logging.getLogger(__name__)


def fit(
    data: Dataset,
    control: ControlEstimate,
    p_spec: BasisSpec,
    psi_spec: BasisSpec,
    ridge: float = 0.0,
    n_threads: int = 1,
) -> FittedModel:
    """
    Least squares of Y on p(X) ⊗ psi(V_hat), minimising mean squared residual + ridge * |b|^2.
    With ridge = 0 a numerically singular Gram matrix raises IdentificationFailureError.
    """
    if ridge < 0:
        raise ValueError(f"ridge must be non-negative, got {ridge}")
    if control.n != data.n:
        raise ValueError(f"Control estimate has {control.n} rows but the dataset has {data.n}")
    number_of_coefficients = p_spec.dimension * psi_spec.dimension
    if data.n <= number_of_coefficients:
        raise ValueError(f"Need more observations than coefficients: n = {data.n} <= J*K = {number_of_coefficients}")

    psi_spec = freeze_indicator_bin_edges(psi_spec, control.v_hat)
    design = design_matrix(p_spec, psi_spec, data.x, control.v_hat)

    gram_matrix = accumulate_gram_matrix(design, n_threads=n_threads)
    eigenvalues = gram_eigenvalues(gram_matrix)
    min_eigenvalue = float(eigenvalues[0])
    max_eigenvalue = float(eigenvalues[-1])
    logger.debug(
        f"Gram matrix ({number_of_coefficients}x{number_of_coefficients}): "
        f"min eigenvalue {min_eigenvalue:.3e}, max eigenvalue {max_eigenvalue:.3e}"
    )

    instrument_support_size = count_instrument_values(data, control)
    # fewer instrument cells than J: E[p(X)p(X)'|V] is singular at every v
    support_too_small = 0 < instrument_support_size < p_spec.dimension
    if ridge == 0.0 and (support_too_small or is_numerically_singular(eigenvalues)):
        threshold = singularity_threshold(max_eigenvalue, number_of_coefficients)
        reason = describe_identification_failure(instrument_support_size, p_spec)
        logger.error(f"Identification failure: {reason} (min eigenvalue {min_eigenvalue:.3e}, threshold {threshold:.3e})")
        raise IdentificationFailureError(min_eigenvalue=min_eigenvalue, threshold=threshold, reason=reason)

    b = solve_penalized_least_squares(design, data.y, ridge)
    residuals = data.y - design @ b

    fitted_model = FittedModel(
        b=b,
        p_spec=p_spec,
        psi_spec=psi_spec,
        ridge=ridge,
        gram_min_eigenvalue=max(min_eigenvalue, 0.0),
        gram_max_eigenvalue=max(max_eigenvalue, 0.0),
        mean_squared_residual=float(np.mean(residuals**2)),
        n=data.n,
        v_bin_edges=psi_spec.bin_edges,
    )
    logger.info(
        f"Fit p={p_spec.to_flag()} psi={psi_spec.to_flag()} on n={data.n} "
        f"(ridge={ridge}, mean squared residual {fitted_model.mean_squared_residual:.4g})"
    )
    return fitted_model


def solve_penalized_least_squares(design: np.ndarray, outcomes: np.ndarray, ridge: float) -> np.ndarray:
    """
    argmin_b |y - D b|^2 / n + ridge |b|^2, solved as ordinary least squares on [D; sqrt(n ridge) I]
    """
    if ridge > 0.0:
        number_of_rows, number_of_columns = design.shape
        design = np.vstack([design, np.sqrt(number_of_rows * ridge) * np.eye(number_of_columns)])
        outcomes = np.concatenate([outcomes, np.zeros(number_of_columns)])
    b, _, _, _ = lstsq(design, outcomes)
    return b


def freeze_indicator_bin_edges(psi_spec: BasisSpec, v_hat: np.ndarray) -> BasisSpec:
    """Indicator bins without explicit edges become the empirical quantile bins of v_hat"""
    if psi_spec.kind != BasisKind.INDICATOR or psi_spec.bin_edges is not None:
        return psi_spec

    bin_edges = np.quantile(v_hat, np.linspace(0.0, 1.0, psi_spec.dimension + 1))
    bin_edges[0] = 0.0
    bin_edges[-1] = 1.0
    if np.any(np.diff(bin_edges) <= 0):
        logger.warning(
            f"Empirical quantiles of v_hat tie for K={psi_spec.dimension} indicator bins, using equal-width bins instead"
        )
        bin_edges = psi_spec.indicator_edges
    return psi_spec.with_bin_edges(bin_edges)


def count_instrument_values(data: Dataset, control: ControlEstimate) -> int:
    """Distinct instrument codes in the data, whatever the control came from; 0 without an instrument"""
    if data.z is not None:
        return int(np.unique(data.z).shape[0])
    return len(control.cell_counts)


def describe_identification_failure(instrument_support_size: int, p_spec: BasisSpec) -> str:
    if 0 < instrument_support_size < p_spec.dimension:
        return (
            f"instrument support smaller than the basis dimension: "
            f"{instrument_support_size} instrument values < J = {p_spec.dimension}"
        )
    return "conditional nonsingularity of E[p(X)p(X)'|V] fails"
