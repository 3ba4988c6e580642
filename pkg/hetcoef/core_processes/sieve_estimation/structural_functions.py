import logging
from typing import Union

import numpy as np

from hetcoef.core_processes.basis_functions.evaluate_basis import (
    eval_p,
    eval_p_derivative_matrix,
    eval_p_matrix,
    eval_psi,
    eval_psi_matrix,
)
from hetcoef.data_layer.basis_models.basis_spec import BasisKind
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate
from hetcoef.data_layer.estimation_models.fitted_model import FittedModel

logger = logging.getLogger(__name__)


def q_hat(fit: FittedModel, v: float) -> np.ndarray:
    """q_hat_j(v) = b_j' psi(v), length J"""
    return fit.coefficient_matrix @ eval_psi(fit.psi_spec, v)


def q_hat_matrix(fit: FittedModel, v_values: np.ndarray) -> np.ndarray:
    """(n, J) matrix with row i equal to q_hat(v_i)"""
    return eval_psi_matrix(fit.psi_spec, v_values) @ fit.coefficient_matrix.T


def predict_crf(fit: FittedModel, x, v: float) -> float:
    return float(eval_p(fit.p_spec, x) @ q_hat(fit, v))


def predict_crf_matrix(fit: FittedModel, x_values: np.ndarray, v_values: np.ndarray) -> np.ndarray:
    p_matrix = eval_p_matrix(fit.p_spec, x_values)
    q_matrix = q_hat_matrix(fit, v_values)
    if p_matrix.shape[0] != q_matrix.shape[0]:
        raise ValueError(f"x has {p_matrix.shape[0]} rows but v has {q_matrix.shape[0]}")
    return np.sum(p_matrix * q_matrix, axis=1)


def mean_q_hat(fit: FittedModel, control: ControlEstimate) -> np.ndarray:
    """(1/n) sum_i q_hat(v_hat_i), the coefficient vector of the ASF in p(x)"""
    if control.n != fit.n:
        raise ValueError(f"Control estimate has {control.n} rows but the model was fit on {fit.n}")
    return q_hat_matrix(fit, control.v_hat).mean(axis=0)


def asf(fit: FittedModel, control: ControlEstimate, x) -> float:
    return float(eval_p(fit.p_spec, x) @ mean_q_hat(fit, control))


def asf_grid(fit: FittedModel, control: ControlEstimate, x_points: np.ndarray) -> np.ndarray:
    return eval_p_matrix(fit.p_spec, x_points) @ mean_q_hat(fit, control)


def treatment_grid(fit: FittedModel) -> np.ndarray:
    """Untreated row first, then one row per treatment"""
    if fit.p_spec.kind == BasisKind.TREATMENT_DUMMIES:
        return np.vstack([np.zeros(fit.p_spec.treatment_count), np.eye(fit.p_spec.treatment_count)])
    if fit.p_spec.kind == BasisKind.POWER and fit.p_spec.dimension == 2:
        return np.array([[0.0], [1.0]])
    raise ValueError(
        f"Treatment effects need a treatment_dummies or power:2 p basis, got {fit.p_spec.to_flag()}"
    )


def ate(fit: FittedModel, control: ControlEstimate) -> Union[float, np.ndarray]:
    """mu(t) - mu(0); a float for a single treatment, a length-T array otherwise"""
    asf_values = asf_grid(fit, control, treatment_grid(fit))
    effects = asf_values[1:] - asf_values[0]
    if effects.shape[0] == 1:
        return float(effects[0])
    return effects


def average_derivative(fit: FittedModel, data: Dataset, control: ControlEstimate) -> float:
    """(1/n) sum_i dp(x_i)/dx' q_hat(v_hat_i)"""
    if not fit.p_spec.is_differentiable:
        raise ValueError(f"average_derivative needs a differentiable p basis, got {fit.p_spec.kind.value}")
    if data.treatment_dimension != 1:
        raise ValueError("average_derivative needs a scalar treatment")
    if control.n != data.n:
        raise ValueError(f"Control estimate has {control.n} rows but the dataset has {data.n}")

    derivative_matrix = eval_p_derivative_matrix(fit.p_spec, data.x[:, 0])
    return float(np.mean(np.sum(derivative_matrix * q_hat_matrix(fit, control.v_hat), axis=1)))
