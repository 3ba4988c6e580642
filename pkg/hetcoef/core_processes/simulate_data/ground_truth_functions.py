import logging
from pathlib import Path
from typing import Union

import numpy as np

from hetcoef.core_processes.basis_functions.evaluate_basis import eval_p, eval_p_matrix
from hetcoef.core_processes.simulate_data.dependence_transforms import apply_dependence_transform
from hetcoef.data_layer.dgp_models.dgp_config import DesignKind, DgpConfig
from hetcoef.data_layer.dgp_models.ground_truth import GroundTruth
from hetcoef.utilities.load_config_file import load_config_dictionary
from hetcoef.utilities.save_dictionary_to_json import save_dictionary_to_json

logger = logging.getLogger(__name__)


def build_ground_truth(config: DgpConfig) -> GroundTruth:
    return GroundTruth(
        p_spec=config.p_spec,
        design=config.design,
        mean_epsilon=list(config.heterogeneity.mean),
        dependence=config.heterogeneity.dependence,
        dependence_transform=config.heterogeneity.dependence_transform,
        ate=calculate_true_ate(config),
    )


def calculate_true_ate(config: DgpConfig) -> Union[float, list, None]:
    if config.design == DesignKind.TRIANGULAR:
        return None

    mean_epsilon = np.asarray(config.heterogeneity.mean, dtype=float)
    untreated = np.zeros(config.p_spec.input_dimension)
    untreated_value = eval_p(config.p_spec, untreated) @ mean_epsilon

    effects = []
    for treatment_index in range(config.p_spec.input_dimension):
        treated = np.zeros(config.p_spec.input_dimension)
        treated[treatment_index] = 1.0
        effects.append(float(eval_p(config.p_spec, treated) @ mean_epsilon - untreated_value))
    if len(effects) == 1:
        return effects[0]
    return effects


def true_asf(ground_truth: GroundTruth, x) -> float:
    return float(eval_p(ground_truth.p_spec, x) @ np.asarray(ground_truth.mean_epsilon, dtype=float))


def true_q0(ground_truth: GroundTruth, v_values: np.ndarray) -> np.ndarray:
    """(n, J) matrix of q0(v_i) = mean_epsilon + dependence * g(v_i)"""
    v_column = np.asarray(v_values, dtype=float).reshape(-1)
    shift = ground_truth.dependence * apply_dependence_transform(ground_truth.dependence_transform, v_column)
    return np.asarray(ground_truth.mean_epsilon, dtype=float)[np.newaxis, :] + shift[:, np.newaxis]


def true_control_regression(ground_truth: GroundTruth, x_values: np.ndarray, v_values: np.ndarray) -> np.ndarray:
    """E[Y | X = x_i, V = v_i] for each row"""
    p_matrix = eval_p_matrix(ground_truth.p_spec, x_values)
    q0_matrix = true_q0(ground_truth, v_values)
    if p_matrix.shape[0] != q0_matrix.shape[0]:
        raise ValueError(f"x has {p_matrix.shape[0]} rows but v has {q0_matrix.shape[0]}")
    return np.sum(p_matrix * q0_matrix, axis=1)


def population_second_moment(config: DgpConfig, v: float) -> np.ndarray:
    """
    sum_m pi_m p(Q(v|z_m)) p(Q(v|z_m))' with Q(v|z) = a(z) + b(z) v,
    the second moment of p(X) given V = v implied by the known first stage.
    """
    if config.design != DesignKind.TRIANGULAR:
        raise ValueError("population_second_moment is defined for triangular designs only")
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"v must lie in [0, 1], got {v}")

    conditional_quantiles = config.first_stage_intercepts + config.first_stage_slopes * v
    p_matrix = eval_p_matrix(config.p_spec, conditional_quantiles)
    weights = np.asarray(config.instrument.probabilities, dtype=float)
    return (p_matrix * weights[:, np.newaxis]).T @ p_matrix


def save_ground_truth_to_json(ground_truth: GroundTruth, json_path: Union[str, Path]) -> Path:
    return save_dictionary_to_json(save_path=json_path, dictionary=ground_truth.model_dump(mode="json"))


def load_ground_truth_from_json(json_path: Union[str, Path]) -> GroundTruth:
    return GroundTruth.model_validate(load_config_dictionary(json_path))
