import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from hetcoef.core_processes.control_variable.estimate_control import estimate_control, passthrough_control
from hetcoef.core_processes.sieve_estimation.fit_sieve_model import fit
from hetcoef.core_processes.sieve_estimation.structural_functions import (
    asf,
    ate,
    average_derivative,
    predict_crf_matrix,
)
from hetcoef.core_processes.simulate_data.simulate import simulate
from hetcoef.data_layer.basis_models.basis_spec import BasisSpec
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.dgp_models.dgp_config import DgpConfig
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate
from hetcoef.data_layer.estimation_models.fitted_model import FittedModel
from hetcoef.data_layer.montecarlo_models.montecarlo_models import ControlMethod
from hetcoef.utilities.identification_failure_exception import IdentificationFailureError

logger = logging.getLogger(__name__)

ASF_TARGET = "asf"
ATE_TARGET = "ate"
AVERAGE_DERIVATIVE_TARGET = "average_derivative"
CRF_HOLDOUT_MSE_TARGET = "crf_holdout_mse"
IN_SAMPLE_MSE_TARGET = "in_sample_mse"


@dataclass
class TargetDefinition:
    target: str
    x: Optional[float] = None
    treatment: Optional[int] = None
    truth: Optional[float] = None


@dataclass
class HoldoutSample:
    x: np.ndarray
    v: np.ndarray
    true_crf: np.ndarray


@dataclass
class ReplicationTask:
    replication_index: int
    seed: int
    n: int
    dgp: DgpConfig
    p_spec: BasisSpec
    psi_spec: BasisSpec
    ridge: float
    control_method: ControlMethod
    targets: List[TargetDefinition]
    holdout: Optional[HoldoutSample] = None


@dataclass
class ReplicationOutcome:
    replication_index: int
    succeeded: bool
    values: List[float] = field(default_factory=list)
    gram_min_eigenvalue: Optional[float] = None
    failure_reason: Optional[str] = None


def build_control(data: Dataset, control_method: ControlMethod) -> ControlEstimate:
    if control_method == ControlMethod.DISCRETE_Z:
        return estimate_control(data)
    return passthrough_control(data)


def run_replication(task: ReplicationTask) -> ReplicationOutcome:
    """
    One simulate -> control -> fit -> targets pass. A replication whose draw cannot be estimated
    (identification failure, an instrument cell with fewer than 2 rows, n <= J*K) is data, not an error.
    """
    try:
        data, _ = simulate(task.dgp.with_seed(task.seed), task.n)
        control = build_control(data, task.control_method)
        fitted_model = fit(data, control, task.p_spec, task.psi_spec, ridge=task.ridge)
    except (IdentificationFailureError, ValueError, np.linalg.LinAlgError) as e:
        logger.debug(f"Replication {task.replication_index} (seed {task.seed}) failed: {e}")
        return ReplicationOutcome(replication_index=task.replication_index, succeeded=False, failure_reason=str(e))

    values = [
        evaluate_target(definition, fitted_model, data, control, task.holdout) for definition in task.targets
    ]
    return ReplicationOutcome(
        replication_index=task.replication_index,
        succeeded=True,
        values=values,
        gram_min_eigenvalue=fitted_model.gram_min_eigenvalue,
    )


def evaluate_target(
    definition: TargetDefinition,
    fitted_model: FittedModel,
    data: Dataset,
    control: ControlEstimate,
    holdout: Optional[HoldoutSample],
) -> float:
    if definition.target == ASF_TARGET:
        return asf(fitted_model, control, definition.x)
    if definition.target == ATE_TARGET:
        effects = np.atleast_1d(ate(fitted_model, control))
        return float(effects[(definition.treatment or 1) - 1])
    if definition.target == AVERAGE_DERIVATIVE_TARGET:
        return average_derivative(fitted_model, data, control)
    if definition.target == IN_SAMPLE_MSE_TARGET:
        return fitted_model.mean_squared_residual
    if definition.target == CRF_HOLDOUT_MSE_TARGET:
        if holdout is None:
            raise ValueError("Holdout CRF error needs a holdout sample")
        fitted_crf = predict_crf_matrix(fitted_model, holdout.x, holdout.v)
        return float(np.mean((fitted_crf - holdout.true_crf) ** 2))
    raise ValueError(f"Unknown Monte Carlo target: {definition.target}")
