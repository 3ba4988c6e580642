import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from hetcoef.core_processes.basis_functions.evaluate_basis import eval_p_derivative_matrix
from hetcoef.core_processes.montecarlo.replication import (
    ASF_TARGET,
    ATE_TARGET,
    AVERAGE_DERIVATIVE_TARGET,
    CRF_HOLDOUT_MSE_TARGET,
    IN_SAMPLE_MSE_TARGET,
    HoldoutSample,
    ReplicationOutcome,
    ReplicationTask,
    TargetDefinition,
    run_replication,
)
from hetcoef.core_processes.simulate_data.ground_truth_functions import (
    build_ground_truth,
    true_asf,
    true_control_regression,
    true_q0,
)
from hetcoef.core_processes.simulate_data.simulate import simulate
from hetcoef.data_layer.basis_models.basis_spec import BasisKind, BasisSpec
from hetcoef.data_layer.dgp_models.dgp_config import DesignKind
from hetcoef.data_layer.dgp_models.ground_truth import GroundTruth
from hetcoef.data_layer.montecarlo_models.montecarlo_models import McCellRecord, McConfig, McReport
from hetcoef.system.paths_and_filenames.file_and_folder_names import MONTE_CARLO_PROGRESS_BAR_STRING

logger = logging.getLogger(__name__)

# holdout draws never share a seed with replication base_seed + r
HOLDOUT_SEED_OFFSET = 2**62


def run(config: McConfig, use_tqdm: bool = False) -> McReport:
    """
    R replications per (n, K) cell with seed = base_seed + replication index, scoring ASF / ATE /
    average derivative estimates against the analytic ground truth. Fit failures are counted, not raised.
    """
    logger.info(
        f"Monte Carlo run: n_grid={config.n_grid}, K={config.psi_dimensions}, R={config.replications}, "
        f"{config.dgp.design.value} design"
    )
    ground_truth = build_ground_truth(config.dgp)
    targets = define_run_targets(config, ground_truth)
    if not targets:
        raise ValueError("No Monte Carlo target applies: give an x_grid or use a treatment / differentiable design")

    records = run_cells(config=config, targets=targets, holdout=None, use_tqdm=use_tqdm)
    logger.success(f"Monte Carlo run finished: {len(records)} cell records")
    return McReport(records=records, replications=config.replications, base_seed=config.base_seed)


def approximation_study(config: McConfig, use_tqdm: bool = False) -> McReport:
    """In-sample mean squared residual and holdout error of the fitted CRF against the true CRF, per (n, K)"""
    if np.any(np.diff(config.psi_dimensions) <= 0):
        raise ValueError(f"Approximation studies need strictly increasing K, got {config.psi_dimensions}")
    logger.info(
        f"Approximation study: K={config.psi_dimensions}, n_grid={config.n_grid}, holdout n={config.holdout_n}"
    )
    ground_truth = build_ground_truth(config.dgp)
    holdout = draw_holdout_sample(config, ground_truth)
    targets = [TargetDefinition(target=IN_SAMPLE_MSE_TARGET), TargetDefinition(target=CRF_HOLDOUT_MSE_TARGET)]

    records = run_cells(config=config, targets=targets, holdout=holdout, use_tqdm=use_tqdm)
    logger.success(f"Approximation study finished: {len(records)} cell records")
    return McReport(records=records, replications=config.replications, base_seed=config.base_seed)


def rate_ratios(
    report: McReport,
    target: str,
    x: Optional[float] = None,
    treatment: Optional[int] = None,
    K: Optional[int] = None,
) -> np.ndarray:
    """RMSE(n_{k+1}) / RMSE(n_k) along the sample-size grid"""
    records = [record for record in report.select(target, x=x, treatment=treatment) if K is None or record.K == K]
    if len({record.K for record in records}) > 1:
        raise ValueError("Report holds several K values for this target, pick one with K=")
    records = sorted(records, key=lambda record: record.n)
    if any(record.rmse is None for record in records):
        raise ValueError(f"Some cells for {target} have no successful replications")
    rmse_values = np.array([record.rmse for record in records])
    return rmse_values[1:] / rmse_values[:-1]


def supports_treatment_effects(p_spec: BasisSpec) -> bool:
    return p_spec.kind == BasisKind.TREATMENT_DUMMIES or (p_spec.kind == BasisKind.POWER and p_spec.dimension == 2)


def define_run_targets(config: McConfig, ground_truth: GroundTruth) -> List[TargetDefinition]:
    targets = []
    if config.p_spec.input_dimension == 1:
        for x in config.x_grid:
            targets.append(TargetDefinition(target=ASF_TARGET, x=float(x), truth=true_asf(ground_truth, x)))

    if config.dgp.design != DesignKind.TRIANGULAR and supports_treatment_effects(config.p_spec):
        if isinstance(ground_truth.ate, list):
            for treatment_index, effect in enumerate(ground_truth.ate):
                targets.append(TargetDefinition(target=ATE_TARGET, treatment=treatment_index + 1, truth=effect))
        else:
            targets.append(TargetDefinition(target=ATE_TARGET, truth=ground_truth.ate))

    if config.dgp.design == DesignKind.TRIANGULAR and config.p_spec.is_differentiable:
        holdout = draw_holdout_sample(config, ground_truth)
        derivative_matrix = eval_p_derivative_matrix(config.p_spec, holdout.x)
        truth = float(np.mean(np.sum(derivative_matrix * true_q0(ground_truth, holdout.v), axis=1)))
        targets.append(TargetDefinition(target=AVERAGE_DERIVATIVE_TARGET, truth=truth))
    return targets


def draw_holdout_sample(config: McConfig, ground_truth: GroundTruth) -> HoldoutSample:
    holdout_dgp = config.dgp.with_seed(config.base_seed + HOLDOUT_SEED_OFFSET).model_copy(
        update={"observe_control": True}
    )
    holdout_data, _ = simulate(holdout_dgp, config.holdout_n)
    treatments = holdout_data.x[:, 0] if holdout_data.treatment_dimension == 1 else holdout_data.x
    return HoldoutSample(
        x=treatments,
        v=holdout_data.v,
        true_crf=true_control_regression(ground_truth, treatments, holdout_data.v),
    )


def run_cells(
    config: McConfig,
    targets: List[TargetDefinition],
    holdout: Optional[HoldoutSample],
    use_tqdm: bool,
) -> List[McCellRecord]:
    records = []
    for n in config.n_grid:
        for psi_spec in config.psi_specs:
            tasks = [
                ReplicationTask(
                    replication_index=replication_index,
                    seed=config.base_seed + replication_index,
                    n=n,
                    dgp=config.dgp,
                    p_spec=config.p_spec,
                    psi_spec=psi_spec,
                    ridge=config.ridge,
                    control_method=config.control_method,
                    targets=targets,
                    holdout=holdout,
                )
                for replication_index in range(config.replications)
            ]
            outcomes = execute_replications(
                tasks,
                n_workers=config.n_workers,
                use_tqdm=use_tqdm,
                description=f"{MONTE_CARLO_PROGRESS_BAR_STRING} (n={n}, K={psi_spec.dimension})",
            )
            cell_records = aggregate_cell(n=n, psi_spec=psi_spec, targets=targets, outcomes=outcomes)
            for record in cell_records:
                logger.debug(
                    f"n={n} K={psi_spec.dimension} {record.target}: mean={record.mean_estimate} "
                    f"bias={record.bias} rmse={record.rmse} failures={record.failures}"
                )
            records.extend(cell_records)
    return records


def execute_replications(
    tasks: List[ReplicationTask], n_workers: int, use_tqdm: bool, description: str
) -> List[ReplicationOutcome]:
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as executor:
            outcomes = list(
                tqdm(
                    executor.map(run_replication, tasks, chunksize=max(1, len(tasks) // (4 * n_workers))),
                    total=len(tasks),
                    desc=description,
                    disable=not use_tqdm,
                )
            )
    else:
        outcomes = [
            run_replication(task) for task in tqdm(tasks, desc=description, disable=not use_tqdm)
        ]
    return sorted(outcomes, key=lambda outcome: outcome.replication_index)


def aggregate_cell(
    n: int,
    psi_spec: BasisSpec,
    targets: List[TargetDefinition],
    outcomes: List[ReplicationOutcome],
) -> List[McCellRecord]:
    """Bias and RMSE over successful replications only; failures reported alongside"""
    successful = [outcome for outcome in outcomes if outcome.succeeded]
    failures = len(outcomes) - len(successful)
    mean_gram_min_eigenvalue = (
        float(np.mean([outcome.gram_min_eigenvalue for outcome in successful])) if successful else None
    )

    records = []
    for target_index, definition in enumerate(targets):
        record = McCellRecord(
            n=n,
            K=psi_spec.dimension,
            psi=psi_spec.to_flag(),
            target=definition.target,
            x=definition.x,
            treatment=definition.treatment,
            truth=definition.truth,
            mean_gram_min_eigenvalue=mean_gram_min_eigenvalue,
            successes=len(successful),
            failures=failures,
        )
        if successful:
            estimates = np.array([outcome.values[target_index] for outcome in successful])
            record.mean_estimate = float(np.mean(estimates))
            if estimates.shape[0] > 1:
                record.mc_standard_error = float(np.std(estimates, ddof=1) / np.sqrt(estimates.shape[0]))
            if definition.truth is not None:
                errors = estimates - definition.truth
                record.bias = float(np.mean(errors))
                record.rmse = float(np.sqrt(np.mean(errors**2)))
        records.append(record)
    return records
