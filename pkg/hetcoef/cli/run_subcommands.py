import argparse
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from hetcoef.cli.build_argument_parser import CONTROL_FROM_DISCRETE_Z, STUDY_APPROXIMATION
from hetcoef.core_processes.control_variable.estimate_control import estimate_control, passthrough_control
from hetcoef.core_processes.identification_diagnostics.run_diagnostics import run_diagnostics
from hetcoef.core_processes.montecarlo.run_montecarlo import approximation_study, run, supports_treatment_effects
from hetcoef.core_processes.sieve_estimation.fit_sieve_model import fit
from hetcoef.core_processes.sieve_estimation.structural_functions import (
    asf_grid,
    ate,
    average_derivative,
    mean_q_hat,
    treatment_grid,
)
from hetcoef.core_processes.simulate_data.ground_truth_functions import save_ground_truth_to_json
from hetcoef.core_processes.simulate_data.simulate import simulate
from hetcoef.data_layer.basis_models.basis_spec import BasisKind
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.dataset_models.dataset_csv import (
    load_dataset_from_csv,
    save_dataframe_to_csv,
    save_dataset_to_csv,
)
from hetcoef.data_layer.diagnostics_models.diagnostics_models import DiagnosticsSettings
from hetcoef.data_layer.dgp_models.dgp_config import DgpConfig
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate
from hetcoef.data_layer.montecarlo_models.montecarlo_models import McConfig
from hetcoef.system.paths_and_filenames.file_and_folder_names import (
    ASF_GRID_CSV_FILE_NAME,
    EIGENVALUE_PROFILE_CSV_FILE_NAME,
    TREATMENT_COLUMN_NAME,
)
from hetcoef.system.paths_and_filenames.path_getters import get_ground_truth_json_path, get_thread_count
from hetcoef.utilities.atomic_write import atomic_write_paths
from hetcoef.utilities.load_config_file import load_config_model
from hetcoef.utilities.save_dictionary_to_json import save_dictionary_to_json

logger = logging.getLogger(__name__)


def run_simulate(args: argparse.Namespace) -> None:
    dgp_config = load_config_model(args.config, DgpConfig)
    if args.seed is not None:
        dgp_config = dgp_config.with_seed(args.seed)

    dataset, ground_truth = simulate(dgp_config, args.n)
    with atomic_write_paths(args.out, get_ground_truth_json_path(args.out)) as (dataset_path, ground_truth_path):
        save_dataset_to_csv(dataset, dataset_path)
        save_ground_truth_to_json(ground_truth, ground_truth_path)
    logger.success(f"Simulated {dataset.n} rows ({dgp_config.design.value}, seed {dgp_config.seed}) to {args.out}")


def run_control(args: argparse.Namespace) -> None:
    dataset = load_dataset_from_csv(args.data)
    control = estimate_control(dataset)
    save_dataset_to_csv(dataset.with_control(control.v_hat), args.out)
    logger.success(f"Wrote control variable for {dataset.n} rows to {args.out}")


def build_control_estimate(dataset: Dataset, control_source: str) -> ControlEstimate:
    if control_source == CONTROL_FROM_DISCRETE_Z:
        return estimate_control(dataset)
    return passthrough_control(dataset)


def run_estimate(args: argparse.Namespace) -> None:
    dataset = load_dataset_from_csv(args.data)
    control = build_control_estimate(dataset, args.control)
    fitted_model = fit(dataset, control, args.p, args.psi, ridge=args.ridge, n_threads=get_thread_count(args.threads))

    model_document = fitted_model.to_json_dictionary()
    model_document["mean_q_hat"] = mean_q_hat(fitted_model, control).tolist()
    model_document["cell_counts"] = control.cell_counts_for_json()
    if supports_treatment_effects(args.p):
        model_document["ate"] = np.atleast_1d(ate(fitted_model, control)).tolist()
    if args.p.is_differentiable and dataset.treatment_dimension == 1:
        model_document["average_derivative"] = average_derivative(fitted_model, dataset, control)

    if args.p.kind == BasisKind.TREATMENT_DUMMIES:
        grid_points = treatment_grid(fitted_model)
    else:
        treatments = dataset.x[:, 0]
        grid_points = np.linspace(float(np.min(treatments)), float(np.max(treatments)), args.grid_points)
    asf_table = build_asf_table(grid_points, asf_grid(fitted_model, control, grid_points))

    asf_grid_path = args.asf_grid or str(Path(args.out).parent / ASF_GRID_CSV_FILE_NAME)
    with atomic_write_paths(args.out, asf_grid_path) as (model_path, asf_table_path):
        save_dictionary_to_json(save_path=model_path, dictionary=model_document)
        save_dataframe_to_csv(asf_table, asf_table_path)
    logger.success(f"Saved fitted model to {args.out} and ASF grid to {asf_grid_path}")


def build_asf_table(grid_points: np.ndarray, asf_values: np.ndarray) -> pd.DataFrame:
    grid_points = np.asarray(grid_points, dtype=float)
    if grid_points.ndim == 1 or grid_points.shape[1] == 1:
        columns = {TREATMENT_COLUMN_NAME: grid_points.reshape(-1)}
    else:
        columns = {
            f"{TREATMENT_COLUMN_NAME}{treatment_index + 1}": grid_points[:, treatment_index]
            for treatment_index in range(grid_points.shape[1])
        }
    columns["asf"] = asf_values
    return pd.DataFrame(columns)


def run_diagnose(args: argparse.Namespace) -> None:
    dataset = load_dataset_from_csv(args.data, mutually_exclusive=args.mutually_exclusive)
    control = build_control_estimate(dataset, args.control)
    report, eigenvalue_profile = run_diagnostics(dataset, control, args.p, DiagnosticsSettings(n_bins=args.bins))

    profile_path = args.profile or str(Path(args.out).parent / EIGENVALUE_PROFILE_CSV_FILE_NAME)
    with atomic_write_paths(args.out, profile_path) as (report_path, eigenvalue_profile_path):
        save_dictionary_to_json(save_path=report_path, dictionary=report.to_json_dictionary())
        save_dataframe_to_csv(eigenvalue_profile, eigenvalue_profile_path)
    logger.success(f"Saved diagnostics report to {args.out} and eigenvalue profile to {profile_path}")


def run_mc(args: argparse.Namespace) -> None:
    mc_config = load_config_model(args.config, McConfig)
    mc_config = mc_config.model_copy(update={"n_workers": get_thread_count(args.threads, default=mc_config.n_workers)})

    if args.study == STUDY_APPROXIMATION:
        report = approximation_study(mc_config, use_tqdm=args.progress)
    else:
        report = run(mc_config, use_tqdm=args.progress)

    with atomic_write_paths(args.out_csv, args.out_json) as (table_path, report_path):
        save_dataframe_to_csv(report.to_dataframe(), table_path)
        save_dictionary_to_json(save_path=report_path, dictionary=report.to_json_dictionary())
    logger.success(f"Saved Monte Carlo report ({len(report.records)} cells) to {args.out_csv} and {args.out_json}")


SUBCOMMAND_RUNNERS = {
    "simulate": run_simulate,
    "control": run_control,
    "estimate": run_estimate,
    "diagnose": run_diagnose,
    "mc": run_mc,
}
