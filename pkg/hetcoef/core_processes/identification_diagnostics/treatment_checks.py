import logging
from typing import List, Optional, Tuple

import numpy as np

from hetcoef.core_processes.identification_diagnostics.quantile_bins import (
    adequate_bin_count,
    assign_quantile_bins,
    second_moment_matrix,
    symmetric_eigenvalues,
)
from hetcoef.core_processes.sieve_estimation.gram_matrix import is_numerically_singular
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.diagnostics_models.diagnostics_models import (
    ConditionStatus,
    DiagnosticsSettings,
    PropensityRecord,
    Verdict,
)
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate

logger = logging.getLogger(__name__)

DETERMINANT_IDENTITY_TOLERANCE = 1e-12


def is_binary_treatment(data: Dataset) -> bool:
    return data.treatment_dimension == 1 and bool(np.all(np.isin(data.x, (0.0, 1.0))))


def is_mutually_exclusive_treatment(data: Dataset) -> bool:
    return bool(np.all(np.isin(data.x, (0.0, 1.0)))) and bool(np.all(data.x.sum(axis=1) <= 1.0))


def treatment_design_matrix(treatments: np.ndarray) -> np.ndarray:
    """(1, X_1, ..., X_T) per row"""
    return np.column_stack([np.ones(treatments.shape[0]), treatments])


def check_binary_overlap(
    data: Dataset,
    control: ControlEstimate,
    n_bins: int,
    settings: Optional[DiagnosticsSettings] = None,
) -> Tuple[List[PropensityRecord], Verdict]:
    """
    Per-bin propensity P_hat = mean(X); passes when overlap_tolerance <= P_hat <= 1 - overlap_tolerance
    in every adequately populated bin. The bin second moment of (1, X) has determinant P_hat (1 - P_hat).
    """
    settings = settings or DiagnosticsSettings(n_bins=n_bins)
    if not is_binary_treatment(data):
        raise ValueError("Binary overlap check needs a scalar treatment taking values in {0, 1}")

    minimum_count = adequate_bin_count(2, settings.min_bin_count)
    design = treatment_design_matrix(data.x)

    records = []
    failing_bins = []
    agreements = []
    for quantile_bin in assign_quantile_bins(control.v_hat, n_bins):
        propensity = float(np.mean(data.x[quantile_bin.rows, 0]))
        moment = second_moment_matrix(design[quantile_bin.rows])
        eigenvalues = symmetric_eigenvalues(moment)
        determinant = float(np.linalg.det(moment))
        identity_error = abs(determinant - propensity * (1.0 - propensity))
        if identity_error > DETERMINANT_IDENTITY_TOLERANCE:
            logger.warning(
                f"Bin {quantile_bin.index}: det {determinant:.3e} differs from P(1-P) = "
                f"{propensity * (1.0 - propensity):.3e} by {identity_error:.3e}"
            )
        eigenvalue_nonsingular = not is_numerically_singular(eigenvalues)
        applicable = quantile_bin.count >= minimum_count
        records.append(
            PropensityRecord(
                bin_index=quantile_bin.index,
                count=quantile_bin.count,
                frequencies=[propensity],
                untreated_share=1.0 - propensity,
                applicable=applicable,
                determinant=determinant,
                eigenvalue_nonsingular=eigenvalue_nonsingular,
                identity_error=identity_error,
            )
        )
        if not applicable:
            continue
        has_overlap = settings.overlap_tolerance <= propensity <= 1.0 - settings.overlap_tolerance
        agreements.append(has_overlap == eigenvalue_nonsingular)
        if not has_overlap:
            failing_bins.append(quantile_bin.index)

    if not agreements:
        return records, Verdict(
            status=ConditionStatus.NOT_APPLICABLE, detail=f"No bin has at least {minimum_count} observations"
        )
    eigenvalue_agreement = float(np.mean(agreements))
    if failing_bins:
        first_failure = records[failing_bins[0]]
        return records, Verdict(
            status=ConditionStatus.FAIL,
            detail=(
                f"No overlap in {len(failing_bins)} bins, e.g. bin {first_failure.bin_index} "
                f"has P_hat = {first_failure.frequencies[0]:.4f}"
            ),
            failing_bins=failing_bins,
            eigenvalue_agreement=eigenvalue_agreement,
        )
    return records, Verdict(
        status=ConditionStatus.PASS,
        detail=f"0 < P_hat(V) < 1 in all {len(agreements)} judged bins",
        eigenvalue_agreement=eigenvalue_agreement,
    )


def check_mutually_exclusive(
    data: Dataset,
    control: ControlEstimate,
    n_bins: int,
    settings: Optional[DiagnosticsSettings] = None,
) -> Tuple[List[PropensityRecord], Verdict]:
    """
    With mutually exclusive treatment dummies, E[(1, X)(1, X)' | V] is nonsingular exactly when every
    treatment frequency is positive and 1 - sum_s f_s > 0. Bins with a zero treatment frequency are not judged.
    """
    settings = settings or DiagnosticsSettings(n_bins=n_bins)
    if not is_mutually_exclusive_treatment(data):
        raise ValueError("Treatment rows must be 0/1 dummies with at most one active treatment per row")

    treatment_count = data.treatment_dimension
    minimum_count = adequate_bin_count(treatment_count + 1, settings.min_bin_count)
    design = treatment_design_matrix(data.x)

    records = []
    failing_bins = []
    agreements = []
    for quantile_bin in assign_quantile_bins(control.v_hat, n_bins):
        frequencies = data.x[quantile_bin.rows].mean(axis=0)
        untreated_share = float(1.0 - frequencies.sum())
        moment = second_moment_matrix(design[quantile_bin.rows])
        eigenvalues = symmetric_eigenvalues(moment)
        eigenvalue_nonsingular = not is_numerically_singular(eigenvalues)
        applicable = quantile_bin.count >= minimum_count and bool(np.all(frequencies > 0))
        records.append(
            PropensityRecord(
                bin_index=quantile_bin.index,
                count=quantile_bin.count,
                frequencies=frequencies.tolist(),
                untreated_share=untreated_share,
                applicable=applicable,
                determinant=float(np.linalg.det(moment)),
                eigenvalue_nonsingular=eigenvalue_nonsingular,
            )
        )
        if not applicable:
            continue
        frequency_criterion = untreated_share >= settings.eigenvalue_tolerance
        agreements.append(frequency_criterion == eigenvalue_nonsingular)
        if not frequency_criterion:
            failing_bins.append(quantile_bin.index)

    if not agreements:
        return records, Verdict(
            status=ConditionStatus.NOT_APPLICABLE,
            detail=f"No bin has at least {minimum_count} observations with every treatment present",
        )
    eigenvalue_agreement = float(np.mean(agreements))
    if failing_bins:
        return records, Verdict(
            status=ConditionStatus.FAIL,
            detail=f"1 - sum of treatment frequencies is zero in {len(failing_bins)} of {len(agreements)} judged bins",
            failing_bins=failing_bins,
            eigenvalue_agreement=eigenvalue_agreement,
        )
    return records, Verdict(
        status=ConditionStatus.PASS,
        detail=f"Every judged bin ({len(agreements)}) keeps a positive untreated share",
        eigenvalue_agreement=eigenvalue_agreement,
    )
