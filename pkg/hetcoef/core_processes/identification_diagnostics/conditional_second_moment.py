import logging
from typing import List, Optional, Tuple

import numpy as np

from hetcoef.core_processes.basis_functions.evaluate_basis import eval_p_matrix
from hetcoef.core_processes.identification_diagnostics.quantile_bins import (
    adequate_bin_count,
    assign_quantile_bins,
    bin_second_moment,
    is_relatively_nonsingular,
    symmetric_eigenvalues,
)
from hetcoef.data_layer.basis_models.basis_spec import BasisSpec
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.diagnostics_models.diagnostics_models import (
    BinRecord,
    ConditionStatus,
    DiagnosticsSettings,
    Verdict,
)
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate

logger = logging.getLogger(__name__)


def conditional_second_moment(
    data: Dataset,
    control: ControlEstimate,
    p_spec: BasisSpec,
    n_bins: int,
    settings: Optional[DiagnosticsSettings] = None,
) -> Tuple[List[BinRecord], Verdict]:
    """
    Sample E[p(X)p(X)' | V in bin] on equal-quantile bins of v_hat, conditioned on the instrument cell when
    the dataset has one.
    Passes when every adequately populated bin has lambda_min >= eigenvalue_tolerance * lambda_max.
    """
    settings = settings or DiagnosticsSettings(n_bins=n_bins)
    if control.n != data.n:
        raise ValueError(f"Control estimate has {control.n} rows but the dataset has {data.n}")

    minimum_count = adequate_bin_count(p_spec.dimension, settings.min_bin_count)
    p_matrix = eval_p_matrix(p_spec, data.x)

    bin_records = []
    failing_bins = []
    judged_bins = 0
    for quantile_bin in assign_quantile_bins(control.v_hat, n_bins):
        moment = bin_second_moment(p_matrix, quantile_bin.rows, data.z)
        eigenvalues = symmetric_eigenvalues(moment)
        adequately_populated = quantile_bin.count >= minimum_count
        bin_records.append(
            BinRecord(
                bin_index=quantile_bin.index,
                v_lower=quantile_bin.v_lower,
                v_upper=quantile_bin.v_upper,
                v_midpoint=quantile_bin.v_midpoint,
                count=quantile_bin.count,
                adequately_populated=adequately_populated,
                second_moment=moment.tolist(),
                eigenvalues=eigenvalues.tolist(),
                min_eigenvalue=float(eigenvalues[0]),
                determinant=float(np.linalg.det(moment)),
            )
        )
        if not adequately_populated:
            logger.debug(f"Bin {quantile_bin.index} has {quantile_bin.count} < {minimum_count} observations, not judged")
            continue
        judged_bins += 1
        if not is_relatively_nonsingular(eigenvalues, settings.eigenvalue_tolerance):
            failing_bins.append(quantile_bin.index)

    if judged_bins == 0:
        return bin_records, Verdict(
            status=ConditionStatus.NOT_APPLICABLE,
            detail=f"No bin has at least {minimum_count} observations",
        )
    if failing_bins:
        return bin_records, Verdict(
            status=ConditionStatus.FAIL,
            detail=(
                f"E[p(X)p(X)'|V] is numerically singular in {len(failing_bins)} of {judged_bins} bins "
                f"(relative tolerance {settings.eigenvalue_tolerance:g})"
            ),
            failing_bins=failing_bins,
        )
    return bin_records, Verdict(
        status=ConditionStatus.PASS,
        detail=f"E[p(X)p(X)'|V] is nonsingular in all {judged_bins} judged bins",
    )
