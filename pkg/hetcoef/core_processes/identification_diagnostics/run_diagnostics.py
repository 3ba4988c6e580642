import logging
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from hetcoef.core_processes.identification_diagnostics.conditional_second_moment import conditional_second_moment
from hetcoef.core_processes.identification_diagnostics.instrument_checks import (
    check_binary_instrument,
    count_instrument_support,
    instrument_cell_counts,
)
from hetcoef.core_processes.identification_diagnostics.treatment_checks import (
    check_binary_overlap,
    check_mutually_exclusive,
    is_binary_treatment,
    is_mutually_exclusive_treatment,
)
from hetcoef.data_layer.basis_models.basis_spec import BasisKind, BasisSpec
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.diagnostics_models.diagnostics_models import (
    BINARY_INSTRUMENT,
    BINARY_OVERLAP,
    CONDITIONAL_NONSINGULARITY,
    INSTRUMENT_SUPPORT,
    MUTUALLY_EXCLUSIVE_TREATMENTS,
    ConditionStatus,
    DiagnosticsReport,
    DiagnosticsSettings,
    Verdict,
)
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate

logger = logging.getLogger(__name__)


def not_applicable(detail: str) -> Verdict:
    return Verdict(status=ConditionStatus.NOT_APPLICABLE, detail=detail)


def run_diagnostics(
    data: Dataset,
    control: ControlEstimate,
    p_spec: BasisSpec,
    settings: Optional[DiagnosticsSettings] = None,
) -> Tuple[DiagnosticsReport, pd.DataFrame]:
    """Every applicable identification check on one dataset, plus a per-bin eigenvalue profile table"""
    settings = settings or DiagnosticsSettings()
    n_bins = settings.n_bins
    logger.info(f"Running identification diagnostics on n={data.n} with {n_bins} bins, p={p_spec.to_flag()}")

    per_bin, nonsingularity_verdict = conditional_second_moment(data, control, p_spec, n_bins, settings)
    verdicts = {CONDITIONAL_NONSINGULARITY: nonsingularity_verdict}

    propensity_profile = None
    if is_binary_treatment(data):
        propensity_profile, verdicts[BINARY_OVERLAP] = check_binary_overlap(data, control, n_bins, settings)
    else:
        verdicts[BINARY_OVERLAP] = not_applicable("Treatment is not a scalar 0/1 variable")

    if data.treatment_dimension >= 2 and is_mutually_exclusive_treatment(data):
        propensity_profile, verdicts[MUTUALLY_EXCLUSIVE_TREATMENTS] = check_mutually_exclusive(
            data, control, n_bins, settings
        )
    else:
        verdicts[MUTUALLY_EXCLUSIVE_TREATMENTS] = not_applicable(
            "Needs two or more mutually exclusive 0/1 treatment columns"
        )

    support_profile = None
    binary_instrument_profile = None
    if data.z is not None and data.treatment_dimension == 1:
        support_profile, verdicts[INSTRUMENT_SUPPORT] = count_instrument_support(data, control, p_spec, n_bins, settings)
        if np.unique(data.z).shape[0] == 2 and p_spec.kind == BasisKind.POWER and p_spec.dimension == 2:
            binary_instrument_profile, verdicts[BINARY_INSTRUMENT] = check_binary_instrument(
                data, control, n_bins, settings
            )
        else:
            verdicts[BINARY_INSTRUMENT] = not_applicable("Needs exactly 2 instrument values and p(x) = (1, x)")
    else:
        verdicts[INSTRUMENT_SUPPORT] = not_applicable("Needs an instrument column and a scalar treatment")
        verdicts[BINARY_INSTRUMENT] = not_applicable("Needs an instrument column and a scalar treatment")

    for condition_name, verdict in verdicts.items():
        log_method = logger.warning if verdict.status == ConditionStatus.FAIL else logger.info
        log_method(f"{condition_name}: {verdict.status.value} - {verdict.detail}")

    report = DiagnosticsReport(
        n=data.n,
        p_spec=p_spec,
        settings=settings,
        per_bin=per_bin,
        overall_verdicts=verdicts,
        support_profile=support_profile,
        propensity_profile=propensity_profile,
        binary_instrument_profile=binary_instrument_profile,
        cell_counts=instrument_cell_counts(data),
    )
    return report, build_eigenvalue_profile(report)


def build_eigenvalue_profile(report: DiagnosticsReport) -> pd.DataFrame:
    """One row per bin, plot-ready"""
    rows = []
    for bin_record in report.per_bin:
        row = {
            "bin_index": bin_record.bin_index,
            "v_lower": bin_record.v_lower,
            "v_upper": bin_record.v_upper,
            "v_midpoint": bin_record.v_midpoint,
            "count": bin_record.count,
            "adequately_populated": bin_record.adequately_populated,
            "min_eigenvalue": bin_record.min_eigenvalue,
            "max_eigenvalue": bin_record.eigenvalues[-1],
            "determinant": bin_record.determinant,
        }
        for eigenvalue_index, eigenvalue in enumerate(bin_record.eigenvalues):
            row[f"eigenvalue_{eigenvalue_index + 1}"] = eigenvalue
        rows.append(row)
    profile = pd.DataFrame(rows)

    if report.support_profile is not None:
        profile["support_cardinality"] = [record.cardinality for record in report.support_profile]
    if report.propensity_profile is not None:
        profile["untreated_share"] = [record.untreated_share for record in report.propensity_profile]
        treatment_count = len(report.propensity_profile[0].frequencies)
        for treatment_index in range(treatment_count):
            profile[f"frequency_{treatment_index + 1}"] = [
                record.frequencies[treatment_index] for record in report.propensity_profile
            ]
    if report.binary_instrument_profile is not None:
        profile["quantile_gap"] = [record.quantile_gap for record in report.binary_instrument_profile]
    return profile
