import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from hetcoef.core_processes.basis_functions.evaluate_basis import eval_p_matrix
from hetcoef.core_processes.identification_diagnostics.quantile_bins import (
    adequate_bin_count,
    assign_quantile_bins,
    bin_second_moment,
    is_relatively_nonsingular,
    symmetric_eigenvalues,
)
from hetcoef.data_layer.basis_models.basis_spec import BasisKind, BasisSpec
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.diagnostics_models.diagnostics_models import (
    BinaryInstrumentRecord,
    ConditionStatus,
    DiagnosticsSettings,
    SupportRecord,
    Verdict,
)
from hetcoef.data_layer.estimation_models.control_estimate import ControlEstimate

logger = logging.getLogger(__name__)

LINEAR_P_SPEC = BasisSpec(kind=BasisKind.POWER, dimension=2)


@dataclass
class InstrumentQuantile:
    code: int
    share: float
    value: float
    lower: float
    upper: float


@dataclass
class InstrumentCells:
    codes: np.ndarray
    shares: np.ndarray
    sorted_treatments: List[np.ndarray]

    def quantiles_at(self, v: float, separation_z_score: float) -> List[InstrumentQuantile]:
        """
        Q_hat(v|z) per cell with the (k - 0.5)/n_z plotting positions, plus the order-statistic band
        Q_hat(v -+ c sqrt(v(1-v)/n_z) | z)
        """
        quantiles = []
        for code, share, cell_treatments in zip(self.codes, self.shares, self.sorted_treatments):
            half_width = separation_z_score * np.sqrt(v * (1.0 - v) / cell_treatments.shape[0])
            value, lower, upper = np.quantile(
                cell_treatments,
                [v, max(0.0, v - half_width), min(1.0, v + half_width)],
                method="hazen",
            )
            quantiles.append(
                InstrumentQuantile(code=int(code), share=float(share), value=float(value), lower=float(lower), upper=float(upper))
            )
        return quantiles


def split_instrument_cells(data: Dataset) -> InstrumentCells:
    if data.z is None:
        raise ValueError("Instrument diagnostics need an instrument column `z`")
    if data.treatment_dimension != 1:
        raise ValueError("Instrument diagnostics need a scalar treatment")
    codes, counts = np.unique(data.z, return_counts=True)
    return InstrumentCells(
        codes=codes,
        shares=counts / data.n,
        sorted_treatments=[np.sort(data.x[data.z == code, 0]) for code in codes],
    )


def quantile_tolerance(data: Dataset, settings: DiagnosticsSettings) -> float:
    """delta_q = scale * sd(X)"""
    return settings.quantile_tolerance_scale * float(np.std(data.x[:, 0]))


def merge_distinct_quantiles(quantiles: List[InstrumentQuantile], tolerance: float) -> List[List[InstrumentQuantile]]:
    """
    Groups quantiles that cannot be told apart: a new group starts only when the next value exceeds the
    group's largest value by more than `tolerance` and its band lies above every band in the group.
    """
    ordered = sorted(quantiles, key=lambda quantile: quantile.value)
    groups = [[ordered[0]]]
    for quantile in ordered[1:]:
        current_group = groups[-1]
        group_value = max(member.value for member in current_group)
        group_upper = max(member.upper for member in current_group)
        if quantile.value - group_value > tolerance and quantile.lower > group_upper:
            groups.append([quantile])
        else:
            current_group.append(quantile)
    return groups


def representation_matrix(p_spec: BasisSpec, groups: List[List[InstrumentQuantile]]) -> np.ndarray:
    """sum_g pi_g p(Q_g) p(Q_g)' over merged quantile values (share-weighted group means)"""
    weights = np.array([sum(member.share for member in group) for group in groups])
    values = np.array(
        [sum(member.share * member.value for member in group) / weight for group, weight in zip(groups, weights)]
    )
    p_matrix = eval_p_matrix(p_spec, values)
    return (p_matrix * weights[:, np.newaxis]).T @ p_matrix


def count_instrument_support(
    data: Dataset,
    control: ControlEstimate,
    p_spec: BasisSpec,
    n_bins: int,
    settings: Optional[DiagnosticsSettings] = None,
) -> Tuple[List[SupportRecord], Verdict]:
    """
    |Q_hat(v)|, the number of distinct conditional quantiles of X across instrument cells at each bin midpoint.
    The conditional second moment can only be nonsingular where |Q(v)| >= J.
    """
    settings = settings or DiagnosticsSettings(n_bins=n_bins)
    cells = split_instrument_cells(data)
    tolerance = quantile_tolerance(data, settings)
    minimum_count = adequate_bin_count(p_spec.dimension, settings.min_bin_count)
    p_matrix = eval_p_matrix(p_spec, data.x)

    records = []
    failing_bins = []
    implication_holds = []
    judged_bins = 0
    for quantile_bin in assign_quantile_bins(control.v_hat, n_bins):
        quantiles = cells.quantiles_at(quantile_bin.v_midpoint, settings.separation_z_score)
        groups = merge_distinct_quantiles(quantiles, tolerance)

        try:
            representation_eigenvalues = symmetric_eigenvalues(representation_matrix(p_spec, groups)).tolist()
        except ValueError as e:
            logger.debug(f"Bin {quantile_bin.index}: no representation matrix ({e})")
            representation_eigenvalues = None

        records.append(
            SupportRecord(
                bin_index=quantile_bin.index,
                v_midpoint=quantile_bin.v_midpoint,
                quantiles={str(quantile.code): quantile.value for quantile in quantiles},
                distinct_quantiles=[max(member.value for member in group) for group in groups],
                cardinality=len(groups),
                representation_eigenvalues=representation_eigenvalues,
            )
        )
        if quantile_bin.count < minimum_count:
            continue
        judged_bins += 1
        if len(groups) < p_spec.dimension:
            failing_bins.append(quantile_bin.index)
            bin_eigenvalues = symmetric_eigenvalues(bin_second_moment(p_matrix, quantile_bin.rows, data.z))
            implication_holds.append(not is_relatively_nonsingular(bin_eigenvalues, settings.eigenvalue_tolerance))

    if judged_bins == 0:
        return records, Verdict(
            status=ConditionStatus.NOT_APPLICABLE, detail=f"No bin has at least {minimum_count} observations"
        )
    eigenvalue_agreement = float(np.mean(implication_holds)) if implication_holds else None
    if failing_bins:
        smallest_cardinality = min(records[bin_index].cardinality for bin_index in failing_bins)
        return records, Verdict(
            status=ConditionStatus.FAIL,
            detail=(
                f"Instrument support smaller than the basis dimension: |Q(v)| = {smallest_cardinality} < J = "
                f"{p_spec.dimension} in {len(failing_bins)} of {judged_bins} bins ({len(cells.codes)} instrument values)"
            ),
            failing_bins=failing_bins,
            eigenvalue_agreement=eigenvalue_agreement,
        )
    return records, Verdict(
        status=ConditionStatus.PASS,
        detail=f"|Q(v)| >= J = {p_spec.dimension} in all {judged_bins} judged bins",
    )


def check_binary_instrument(
    data: Dataset,
    control: ControlEstimate,
    n_bins: int,
    settings: Optional[DiagnosticsSettings] = None,
) -> Tuple[List[BinaryInstrumentRecord], Verdict]:
    """
    With two instrument values and p(x) = (1, x), distinct conditional quantiles Q(v|z1) != Q(v|z2)
    make E[p(X)p(X)'|V = v] nonsingular, with determinant pi_1 pi_2 (Q1 - Q2)^2.
    """
    settings = settings or DiagnosticsSettings(n_bins=n_bins)
    cells = split_instrument_cells(data)
    if len(cells.codes) != 2:
        raise ValueError(f"Binary instrument check needs exactly 2 instrument values, got {len(cells.codes)}")
    tolerance = quantile_tolerance(data, settings)
    minimum_count = adequate_bin_count(LINEAR_P_SPEC.dimension, settings.min_bin_count)
    p_matrix = eval_p_matrix(LINEAR_P_SPEC, data.x)

    records = []
    failing_bins = []
    implication_holds = []
    judged_bins = 0
    for quantile_bin in assign_quantile_bins(control.v_hat, n_bins):
        quantiles = cells.quantiles_at(quantile_bin.v_midpoint, settings.separation_z_score)
        separated = len(merge_distinct_quantiles(quantiles, tolerance)) == 2
        quantile_gap = abs(quantiles[0].value - quantiles[1].value)
        bin_eigenvalues = symmetric_eigenvalues(bin_second_moment(p_matrix, quantile_bin.rows, data.z))
        eigenvalue_nonsingular = is_relatively_nonsingular(bin_eigenvalues, settings.eigenvalue_tolerance)
        records.append(
            BinaryInstrumentRecord(
                bin_index=quantile_bin.index,
                v_midpoint=quantile_bin.v_midpoint,
                quantile_gap=quantile_gap,
                separated=separated,
                implied_determinant=quantiles[0].share * quantiles[1].share * quantile_gap**2,
                eigenvalue_nonsingular=eigenvalue_nonsingular,
            )
        )
        if quantile_bin.count < minimum_count:
            continue
        judged_bins += 1
        if separated:
            implication_holds.append(eigenvalue_nonsingular)
        else:
            failing_bins.append(quantile_bin.index)

    if judged_bins == 0:
        return records, Verdict(
            status=ConditionStatus.NOT_APPLICABLE, detail=f"No bin has at least {minimum_count} observations"
        )
    eigenvalue_agreement = float(np.mean(implication_holds)) if implication_holds else None
    if failing_bins:
        return records, Verdict(
            status=ConditionStatus.FAIL,
            detail=f"Conditional quantiles coincide across the two instrument values in {len(failing_bins)} of {judged_bins} bins",
            failing_bins=failing_bins,
            eigenvalue_agreement=eigenvalue_agreement,
        )
    return records, Verdict(
        status=ConditionStatus.PASS,
        detail=f"Conditional quantiles differ across the two instrument values in all {judged_bins} judged bins",
        eigenvalue_agreement=eigenvalue_agreement,
    )


def instrument_cell_counts(data: Dataset) -> Dict[str, int]:
    if data.z is None:
        return {}
    codes, counts = np.unique(data.z, return_counts=True)
    return {str(int(code)): int(count) for code, count in zip(codes, counts)}
