import numpy as np
import pytest

from hetcoef.core_processes.control_variable.estimate_control import estimate_control, passthrough_control
from hetcoef.core_processes.identification_diagnostics.conditional_second_moment import conditional_second_moment
from hetcoef.core_processes.identification_diagnostics.instrument_checks import (
    check_binary_instrument,
    count_instrument_support,
)
from hetcoef.core_processes.identification_diagnostics.quantile_bins import assign_quantile_bins, bin_second_moment
from hetcoef.core_processes.identification_diagnostics.run_diagnostics import run_diagnostics
from hetcoef.core_processes.identification_diagnostics.treatment_checks import (
    check_binary_overlap,
    check_mutually_exclusive,
)
from hetcoef.core_processes.sieve_estimation.fit_sieve_model import fit
from hetcoef.core_processes.sieve_estimation.structural_functions import asf
from hetcoef.core_processes.simulate_data.simulate import simulate
from hetcoef.data_layer.basis_models.basis_spec import BasisSpec
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.diagnostics_models.diagnostics_models import (
    BINARY_INSTRUMENT,
    BINARY_OVERLAP,
    CONDITION_NAMES,
    CONDITIONAL_NONSINGULARITY,
    INSTRUMENT_SUPPORT,
    MUTUALLY_EXCLUSIVE_TREATMENTS,
    ConditionStatus,
    DiagnosticsSettings,
)
from hetcoef.tests.conftest import build_binary_config, build_triangular_config

POWER_2 = BasisSpec(kind="power", dimension=2)
POWER_3 = BasisSpec(kind="power", dimension=3)


def evenly_spaced_control(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def alternating_binary_dataset(n: int = 600) -> Dataset:
    return Dataset(y=np.zeros(n), x=np.arange(n) % 2, v=evenly_spaced_control(n))


def test_quantile_bins_partition_the_rows():
    v_hat = np.random.default_rng(3).uniform(size=1003)
    bins = assign_quantile_bins(v_hat, 10)
    assert sum(quantile_bin.count for quantile_bin in bins) == 1003
    assert np.array_equal(np.sort(np.concatenate([quantile_bin.rows for quantile_bin in bins])), np.arange(1003))
    for lower_bin, upper_bin in zip(bins[:-1], bins[1:]):
        assert lower_bin.v_upper <= upper_bin.v_lower

    with pytest.raises(ValueError):
        assign_quantile_bins(v_hat[:5], 10)


def test_bin_second_moment_conditions_on_the_instrument_cell():
    p_matrix = np.column_stack([np.ones(4), [0.0, 2.0, 5.0, 5.0]])
    rows = np.arange(4)
    assert np.allclose(bin_second_moment(p_matrix, rows), [[1.0, 3.0], [3.0, 13.5]])
    # cell means (1, 1) and (1, 5) with equal shares
    assert np.allclose(bin_second_moment(p_matrix, rows, np.array([0, 0, 1, 1])), [[1.0, 3.0], [3.0, 13.0]])


def test_second_moment_of_half_treated_bins():
    dataset = alternating_binary_dataset()
    per_bin, verdict = conditional_second_moment(dataset, passthrough_control(dataset), POWER_2, 10)

    assert verdict.passed
    assert len(per_bin) == 10
    for bin_record in per_bin:
        assert np.allclose(bin_record.second_moment, [[1.0, 0.5], [0.5, 0.5]])
        assert bin_record.determinant == pytest.approx(0.25)
        assert bin_record.min_eigenvalue == pytest.approx((1.5 - np.sqrt(1.25)) / 2.0)


def test_constant_treatment_is_singular_in_every_bin():
    dataset = Dataset(y=np.zeros(600), x=np.ones(600), v=evenly_spaced_control(600))
    per_bin, verdict = conditional_second_moment(dataset, passthrough_control(dataset), POWER_2, 10)

    assert verdict.status == ConditionStatus.FAIL
    assert verdict.failing_bins == list(range(10))
    assert all(abs(bin_record.min_eigenvalue) < 1e-12 for bin_record in per_bin)


def test_underpopulated_bins_are_not_judged():
    dataset = alternating_binary_dataset(40)
    per_bin, verdict = conditional_second_moment(dataset, passthrough_control(dataset), POWER_2, 4)
    assert verdict.status == ConditionStatus.NOT_APPLICABLE
    assert not any(bin_record.adequately_populated for bin_record in per_bin)


def test_quadratic_basis_with_two_instrument_values_is_unidentified():
    dataset, _ = simulate(build_triangular_config(mean=(1.0, 2.0, 0.5)), 20000)
    control = passthrough_control(dataset)

    per_bin, verdict = conditional_second_moment(dataset, control, POWER_3, 10)
    assert verdict.status == ConditionStatus.FAIL
    for bin_record in per_bin:
        assert bin_record.adequately_populated
        assert bin_record.min_eigenvalue < 1e-6 * bin_record.eigenvalues[-1]

    support_profile, support_verdict = count_instrument_support(dataset, control, POWER_3, 10)
    assert support_verdict.status == ConditionStatus.FAIL
    assert "instrument support smaller than the basis dimension" in support_verdict.detail.lower()
    assert all(record.cardinality <= 2 for record in support_profile)
    assert support_verdict.eigenvalue_agreement == 1.0

    report, profile = run_diagnostics(dataset, control, POWER_3)
    assert report.overall_verdicts[CONDITIONAL_NONSINGULARITY].status == ConditionStatus.FAIL
    assert report.overall_verdicts[INSTRUMENT_SUPPORT].status == ConditionStatus.FAIL
    assert report.overall_verdicts[CONDITIONAL_NONSINGULARITY].failing_bins == list(range(10))
    assert np.all(profile["eigenvalue_1"] < 1e-6 * profile["max_eigenvalue"])


def test_overlap_passes_when_every_bin_is_half_treated():
    dataset = alternating_binary_dataset()
    records, verdict = check_binary_overlap(dataset, passthrough_control(dataset), 10)
    assert verdict.passed
    assert verdict.eigenvalue_agreement == 1.0
    assert all(record.frequencies == [0.5] for record in records)


def test_overlap_fails_in_an_always_treated_bin():
    x = np.arange(600) % 2
    x[540:] = 1
    dataset = Dataset(y=np.zeros(600), x=x, v=evenly_spaced_control(600))
    records, verdict = check_binary_overlap(dataset, passthrough_control(dataset), 10)

    assert verdict.status == ConditionStatus.FAIL
    assert verdict.failing_bins == [9]
    assert "bin 9" in verdict.detail
    assert records[9].frequencies == [1.0]
    assert not records[9].eigenvalue_nonsingular
    assert verdict.eigenvalue_agreement == 1.0


def test_overlap_with_a_control_dependent_propensity():
    dataset, _ = simulate(build_binary_config(propensity_intercept=0.05, propensity_slope=0.9), 20000)
    records, verdict = check_binary_overlap(dataset, passthrough_control(dataset), 10)

    assert verdict.passed
    assert all(record.identity_error <= 1e-12 for record in records)
    propensities = [record.frequencies[0] for record in records]
    assert propensities[0] < 0.2 < 0.8 < propensities[-1]


def test_overlap_needs_a_binary_treatment(triangular_data):
    with pytest.raises(ValueError):
        check_binary_overlap(triangular_data, passthrough_control(triangular_data), 10)


def exclusive_treatments(first_count: int, second_count: int, n: int = 100) -> Dataset:
    x = np.zeros((n, 2))
    x[:first_count, 0] = 1.0
    x[first_count : first_count + second_count, 1] = 1.0
    return Dataset(y=np.zeros(n), x=x, v=evenly_spaced_control(n))


def test_mutually_exclusive_treatments_with_an_untreated_share():
    dataset = exclusive_treatments(30, 40)
    records, verdict = check_mutually_exclusive(dataset, passthrough_control(dataset), 1)
    assert verdict.passed
    assert records[0].untreated_share == pytest.approx(0.3)
    assert records[0].frequencies == pytest.approx([0.3, 0.4])


def test_mutually_exclusive_treatments_without_untreated_rows():
    dataset = exclusive_treatments(60, 40)
    records, verdict = check_mutually_exclusive(dataset, passthrough_control(dataset), 1)
    assert verdict.status == ConditionStatus.FAIL
    assert records[0].untreated_share == pytest.approx(0.0, abs=1e-12)
    assert not records[0].eigenvalue_nonsingular
    assert verdict.eigenvalue_agreement == 1.0


def test_frequency_criterion_agrees_with_eigenvalues_on_random_designs():
    random_generator = np.random.default_rng(2024)
    n = 1000
    for design_index in range(100):
        treatment_count = int(random_generator.integers(2, 4))
        probabilities = random_generator.dirichlet(np.ones(treatment_count + 1))
        if design_index % 2 == 1:
            probabilities[0] = 0.0
            probabilities /= probabilities.sum()
        categories = random_generator.choice(treatment_count + 1, size=n, p=probabilities)
        x = np.eye(treatment_count + 1)[categories][:, 1:]
        dataset = Dataset(y=np.zeros(n), x=x, v=random_generator.uniform(0.01, 0.99, size=n))

        _, verdict = check_mutually_exclusive(dataset, passthrough_control(dataset), 10)
        if verdict.eigenvalue_agreement is not None:
            assert verdict.eigenvalue_agreement == 1.0
        if design_index % 2 == 1 and verdict.status != ConditionStatus.NOT_APPLICABLE:
            assert verdict.status == ConditionStatus.FAIL


def test_instrument_support_matching_a_linear_basis(triangular_data):
    records, verdict = count_instrument_support(triangular_data, passthrough_control(triangular_data), POWER_2, 10)
    assert verdict.passed
    assert all(record.cardinality == 2 for record in records)
    for record in records:
        # first stage x = z + v
        assert record.quantiles["1"] - record.quantiles["0"] == pytest.approx(1.0, abs=0.05)


def test_irrelevant_instrument_collapses_the_support():
    dataset, _ = simulate(build_triangular_config(intercepts=[0.0, 0.0], slopes=[1.0, 1.0]), 10000)
    control = passthrough_control(dataset)

    records, verdict = count_instrument_support(dataset, control, POWER_2, 10)
    assert verdict.status == ConditionStatus.FAIL
    assert all(record.cardinality == 1 for record in records)

    _, binary_verdict = check_binary_instrument(dataset, control, 10)
    assert binary_verdict.status == ConditionStatus.FAIL


def test_binary_instrument_with_shifted_first_stage(triangular_data):
    records, verdict = check_binary_instrument(triangular_data, passthrough_control(triangular_data), 10)
    assert verdict.passed
    assert verdict.eigenvalue_agreement == 1.0
    for record in records:
        assert record.separated
        assert record.implied_determinant == pytest.approx(0.25, abs=0.03)


def test_binary_instrument_needs_two_instrument_values():
    dataset, _ = simulate(build_triangular_config(support_values=(0.0, 1.0, 2.0)), 3000)
    with pytest.raises(ValueError):
        check_binary_instrument(dataset, passthrough_control(dataset), 10)


def test_instrument_checks_need_an_instrument(binary_data):
    with pytest.raises(ValueError):
        count_instrument_support(binary_data, passthrough_control(binary_data), POWER_2, 10)


def test_identified_triangular_design_recovers_the_asf_slope():
    dataset, _ = simulate(build_triangular_config(), 20000)
    control = estimate_control(dataset)

    _, support_verdict = count_instrument_support(dataset, control, POWER_2, 10)
    _, binary_verdict = check_binary_instrument(dataset, control, 10)
    assert support_verdict.passed
    assert binary_verdict.passed

    fitted_model = fit(dataset, control, POWER_2, BasisSpec(kind="power", dimension=2))
    slope = asf(fitted_model, control, 1.0) - asf(fitted_model, control, 0.0)
    assert slope == pytest.approx(2.0, abs=0.1)


def test_run_diagnostics_on_triangular_data(triangular_data):
    report, profile = run_diagnostics(
        triangular_data, passthrough_control(triangular_data), POWER_2, DiagnosticsSettings(n_bins=20)
    )

    assert set(report.overall_verdicts) == set(CONDITION_NAMES)
    assert report.overall_verdicts[CONDITIONAL_NONSINGULARITY].passed
    assert report.overall_verdicts[INSTRUMENT_SUPPORT].passed
    assert report.overall_verdicts[BINARY_INSTRUMENT].passed
    assert report.overall_verdicts[BINARY_OVERLAP].status == ConditionStatus.NOT_APPLICABLE
    assert report.overall_verdicts[MUTUALLY_EXCLUSIVE_TREATMENTS].status == ConditionStatus.NOT_APPLICABLE
    assert report.cell_counts == {"0": int(np.sum(triangular_data.z == 0)), "1": int(np.sum(triangular_data.z == 1))}

    assert len(profile) == 20
    assert profile["count"].sum() == triangular_data.n
    for column in ["bin_index", "v_midpoint", "min_eigenvalue", "eigenvalue_1", "eigenvalue_2", "support_cardinality"]:
        assert column in profile.columns

    for bin_record in report.per_bin:
        moment = np.array(bin_record.second_moment)
        assert np.allclose(moment, moment.T)
        assert bin_record.min_eigenvalue > 0.0


def test_run_diagnostics_on_binary_treatment(binary_data):
    report, profile = run_diagnostics(binary_data, passthrough_control(binary_data), POWER_2)
    assert report.overall_verdicts[BINARY_OVERLAP].passed
    assert report.overall_verdicts[INSTRUMENT_SUPPORT].status == ConditionStatus.NOT_APPLICABLE
    assert "frequency_1" in profile.columns
    assert "untreated_share" in profile.columns

    json_dictionary = report.to_json_dictionary()
    assert json_dictionary["overall_verdicts"][BINARY_OVERLAP]["status"] == "pass"
    assert json_dictionary["p_spec"]["kind"] == "power"


def test_run_diagnostics_on_multiple_treatments(multi_data):
    p_spec = BasisSpec(kind="treatment_dummies", treatment_count=2)
    report, profile = run_diagnostics(multi_data, passthrough_control(multi_data), p_spec)
    assert report.overall_verdicts[MUTUALLY_EXCLUSIVE_TREATMENTS].passed
    assert report.overall_verdicts[BINARY_OVERLAP].status == ConditionStatus.NOT_APPLICABLE
    assert {"frequency_1", "frequency_2", "untreated_share"} <= set(profile.columns)
