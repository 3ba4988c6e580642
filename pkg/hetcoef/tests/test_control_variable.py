import numpy as np
import pytest
from scipy.stats import kstest

from hetcoef.core_processes.control_variable.estimate_control import estimate_control, passthrough_control
from hetcoef.data_layer.dataset_models.dataset import Dataset


def test_rank_convention():
    control = estimate_control(Dataset(y=np.zeros(3), x=[2.0, 1.0, 3.0], z=[0, 0, 0]))
    assert np.allclose(control.v_hat, [1 / 2, 1 / 6, 5 / 6])
    assert control.cell_counts == {0: 3}


def test_ties_share_the_mid_rank():
    control = estimate_control(Dataset(y=np.zeros(2), x=[5.0, 5.0], z=[1, 1]))
    assert np.allclose(control.v_hat, [0.5, 0.5])


def test_cells_are_ranked_separately():
    control = estimate_control(Dataset(y=np.zeros(5), x=[10.0, 0.0, 20.0, 1.0, 2.0], z=[1, 0, 1, 0, 0]))
    assert np.allclose(control.v_hat, [0.25, 1 / 6, 0.75, 0.5, 5 / 6])
    assert control.cell_counts == {0: 3, 1: 2}


def test_recovers_the_first_stage_error(triangular_data):
    control = estimate_control(triangular_data)
    assert np.max(np.abs(control.v_hat - triangular_data.v)) <= 0.05
    assert kstest(control.v_hat, "uniform").pvalue > 0.01
    assert np.all((control.v_hat > 0) & (control.v_hat < 1))


def test_cell_means_are_one_half(triangular_data):
    control = estimate_control(triangular_data)
    for code in np.unique(triangular_data.z):
        assert np.mean(control.v_hat[triangular_data.z == code]) == pytest.approx(0.5, abs=1e-12)


def test_monotone_transform_within_cells_leaves_control_unchanged(triangular_data):
    transformed_x = np.where(triangular_data.z == 0, np.exp(triangular_data.x[:, 0]), 3.0 * triangular_data.x[:, 0] - 7.0)
    transformed = Dataset(y=triangular_data.y, x=transformed_x, z=triangular_data.z)
    assert np.array_equal(estimate_control(transformed).v_hat, estimate_control(triangular_data).v_hat)


def test_estimate_control_errors():
    with pytest.raises(ValueError):
        estimate_control(Dataset(y=np.zeros(3), x=[1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        estimate_control(Dataset(y=np.zeros(3), x=[1.0, 2.0, 3.0], z=[0, 0, 1]))
    with pytest.raises(ValueError):
        estimate_control(Dataset(y=np.zeros(2), x=[1.0, np.inf], z=[0, 0]))
    with pytest.raises(ValueError):
        estimate_control(Dataset(y=np.zeros(2), x=[[0.0, 1.0], [1.0, 0.0]], z=[0, 0]))


def test_passthrough_control():
    control = passthrough_control(Dataset(y=np.zeros(2), x=[0.0, 1.0], v=[0.2, 0.8]))
    assert np.allclose(control.v_hat, [0.2, 0.8])
    assert control.cell_counts == {}

    clamped = passthrough_control(Dataset(y=np.zeros(2), x=[0.0, 1.0], v=[0.0, 1.0]))
    assert clamped.v_hat.tolist() == [1e-6, 1 - 1e-6]


def test_passthrough_control_errors():
    with pytest.raises(ValueError):
        passthrough_control(Dataset(y=np.zeros(2), x=[0.0, 1.0]))

    # bypasses Dataset validation, which would already reject v = 1.5
    unvalidated = Dataset.model_construct(y=np.zeros(2), x=np.zeros((2, 1)), z=None, v=np.array([0.2, 1.5]))
    with pytest.raises(ValueError):
        passthrough_control(unvalidated)
