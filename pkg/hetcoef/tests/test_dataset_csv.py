import numpy as np
import pandas as pd
import pytest

from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.dataset_models.dataset_csv import load_dataset_from_csv, save_dataset_to_csv
from hetcoef.utilities.atomic_write import atomic_write_paths


def test_scalar_treatment_csv(tmp_path, triangular_data):
    csv_path = save_dataset_to_csv(triangular_data, tmp_path / "data.csv")
    assert list(pd.read_csv(csv_path).columns) == ["y", "x", "z", "v"]

    loaded = load_dataset_from_csv(csv_path)
    assert loaded.n == triangular_data.n
    assert np.array_equal(loaded.y, triangular_data.y)
    assert np.array_equal(loaded.x, triangular_data.x)
    assert np.array_equal(loaded.z, triangular_data.z)
    assert np.array_equal(loaded.v, triangular_data.v)


def test_numbered_treatment_columns(tmp_path, multi_data):
    csv_path = save_dataset_to_csv(multi_data, tmp_path / "multi.csv")
    assert list(pd.read_csv(csv_path).columns) == ["y", "x1", "x2", "v"]

    loaded = load_dataset_from_csv(csv_path, mutually_exclusive=True)
    assert loaded.treatment_dimension == 2
    assert loaded.z is None
    assert np.array_equal(loaded.x, multi_data.x)


def test_optional_columns_may_be_absent(tmp_path):
    csv_path = tmp_path / "plain.csv"
    csv_path.write_text("y,x\n1.0,0.5\n2.0,1.5\n", encoding="utf-8")
    loaded = load_dataset_from_csv(csv_path)
    assert not loaded.has_instrument
    assert not loaded.has_control
    assert loaded.x.shape == (2, 1)


def test_missing_file_and_columns(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset_from_csv(tmp_path / "nope.csv")

    no_outcome = tmp_path / "no_outcome.csv"
    no_outcome.write_text("x,z\n1.0,0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_dataset_from_csv(no_outcome)

    no_treatment = tmp_path / "no_treatment.csv"
    no_treatment.write_text("y,z\n1.0,0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_dataset_from_csv(no_treatment)


def test_non_exclusive_rows_are_rejected(tmp_path):
    csv_path = tmp_path / "overlapping.csv"
    csv_path.write_text("y,x1,x2\n1.0,1,1\n0.0,0,1\n", encoding="utf-8")
    assert load_dataset_from_csv(csv_path).treatment_dimension == 2
    with pytest.raises(ValueError):
        load_dataset_from_csv(csv_path, mutually_exclusive=True)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(y=[1.0, 2.0], x=[1.0])
    with pytest.raises(ValueError):
        Dataset(y=[1.0, 2.0], x=[1.0, 2.0], z=[0, -1])
    with pytest.raises(ValueError):
        Dataset(y=[1.0, 2.0], x=[1.0, 2.0], z=[0.5, 1.0])
    with pytest.raises(ValueError):
        Dataset(y=[1.0, 2.0], x=[1.0, 2.0], v=[0.2, 1.5])


def test_failed_write_leaves_no_partial_file(tmp_path, monkeypatch):
    dataset = Dataset(y=[1.0, 2.0], x=[0.0, 1.0])

    def failing_to_csv(*args, **kwargs):
        raise OSError("disk full")

    monkeypatch.setattr(pd.DataFrame, "to_csv", failing_to_csv)
    with pytest.raises(OSError):
        save_dataset_to_csv(dataset, tmp_path / "out.csv")
    assert list(tmp_path.iterdir()) == []


def test_paired_outputs_appear_together_or_not_at_all(tmp_path):
    model_path, grid_path = tmp_path / "model.json", tmp_path / "grid.csv"
    with pytest.raises(OSError):
        with atomic_write_paths(model_path, grid_path) as (model_temporary_path, _):
            model_temporary_path.write_text("{}", encoding="utf-8")
            raise OSError("disk full")
    assert list(tmp_path.iterdir()) == []

    with atomic_write_paths(model_path, grid_path) as (model_temporary_path, grid_temporary_path):
        model_temporary_path.write_text("{}", encoding="utf-8")
        grid_temporary_path.write_text("x\n", encoding="utf-8")
    assert sorted(path.name for path in tmp_path.iterdir()) == ["grid.csv", "model.json"]
