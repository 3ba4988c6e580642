import logging
from typing import Union

import numpy as np
from scipy.interpolate import BSpline

from hetcoef.data_layer.basis_models.basis_spec import P_BASIS_KINDS, PSI_BASIS_KINDS, BasisKind, BasisSpec
from hetcoef.data_layer.basis_models.design_row import DesignRow

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray, list]


def eval_p(spec: BasisSpec, x: ArrayLike) -> np.ndarray:
    """p(x) for a single treatment value (scalar, or a T-vector for treatment dummies)."""
    x_point = np.asarray(x, dtype=float).reshape(-1)
    if x_point.shape[0] != spec.input_dimension:
        raise ValueError(
            f"{spec.kind.value} basis expects a treatment of dimension {spec.input_dimension}, got {x_point.shape[0]}"
        )
    return eval_p_matrix(spec, x_point.reshape(1, -1))[0]


def eval_p_matrix(spec: BasisSpec, x_values: np.ndarray) -> np.ndarray:
    """Row-wise p(x_i), shape (n, J). `x_values` is (n,) or (n, d_x)."""
    if spec.kind not in P_BASIS_KINDS:
        raise ValueError(f"{spec.kind.value} is not a valid basis for p(x), use one of {[k.value for k in P_BASIS_KINDS]}")
    x_matrix = _as_treatment_matrix(x_values, spec.input_dimension)
    if not np.all(np.isfinite(x_matrix)):
        raise ValueError("Treatment values must be finite")

    if spec.kind == BasisKind.TREATMENT_DUMMIES:
        return np.column_stack([np.ones(x_matrix.shape[0]), x_matrix])
    return _evaluate_scalar_basis(spec, x_matrix[:, 0])


def eval_p_derivative(spec: BasisSpec, x: ArrayLike) -> np.ndarray:
    x_point = np.asarray(x, dtype=float).reshape(-1)
    if x_point.shape[0] != 1:
        raise ValueError(f"Derivatives of p(x) need a scalar treatment, got dimension {x_point.shape[0]}")
    return eval_p_derivative_matrix(spec, x_point)[0]


def eval_p_derivative_matrix(spec: BasisSpec, x_values: np.ndarray) -> np.ndarray:
    """Row-wise dp(x_i)/dx, shape (n, J)."""
    if not spec.is_differentiable:
        raise ValueError(f"{spec.kind.value} basis is not differentiable in x")
    x_column = _as_treatment_matrix(x_values, 1)[:, 0]
    _check_within_domain(spec, x_column, "x")

    if spec.kind == BasisKind.POWER:
        derivative = np.zeros((x_column.shape[0], spec.dimension))
        for power in range(1, spec.dimension):
            derivative[:, power] = power * x_column ** (power - 1)
        return derivative

    if spec.degree == 0:
        return np.zeros((x_column.shape[0], spec.dimension))
    knot_vector = spec.full_knot_vector
    derivative = np.empty((x_column.shape[0], spec.dimension))
    for basis_index in range(spec.dimension):
        coefficients = np.zeros(spec.dimension)
        coefficients[basis_index] = 1.0
        derivative[:, basis_index] = BSpline(knot_vector, coefficients, spec.degree).derivative()(x_column)
    return derivative


def eval_psi(spec: BasisSpec, v: float) -> np.ndarray:
    """psi^K(v) for a single control value in [0, 1]."""
    v_point = np.asarray(v, dtype=float).reshape(-1)
    if v_point.shape[0] != 1:
        raise ValueError(f"psi(v) takes a scalar control value, got {v_point.shape[0]} values")
    return eval_psi_matrix(spec, v_point)[0]


def eval_psi_matrix(spec: BasisSpec, v_values: np.ndarray) -> np.ndarray:
    """Row-wise psi^K(v_i), shape (n, K)."""
    if spec.kind not in PSI_BASIS_KINDS:
        raise ValueError(
            f"{spec.kind.value} is not a valid basis for psi(v), use one of {[k.value for k in PSI_BASIS_KINDS]}"
        )
    v_column = np.asarray(v_values, dtype=float).reshape(-1)
    if np.any(~np.isfinite(v_column)) or np.any(v_column < 0.0) or np.any(v_column > 1.0):
        raise ValueError("Control values must lie in [0, 1]")

    if spec.kind == BasisKind.INDICATOR:
        bin_index = assign_indicator_bins(spec, v_column)
        one_hot = np.zeros((v_column.shape[0], spec.dimension))
        one_hot[np.arange(v_column.shape[0]), bin_index] = 1.0
        return one_hot
    return _evaluate_scalar_basis(spec, v_column)


def assign_indicator_bins(spec: BasisSpec, v_values: np.ndarray) -> np.ndarray:
    """Bin k holds edge_k <= v < edge_{k+1}; the last bin is closed at 1."""
    interior_edges = spec.indicator_edges[1:-1]
    return np.searchsorted(interior_edges, np.asarray(v_values, dtype=float).reshape(-1), side="right")


def design_row(p_spec: BasisSpec, psi_spec: BasisSpec, x: ArrayLike, v: float) -> DesignRow:
    values = np.kron(eval_p(p_spec, x), eval_psi(psi_spec, v))
    return DesignRow(values=values, p_dimension=p_spec.dimension, psi_dimension=psi_spec.dimension)


def design_matrix(p_spec: BasisSpec, psi_spec: BasisSpec, x_values: np.ndarray, v_values: np.ndarray) -> np.ndarray:
    """Stacked design rows, shape (n, J*K), column (j - 1) * K + k = p_j(x) * psi_k(v)."""
    p_matrix = eval_p_matrix(p_spec, x_values)
    psi_matrix = eval_psi_matrix(psi_spec, v_values)
    if p_matrix.shape[0] != psi_matrix.shape[0]:
        raise ValueError(f"x has {p_matrix.shape[0]} rows but v has {psi_matrix.shape[0]}")
    return row_wise_kronecker(p_matrix, psi_matrix)


def row_wise_kronecker(p_matrix: np.ndarray, psi_matrix: np.ndarray) -> np.ndarray:
    number_of_rows = p_matrix.shape[0]
    return (p_matrix[:, :, np.newaxis] * psi_matrix[:, np.newaxis, :]).reshape(number_of_rows, -1)


def _as_treatment_matrix(x_values: np.ndarray, expected_columns: int) -> np.ndarray:
    x_matrix = np.asarray(x_values, dtype=float)
    if x_matrix.ndim == 0:
        x_matrix = x_matrix.reshape(1, 1)
    elif x_matrix.ndim == 1:
        x_matrix = x_matrix.reshape(-1, 1) if expected_columns == 1 else x_matrix.reshape(1, -1)
    if x_matrix.ndim != 2 or x_matrix.shape[1] != expected_columns:
        raise ValueError(f"Expected treatment values with {expected_columns} column(s), got shape {x_matrix.shape}")
    return x_matrix


def _evaluate_scalar_basis(spec: BasisSpec, points: np.ndarray) -> np.ndarray:
    if spec.kind == BasisKind.POWER:
        return np.vander(points, N=spec.dimension, increasing=True)

    _check_within_domain(spec, points, "point")
    return BSpline.design_matrix(points, spec.full_knot_vector, spec.degree).toarray()


def _check_within_domain(spec: BasisSpec, points: np.ndarray, name: str) -> None:
    if spec.kind != BasisKind.BSPLINE:
        return
    outside = (points < spec.lower_bound) | (points > spec.upper_bound)
    if np.any(outside):
        first_bad = points[np.argmax(outside)]
        raise ValueError(
            f"{name} = {first_bad} lies outside the bspline domain [{spec.lower_bound}, {spec.upper_bound}]"
        )
