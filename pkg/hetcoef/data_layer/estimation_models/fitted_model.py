import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hetcoef.data_layer.basis_models.basis_spec import BasisSpec
from hetcoef.utilities.load_config_file import load_config_dictionary
from hetcoef.utilities.save_dictionary_to_json import save_dictionary_to_json

logger = logging.getLogger(__name__)


class FittedModel(BaseModel):
    """
    Least squares fit of Y on p(X) ⊗ psi(V_hat).
    `b` is stacked as (b_1', ..., b_J')', so q_hat_j(v) = b_j' psi(v).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    b: np.ndarray
    p_spec: BasisSpec
    psi_spec: BasisSpec
    ridge: float = Field(0.0, ge=0.0)
    gram_min_eigenvalue: float = Field(ge=0.0)
    gram_max_eigenvalue: float = Field(ge=0.0)
    mean_squared_residual: float = Field(ge=0.0)
    n: int = Field(ge=1)
    v_bin_edges: Optional[List[float]] = None

    @field_validator("b", mode="before")
    @classmethod
    def as_coefficient_vector(cls, b):
        return np.asarray(b, dtype=float).reshape(-1)

    @model_validator(mode="after")
    def check_coefficient_length(self):
        expected_length = self.p_spec.dimension * self.psi_spec.dimension
        if self.b.shape[0] != expected_length:
            raise ValueError(f"b must have length J*K = {expected_length}, got {self.b.shape[0]}")
        return self

    @property
    def coefficient_matrix(self) -> np.ndarray:
        """(J, K) matrix whose row j is b_j"""
        return self.b.reshape(self.p_spec.dimension, self.psi_spec.dimension)

    def to_json_dictionary(self) -> dict:
        return {
            "b": self.b.tolist(),
            "p_spec": self.p_spec.model_dump(mode="json"),
            "psi_spec": self.psi_spec.model_dump(mode="json"),
            "ridge": self.ridge,
            "gram_min_eigenvalue": self.gram_min_eigenvalue,
            "gram_max_eigenvalue": self.gram_max_eigenvalue,
            "mean_squared_residual": self.mean_squared_residual,
            "n": self.n,
            "v_bin_edges": self.v_bin_edges,
        }

    def save_to_json(self, json_path: Union[str, Path]) -> Path:
        return save_dictionary_to_json(save_path=json_path, dictionary=self.to_json_dictionary())

    @classmethod
    def load_from_json(cls, json_path: Union[str, Path]) -> "FittedModel":
        return cls.model_validate(load_config_dictionary(json_path))
