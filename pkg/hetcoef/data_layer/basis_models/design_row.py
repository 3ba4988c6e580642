import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator


class DesignRow(BaseModel):
    """
    One row of the kronecker design, values = p(x) ⊗ psi(v).
    Entry (j - 1) * K + k holds p_j(x) * psi_k(v), so b = (b_1', ..., b_J')' lines up with it.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    p_dimension: int
    psi_dimension: int

    @field_validator("values", mode="before")
    @classmethod
    def as_float_vector(cls, values):
        return np.asarray(values, dtype=float).reshape(-1)

    def entry(self, j: int, k: int) -> float:
        """Zero-based (j, k) lookup."""
        return float(self.values[j * self.psi_dimension + k])
