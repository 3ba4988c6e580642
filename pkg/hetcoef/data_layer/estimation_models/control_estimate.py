from typing import Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class ControlEstimate(BaseModel):
    """v_hat for every row, plus the per-instrument-cell counts it was built from (empty for an observed V)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    v_hat: np.ndarray
    cell_counts: Dict[int, int] = {}

    @field_validator("v_hat", mode="before")
    @classmethod
    def as_control_column(cls, v_hat):
        return np.asarray(v_hat, dtype=float).reshape(-1)

    @model_validator(mode="after")
    def check_open_unit_interval(self):
        if np.any(~np.isfinite(self.v_hat)) or np.any(self.v_hat <= 0.0) or np.any(self.v_hat >= 1.0):
            raise ValueError("Estimated control values must lie strictly inside (0, 1)")
        return self

    @property
    def n(self) -> int:
        return int(self.v_hat.shape[0])

    def cell_counts_for_json(self) -> Dict[str, int]:
        return {str(code): count for code, count in self.cell_counts.items()}
