import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

logger = logging.getLogger(__name__)


class Dataset(BaseModel):
    """
    Columnar sample of (Y, X, Z, V) with n rows.
    `x` is always stored as an (n, d_x) matrix: d_x = 1 for a scalar treatment, d_x = T for treatment dummies.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y: np.ndarray
    x: np.ndarray
    z: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    mutually_exclusive: bool = False

    @field_validator("y", mode="before")
    @classmethod
    def as_outcome_column(cls, y):
        return np.asarray(y, dtype=float).reshape(-1)

    @field_validator("x", mode="before")
    @classmethod
    def as_treatment_matrix(cls, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        return x

    @field_validator("z", mode="before")
    @classmethod
    def as_instrument_codes(cls, z):
        if z is None:
            return None
        z = np.asarray(z)
        if z.size > 0 and not np.all(np.equal(np.mod(z, 1), 0)):
            raise ValueError("Instrument column z must hold integer codes")
        return z.astype(np.int64).reshape(-1)

    @field_validator("v", mode="before")
    @classmethod
    def as_control_column(cls, v):
        if v is None:
            return None
        return np.asarray(v, dtype=float).reshape(-1)

    @model_validator(mode="after")
    def check_columns(self):
        number_of_rows = self.y.shape[0]
        if self.x.ndim != 2 or self.x.shape[0] != number_of_rows:
            raise ValueError(f"x must have {number_of_rows} rows, got shape {self.x.shape}")
        if self.z is not None:
            if self.z.shape[0] != number_of_rows:
                raise ValueError(f"z must have {number_of_rows} rows, got {self.z.shape[0]}")
            if np.any(self.z < 0):
                raise ValueError("Instrument codes must be non-negative (0..|Z|-1)")
        if self.v is not None:
            if self.v.shape[0] != number_of_rows:
                raise ValueError(f"v must have {number_of_rows} rows, got {self.v.shape[0]}")
            if np.any(~np.isfinite(self.v)) or np.any(self.v < 0.0) or np.any(self.v > 1.0):
                raise ValueError("Control column v must lie in [0, 1]")
        if self.mutually_exclusive:
            if not np.all(np.isin(self.x, (0.0, 1.0))):
                raise ValueError("Mutually exclusive treatment dummies must be 0/1")
            row_sums = self.x.sum(axis=1)
            if np.any(row_sums > 1):
                first_bad_row = int(np.argmax(row_sums > 1))
                raise ValueError(f"Treatments are not mutually exclusive: row {first_bad_row} has {row_sums[first_bad_row]:.0f} active")
        return self

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def treatment_dimension(self) -> int:
        return int(self.x.shape[1])

    @property
    def has_instrument(self) -> bool:
        return self.z is not None

    @property
    def has_control(self) -> bool:
        return self.v is not None

    def with_control(self, v: np.ndarray) -> "Dataset":
        return Dataset(y=self.y, x=self.x, z=self.z, v=v, mutually_exclusive=self.mutually_exclusive)

    def subset(self, row_indices: np.ndarray) -> "Dataset":
        return Dataset(
            y=self.y[row_indices],
            x=self.x[row_indices],
            z=None if self.z is None else self.z[row_indices],
            v=None if self.v is None else self.v[row_indices],
            mutually_exclusive=self.mutually_exclusive,
        )
