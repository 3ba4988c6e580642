import logging
from enum import Enum
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from hetcoef.data_layer.basis_models.basis_spec import BasisSpec
from hetcoef.data_layer.dgp_models.dgp_config import DesignKind, DgpConfig

logger = logging.getLogger(__name__)


class ControlMethod(str, Enum):
    OBSERVED = "observed"
    DISCRETE_Z = "discrete_z"


class McConfig(BaseModel):
    dgp: DgpConfig
    p_spec: Optional[BasisSpec] = Field(None, description="Defaults to the p basis of the dgp")
    psi_specs: List[BasisSpec]
    ridge: float = Field(0.0, ge=0.0)
    n_grid: List[int]
    replications: int = Field(ge=1)
    base_seed: int = Field(0, ge=0)
    x_grid: List[float] = []
    control_method: ControlMethod = ControlMethod.OBSERVED
    holdout_n: int = Field(50000, ge=1)
    n_workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def check_grids(self):
        if self.p_spec is None:
            self.p_spec = self.dgp.p_spec
        if len(self.psi_specs) == 0:
            raise ValueError("Monte Carlo needs at least one psi basis")
        if len(self.n_grid) == 0 or any(n < 1 for n in self.n_grid):
            raise ValueError(f"n_grid must hold positive sample sizes, got {self.n_grid}")
        if np.any(np.diff(self.n_grid) <= 0):
            raise ValueError(f"n_grid must be strictly increasing, got {self.n_grid}")
        if self.control_method == ControlMethod.DISCRETE_Z and self.dgp.design != DesignKind.TRIANGULAR:
            raise ValueError("discrete_z control estimation needs a triangular design with an instrument")
        if self.control_method == ControlMethod.OBSERVED and not self.dgp.observe_control:
            raise ValueError("control_method=observed needs a dgp with observe_control=True")
        return self

    @property
    def psi_dimensions(self) -> List[int]:
        return [psi_spec.dimension for psi_spec in self.psi_specs]


class McCellRecord(BaseModel):
    n: int
    K: int
    psi: str
    target: str
    x: Optional[float] = None
    treatment: Optional[int] = None
    truth: Optional[float] = None
    mean_estimate: Optional[float] = None
    bias: Optional[float] = None
    rmse: Optional[float] = None
    mc_standard_error: Optional[float] = None
    mean_gram_min_eigenvalue: Optional[float] = None
    successes: int
    failures: int


class McReport(BaseModel):
    records: List[McCellRecord]
    replications: int
    base_seed: int

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([record.model_dump() for record in self.records])

    def to_json_dictionary(self) -> dict:
        return self.model_dump(mode="json")

    def select(self, target: str, x: Optional[float] = None, treatment: Optional[int] = None) -> List[McCellRecord]:
        return [
            record
            for record in self.records
            if record.target == target and record.x == x and record.treatment == treatment
        ]
