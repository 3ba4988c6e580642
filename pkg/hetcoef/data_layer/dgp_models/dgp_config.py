import logging
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from hetcoef.data_layer.basis_models.basis_spec import BasisKind, BasisSpec

logger = logging.getLogger(__name__)

MAXIMUM_SEED = 2**64


class DesignKind(str, Enum):
    TRIANGULAR = "triangular"
    BINARY_TREATMENT = "binary_treatment"
    MULTI_TREATMENT = "multi_treatment"


class DependenceTransform(str, Enum):
    LINEAR = "linear"
    SINE = "sine"
    STEP = "step"


class InstrumentParametersModel(BaseModel):
    support_values: List[float] = [0.0, 1.0]
    probabilities: List[float] = [0.5, 0.5]

    @model_validator(mode="after")
    def check_distribution(self):
        if len(self.support_values) == 0:
            raise ValueError("Instrument needs at least one support value")
        if len(self.support_values) != len(self.probabilities):
            raise ValueError(
                f"Instrument has {len(self.support_values)} support values but {len(self.probabilities)} probabilities"
            )
        probabilities = np.asarray(self.probabilities, dtype=float)
        if np.any(probabilities <= 0):
            raise ValueError(f"Instrument probabilities must be strictly positive, got {self.probabilities}")
        if not np.isclose(probabilities.sum(), 1.0, atol=1e-9):
            raise ValueError(f"Instrument probabilities must sum to 1, got {probabilities.sum()}")
        return self

    @property
    def support_size(self) -> int:
        return len(self.support_values)


class FirstStageParametersModel(BaseModel):
    """h(z, eta) = a(z) + b(z) * eta; a(z) defaults to the support value and b(z) to 1"""

    intercepts: Optional[List[float]] = None
    slopes: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_slopes_positive(self):
        if self.slopes is not None and any(slope <= 0 for slope in self.slopes):
            raise ValueError(f"First stage must be strictly increasing in eta, got slopes {self.slopes}")
        return self


class HeterogeneityParametersModel(BaseModel):
    """epsilon = mean + dependence * g(eta) + noise_scale * nu"""

    mean: List[float]
    noise_scale: float = Field(1.0, ge=0.0)
    dependence: float = 0.0
    dependence_transform: DependenceTransform = DependenceTransform.LINEAR
    noise_scale_by_instrument: Optional[List[float]] = Field(
        None, description="One noise scale per instrument support point (replaces noise_scale)"
    )

    @model_validator(mode="after")
    def check_noise_scales(self):
        if self.noise_scale_by_instrument is not None and any(scale < 0 for scale in self.noise_scale_by_instrument):
            raise ValueError(f"Noise scales must be non-negative, got {self.noise_scale_by_instrument}")
        return self


class TreatmentProbabilitiesModel(BaseModel):
    """P_t(v) = intercepts[t] + slopes[t] * v, one entry per treatment"""

    intercepts: List[float] = [0.5]
    slopes: List[float] = [0.0]

    @model_validator(mode="after")
    def check_probabilities(self):
        if len(self.intercepts) == 0 or len(self.intercepts) != len(self.slopes):
            raise ValueError("Treatment probabilities need matching, non-empty intercepts and slopes")
        # linear in v, so the endpoints bound the whole of [0, 1]
        for v in (0.0, 1.0):
            probabilities = self.evaluate(np.array([v]))[0]
            if np.any(probabilities < 0) or np.any(probabilities > 1):
                raise ValueError(f"Treatment probabilities at v={v} must lie in [0, 1], got {probabilities}")
            if probabilities.sum() > 1 + 1e-12:
                raise ValueError(f"Treatment probabilities at v={v} sum to {probabilities.sum()} > 1")
        return self

    @property
    def treatment_count(self) -> int:
        return len(self.intercepts)

    def evaluate(self, v_values: np.ndarray) -> np.ndarray:
        """(n, T) matrix of P_t(v_i)"""
        v_column = np.asarray(v_values, dtype=float).reshape(-1, 1)
        return np.asarray(self.intercepts, dtype=float)[np.newaxis, :] + v_column * np.asarray(self.slopes)[np.newaxis, :]


class DgpConfig(BaseModel):
    p_spec: BasisSpec
    design: DesignKind = DesignKind.TRIANGULAR
    instrument: InstrumentParametersModel = InstrumentParametersModel()
    first_stage: FirstStageParametersModel = FirstStageParametersModel()
    heterogeneity: HeterogeneityParametersModel
    treatment_probabilities: Optional[TreatmentProbabilitiesModel] = None
    observe_control: bool = True
    seed: int = Field(0, ge=0, lt=MAXIMUM_SEED)

    @model_validator(mode="after")
    def check_design(self):
        if len(self.heterogeneity.mean) != self.p_spec.dimension:
            raise ValueError(
                f"Heterogeneity mean has length {len(self.heterogeneity.mean)}, p basis has dimension {self.p_spec.dimension}"
            )

        if self.design == DesignKind.TRIANGULAR:
            if self.p_spec.kind == BasisKind.TREATMENT_DUMMIES:
                raise ValueError("Triangular designs have a continuous treatment, use a power or bspline p basis")
            support_size = self.instrument.support_size
            for name, values in (
                ("first_stage.intercepts", self.first_stage.intercepts),
                ("first_stage.slopes", self.first_stage.slopes),
                ("heterogeneity.noise_scale_by_instrument", self.heterogeneity.noise_scale_by_instrument),
            ):
                if values is not None and len(values) != support_size:
                    raise ValueError(f"{name} needs one entry per instrument support point ({support_size}), got {len(values)}")
            return self

        if not self.observe_control:
            raise ValueError(f"{self.design.value} designs draw V directly and must emit it (observe_control=True)")
        if self.heterogeneity.noise_scale_by_instrument is not None:
            raise ValueError("noise_scale_by_instrument only applies to triangular designs")
        if self.treatment_probabilities is None:
            self.treatment_probabilities = TreatmentProbabilitiesModel()

        if self.design == DesignKind.BINARY_TREATMENT:
            if self.p_spec.input_dimension != 1:
                raise ValueError("binary_treatment designs need a scalar treatment basis")
            if self.treatment_probabilities.treatment_count != 1:
                raise ValueError("binary_treatment designs take exactly one treatment probability line")
        else:
            if self.p_spec.kind != BasisKind.TREATMENT_DUMMIES:
                raise ValueError("multi_treatment designs need a treatment_dummies p basis")
            if self.treatment_probabilities.treatment_count != self.p_spec.treatment_count:
                raise ValueError(
                    f"multi_treatment design has {self.treatment_probabilities.treatment_count} probability lines "
                    f"but the p basis has T={self.p_spec.treatment_count}"
                )
        return self

    @property
    def first_stage_intercepts(self) -> np.ndarray:
        if self.first_stage.intercepts is not None:
            return np.asarray(self.first_stage.intercepts, dtype=float)
        return np.asarray(self.instrument.support_values, dtype=float)

    @property
    def first_stage_slopes(self) -> np.ndarray:
        if self.first_stage.slopes is not None:
            return np.asarray(self.first_stage.slopes, dtype=float)
        return np.ones(self.instrument.support_size)

    def with_seed(self, seed: int) -> "DgpConfig":
        return self.model_copy(update={"seed": int(seed) % MAXIMUM_SEED})
