import logging
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from hetcoef.data_layer.basis_models.basis_spec import BasisSpec

logger = logging.getLogger(__name__)

CONDITIONAL_NONSINGULARITY = "conditional_nonsingularity"
BINARY_OVERLAP = "binary_overlap"
MUTUALLY_EXCLUSIVE_TREATMENTS = "mutually_exclusive_treatments"
INSTRUMENT_SUPPORT = "instrument_support"
BINARY_INSTRUMENT = "binary_instrument"

CONDITION_NAMES = (
    CONDITIONAL_NONSINGULARITY,
    BINARY_OVERLAP,
    MUTUALLY_EXCLUSIVE_TREATMENTS,
    INSTRUMENT_SUPPORT,
    BINARY_INSTRUMENT,
)


class DiagnosticsSettings(BaseModel):
    n_bins: int = Field(10, ge=1)
    min_bin_count: int = Field(30, ge=1, description="Bins below max(J, min_bin_count) are reported but not judged")
    eigenvalue_tolerance: float = Field(1e-6, ge=0.0, description="Relative to the bin's largest eigenvalue")
    overlap_tolerance: float = Field(1e-6, ge=0.0)
    quantile_tolerance_scale: float = Field(1e-6, ge=0.0, description="delta_q = scale * sd(X)")
    separation_z_score: float = Field(3.0, ge=0.0)


class ConditionStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not_applicable"


class Verdict(BaseModel):
    status: ConditionStatus
    detail: str
    failing_bins: List[int] = []
    eigenvalue_agreement: Optional[float] = Field(
        None, description="Share of judged bins where the condition agrees with the min-eigenvalue test"
    )

    @property
    def passed(self) -> bool:
        return self.status == ConditionStatus.PASS


class BinRecord(BaseModel):
    bin_index: int
    v_lower: float
    v_upper: float
    v_midpoint: float
    count: int
    adequately_populated: bool
    second_moment: List[List[float]]
    eigenvalues: List[float]
    min_eigenvalue: float
    determinant: float


class PropensityRecord(BaseModel):
    bin_index: int
    count: int
    frequencies: List[float]
    untreated_share: float
    applicable: bool
    determinant: float
    eigenvalue_nonsingular: bool
    identity_error: Optional[float] = Field(None, description="|det - P(1 - P)| for a binary treatment")


class SupportRecord(BaseModel):
    bin_index: int
    v_midpoint: float
    quantiles: Dict[str, float]
    distinct_quantiles: List[float]
    cardinality: int
    representation_eigenvalues: Optional[List[float]] = None


class BinaryInstrumentRecord(BaseModel):
    bin_index: int
    v_midpoint: float
    quantile_gap: float
    separated: bool
    implied_determinant: float
    eigenvalue_nonsingular: bool


class DiagnosticsReport(BaseModel):
    n: int
    p_spec: BasisSpec
    settings: DiagnosticsSettings
    per_bin: List[BinRecord]
    overall_verdicts: Dict[str, Verdict]
    support_profile: Optional[List[SupportRecord]] = None
    propensity_profile: Optional[List[PropensityRecord]] = None
    binary_instrument_profile: Optional[List[BinaryInstrumentRecord]] = None
    cell_counts: Dict[str, int] = {}

    def to_json_dictionary(self) -> dict:
        return self.model_dump(mode="json")
