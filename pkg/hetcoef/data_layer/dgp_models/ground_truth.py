import logging
from typing import List, Optional, Union

from pydantic import BaseModel

from hetcoef.data_layer.basis_models.basis_spec import BasisSpec
from hetcoef.data_layer.dgp_models.dgp_config import DependenceTransform, DesignKind

logger = logging.getLogger(__name__)


class GroundTruth(BaseModel):
    """
    Analytic targets of a simulated design: the ASF is p(x)'mean_epsilon,
    the true control regression is p(x)'(mean_epsilon + dependence * g(v)).
    """

    p_spec: BasisSpec
    design: DesignKind
    mean_epsilon: List[float]
    dependence: float = 0.0
    dependence_transform: DependenceTransform = DependenceTransform.LINEAR
    ate: Optional[Union[float, List[float]]] = None
