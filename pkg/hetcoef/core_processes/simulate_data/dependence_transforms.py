import numpy as np

from hetcoef.data_layer.dgp_models.dgp_config import DependenceTransform

STEP_TRANSFORM_LEVELS = np.array([-1.5, -0.5, 0.5, 1.5])


def apply_dependence_transform(transform: DependenceTransform, eta: np.ndarray) -> np.ndarray:
    """g(eta) with E[g(eta)] = 0 for eta ~ Uniform(0, 1)"""
    eta = np.asarray(eta, dtype=float)
    if transform == DependenceTransform.LINEAR:
        return eta - 0.5
    if transform == DependenceTransform.SINE:
        return np.sin(2.0 * np.pi * eta)
    if transform == DependenceTransform.STEP:
        quartile = np.minimum(np.floor(eta * len(STEP_TRANSFORM_LEVELS)), len(STEP_TRANSFORM_LEVELS) - 1).astype(int)
        return STEP_TRANSFORM_LEVELS[quartile]
    raise ValueError(f"Unknown dependence transform: {transform}")
