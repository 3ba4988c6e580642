import logging
from typing import Tuple

import numpy as np

from hetcoef.core_processes.basis_functions.evaluate_basis import eval_p_matrix
from hetcoef.core_processes.simulate_data.dependence_transforms import apply_dependence_transform
from hetcoef.core_processes.simulate_data.ground_truth_functions import build_ground_truth
from hetcoef.data_layer.dataset_models.dataset import Dataset
from hetcoef.data_layer.dgp_models.dgp_config import DesignKind, DgpConfig
from hetcoef.data_layer.dgp_models.ground_truth import GroundTruth

logger = logging.getLogger(__name__)


def create_random_generator(seed: int) -> np.random.Generator:
    """Counter-based stream: one seed per replication, no shared state between workers"""
    return np.random.Generator(np.random.Philox(seed))


def simulate(config: DgpConfig, n: int) -> Tuple[Dataset, GroundTruth]:
    dataset, _ = simulate_with_heterogeneity(config, n)
    return dataset, build_ground_truth(config)


def simulate_with_heterogeneity(config: DgpConfig, n: int) -> Tuple[Dataset, np.ndarray]:
    """The dataset plus the (n, J) draws of epsilon behind its outcomes"""
    if n < 1:
        raise ValueError(f"Sample size must be positive, got n={n}")

    logger.debug(f"Simulating {n} draws from a {config.design.value} design with seed {config.seed}")
    random_generator = create_random_generator(config.seed)

    if config.design == DesignKind.TRIANGULAR:
        return simulate_triangular_system(config=config, n=n, random_generator=random_generator)
    if config.design == DesignKind.BINARY_TREATMENT:
        return simulate_binary_treatment(config=config, n=n, random_generator=random_generator)
    return simulate_multi_treatment(config=config, n=n, random_generator=random_generator)


def draw_heterogeneity(
    config: DgpConfig, control_values: np.ndarray, noise_scales: np.ndarray, random_generator: np.random.Generator
) -> np.ndarray:
    """(n, J) draws of epsilon = mean + dependence * g(V) + noise_scale * nu"""
    number_of_draws = control_values.shape[0]
    heterogeneity = config.heterogeneity
    standard_normal_noise = random_generator.standard_normal((number_of_draws, config.p_spec.dimension))
    dependence_shift = heterogeneity.dependence * apply_dependence_transform(
        heterogeneity.dependence_transform, control_values
    )
    return (
        np.asarray(heterogeneity.mean, dtype=float)[np.newaxis, :]
        + dependence_shift[:, np.newaxis]
        + noise_scales.reshape(-1, 1) * standard_normal_noise
    )


def calculate_outcomes(config: DgpConfig, treatments: np.ndarray, heterogeneity_draws: np.ndarray) -> np.ndarray:
    return np.sum(eval_p_matrix(config.p_spec, treatments) * heterogeneity_draws, axis=1)


def simulate_triangular_system(
    config: DgpConfig, n: int, random_generator: np.random.Generator
) -> Tuple[Dataset, np.ndarray]:
    instrument_codes = random_generator.choice(
        config.instrument.support_size, size=n, p=np.asarray(config.instrument.probabilities, dtype=float)
    )
    eta = random_generator.random(n)

    if config.heterogeneity.noise_scale_by_instrument is not None:
        noise_scales = np.asarray(config.heterogeneity.noise_scale_by_instrument, dtype=float)[instrument_codes]
    else:
        noise_scales = np.full(n, config.heterogeneity.noise_scale)
    heterogeneity_draws = draw_heterogeneity(config, eta, noise_scales, random_generator)

    # h(z, eta) is strictly increasing in eta, so F_{X|Z}(X|Z) = eta
    treatments = config.first_stage_intercepts[instrument_codes] + config.first_stage_slopes[instrument_codes] * eta
    outcomes = calculate_outcomes(config, treatments, heterogeneity_draws)

    dataset = Dataset(
        y=outcomes,
        x=treatments,
        z=instrument_codes,
        v=eta if config.observe_control else None,
    )
    return dataset, heterogeneity_draws


def simulate_binary_treatment(
    config: DgpConfig, n: int, random_generator: np.random.Generator
) -> Tuple[Dataset, np.ndarray]:
    control_values = random_generator.random(n)
    propensity_scores = config.treatment_probabilities.evaluate(control_values)[:, 0]
    treatments = (random_generator.random(n) < propensity_scores).astype(float)

    heterogeneity_draws = draw_heterogeneity(
        config, control_values, np.full(n, config.heterogeneity.noise_scale), random_generator
    )
    outcomes = calculate_outcomes(config, treatments, heterogeneity_draws)
    return Dataset(y=outcomes, x=treatments, v=control_values), heterogeneity_draws


def simulate_multi_treatment(
    config: DgpConfig, n: int, random_generator: np.random.Generator
) -> Tuple[Dataset, np.ndarray]:
    control_values = random_generator.random(n)
    treatment_probabilities = config.treatment_probabilities.evaluate(control_values)
    cumulative_probabilities = np.cumsum(treatment_probabilities, axis=1)

    # one categorical draw over {none, 1..T}: treatment t when u falls in [cum_{t-1}, cum_t)
    uniform_draws = random_generator.random(n)
    assigned = np.sum(uniform_draws[:, np.newaxis] >= cumulative_probabilities, axis=1)
    treatment_count = treatment_probabilities.shape[1]
    treatments = np.zeros((n, treatment_count))
    treated_rows = assigned < treatment_count
    treatments[np.flatnonzero(treated_rows), assigned[treated_rows]] = 1.0

    heterogeneity_draws = draw_heterogeneity(
        config, control_values, np.full(n, config.heterogeneity.noise_scale), random_generator
    )
    outcomes = calculate_outcomes(config, treatments, heterogeneity_draws)
    return Dataset(y=outcomes, x=treatments, v=control_values, mutually_exclusive=True), heterogeneity_draws
