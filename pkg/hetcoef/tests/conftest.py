import pytest

from hetcoef.core_processes.simulate_data.simulate import simulate
from hetcoef.data_layer.basis_models.basis_spec import BasisSpec
from hetcoef.data_layer.dgp_models.dgp_config import (
    DesignKind,
    DgpConfig,
    HeterogeneityParametersModel,
    InstrumentParametersModel,
    TreatmentProbabilitiesModel,
)

TRIANGULAR_SEED = 20240101
BINARY_SEED = 20240102
MULTI_SEED = 20240103


def build_triangular_config(
    mean=(1.0, 2.0),
    noise_scale=1.0,
    dependence=1.0,
    support_values=(0.0, 1.0),
    intercepts=None,
    slopes=None,
    seed=TRIANGULAR_SEED,
    **heterogeneity_kwargs,
) -> DgpConfig:
    support_size = len(support_values)
    return DgpConfig(
        p_spec=BasisSpec(kind="power", dimension=len(mean)),
        design=DesignKind.TRIANGULAR,
        instrument=InstrumentParametersModel(
            support_values=list(support_values),
            probabilities=[1.0 / support_size] * support_size,
        ),
        first_stage={"intercepts": intercepts, "slopes": slopes},
        heterogeneity=HeterogeneityParametersModel(
            mean=list(mean), noise_scale=noise_scale, dependence=dependence, **heterogeneity_kwargs
        ),
        seed=seed,
    )


def build_binary_config(
    mean=(1.0, 2.0),
    noise_scale=1.0,
    dependence=1.0,
    propensity_intercept=0.5,
    propensity_slope=0.0,
    seed=BINARY_SEED,
) -> DgpConfig:
    return DgpConfig(
        p_spec=BasisSpec(kind="power", dimension=2),
        design=DesignKind.BINARY_TREATMENT,
        heterogeneity=HeterogeneityParametersModel(mean=list(mean), noise_scale=noise_scale, dependence=dependence),
        treatment_probabilities=TreatmentProbabilitiesModel(
            intercepts=[propensity_intercept], slopes=[propensity_slope]
        ),
        seed=seed,
    )


def build_multi_config(mean=(1.0, 2.0, -1.0), noise_scale=1.0, dependence=1.0, seed=MULTI_SEED) -> DgpConfig:
    return DgpConfig(
        p_spec=BasisSpec(kind="treatment_dummies", treatment_count=len(mean) - 1),
        design=DesignKind.MULTI_TREATMENT,
        heterogeneity=HeterogeneityParametersModel(mean=list(mean), noise_scale=noise_scale, dependence=dependence),
        treatment_probabilities=TreatmentProbabilitiesModel(intercepts=[0.3, 0.3], slopes=[0.1, -0.1]),
        seed=seed,
    )


@pytest.fixture
def triangular_config():
    return build_triangular_config()


@pytest.fixture
def binary_config():
    return build_binary_config()


@pytest.fixture
def multi_config():
    return build_multi_config()


@pytest.fixture
def triangular_data(triangular_config):
    dataset, _ = simulate(triangular_config, 10000)
    return dataset


@pytest.fixture
def binary_data(binary_config):
    dataset, _ = simulate(binary_config, 20000)
    return dataset


@pytest.fixture
def multi_data(multi_config):
    dataset, _ = simulate(multi_config, 20000)
    return dataset
