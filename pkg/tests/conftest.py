import pytest

from ruinsim import ModelParams, PhaseType, derive_rates


@pytest.fixture(scope="session")
def fig2_rates():
    """mu=3, Pareto a=2 b=1, epsilon=0.1, rho=0.99."""
    return derive_rates(ModelParams.exp_pareto(3.0, 2.0, 1.0, 0.1, rho=0.99))


@pytest.fixture(scope="session")
def erlang_rates():
    # non-exponential light claims force the generic quadrature path
    return derive_rates(ModelParams(epsilon=0.2, light=PhaseType.erlang(2, 4.0),
                                    heavy=ModelParams.exp_pareto(1, 2.5).heavy, rho=0.8))


@pytest.fixture(scope="session")
def exp_heavy_rates():
    """Heavy component replaced by Exp(1): the full claim law is hyperexponential."""
    return derive_rates(ModelParams(epsilon=0.1, light=PhaseType.exponential(3.0),
                                    heavy=PhaseType.exponential(1.0), rho=0.99))
