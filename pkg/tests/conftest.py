import numpy as np
import pytest

from regarch import (
    GarchParams,
    RegarchParams,
    SimConfig,
    align,
    simulate_model,
)

RV5 = RegarchParams(
    omega=0.477, beta=0.924, tau1=-0.114, tau2=0.062, gamma=[0.313], xi=[-1.228],
    delta1=[-0.127], delta2=[0.098], sigma=[[0.232]],
)

JOINT = RegarchParams(
    omega=0.477, beta=0.927, tau1=-0.116, tau2=0.058, gamma=[-0.082, 0.453],
    xi=[-1.229, -3.079], delta1=[-0.126, -0.120], delta2=[0.102, 0.088],
    sigma=[[0.232, 0.193], [0.193, 0.183]],
)


@pytest.fixture(scope="session")
def garch_data():
    sim = simulate_model(SimConfig(seed=11, T=1500, dgp="garch", true_params=GarchParams(0.05, 0.05, 0.90)))
    return sim


@pytest.fixture(scope="session")
def regarch_data():
    sim = simulate_model(SimConfig(seed=12, T=1000, dgp="regarch", true_params=RV5))
    return align(sim.returns, sim.measures)


@pytest.fixture(scope="session")
def joint_data():
    sim = simulate_model(SimConfig(seed=13, T=1000, dgp="regarch", true_params=JOINT))
    return align(sim.returns, sim.measures)


def dates(n, start="2020-01-01"):
    return (np.datetime64(start) + np.arange(n)).astype(str)
