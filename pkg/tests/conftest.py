import numpy as np
import pytest

from cavitypairs import CavityMode, ProcessConfig

TWO_PI = 2 * np.pi
T_SI = 24.3e-9


@pytest.fixture
def symmetric():
    def make(gamma=1.0, delta=0.0, kappa=1.0, ratio=0.01, order=1):
        return ProcessConfig.symmetric(gamma, delta, kappa, process_order=order).with_power_ratio(ratio)
    return make


@pytest.fixture
def asymmetric():
    def make(gs=1.0, gi=0.6, delta=0.7, ks=0.8, ki=0.7, ratio=0.01, order=1):
        return ProcessConfig(CavityMode.from_linewidth(gs, ks), CavityMode.from_linewidth(gi, ki),
                             mismatch_delta=delta, process_order=order).with_power_ratio(ratio)
    return make
