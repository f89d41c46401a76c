import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from reusable_pricing.demand import PROFIT, DemandCurve, Weights
from reusable_pricing.loss_chain import Instance

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def linear_c2():
    return Instance(2, 1.0, 0.0, PROFIT, DemandCurve.linear(1.0, 2.0))


def random_instance(rng, C, family="linear", weights="profit", c=0.0):
    mu = 1.0 / rng.uniform(0.05, 50.0)
    a, b = rng.uniform(0.1, 5.0), rng.uniform(0.5, 10.0)
    if family == "logistic":
        curve = DemandCurve.logistic(a, b, rng.uniform(0.0, 20.0))
    else:
        curve = DemandCurve(family, a, b)
    w = PROFIT if weights == "profit" else Weights.normalized(*rng.dirichlet(np.ones(3)))
    return Instance(C, mu, c, w, curve)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
