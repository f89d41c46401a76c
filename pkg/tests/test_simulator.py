import numpy as np
import pytest

from reusable_pricing.demand import DemandCurve, Weights
from reusable_pricing.loss_chain import Instance, Policy, erlang_b, objectives
from reusable_pricing.simulator import SimConfig, simulate, validate_against_analytic

SERVICE = Weights(0.0, 0.0, 1.0)


def reciprocal(C, mu=1.0):
    return Instance(C, mu, 0.0, SERVICE, DemandCurve.reciprocal(), 1.0)


def test_config_validation():
    assert SimConfig(horizon=200.0).warmup == pytest.approx(10.0)
    with pytest.raises(ValueError):
        SimConfig(horizon=10.0, warmup=10.0)
    with pytest.raises(ValueError):
        SimConfig(replications=0)


def test_same_seed_is_bit_identical():
    inst = reciprocal(3)
    cfg = SimConfig(horizon=2000.0, seed=42, replications=4)
    a = simulate(inst, [0.5, 0.8, 1.0], cfg)
    b = simulate(inst, [0.5, 0.8, 1.0], cfg)
    assert np.array_equal(a.samples, b.samples)


def test_more_replications_keep_earlier_streams():
    inst = reciprocal(2)
    a = simulate(inst, [1.0, 1.0], SimConfig(horizon=1000.0, seed=3, replications=3))
    b = simulate(inst, [1.0, 1.0], SimConfig(horizon=1000.0, seed=3, replications=5))
    assert np.array_equal(a.samples, b.samples[:3])


def test_zero_policy_is_exact():
    est = simulate(reciprocal(3), [0.0, 0.0, 0.0], SimConfig(horizon=1000.0, replications=3))
    assert est.profit == 0.0
    assert est.market_share == 0.0
    assert est.service_level == 1.0


def test_two_unit_service_level():
    inst = reciprocal(2)
    est = simulate(inst, [1.0, 1.0], SimConfig(horizon=1e5, replications=20))
    assert objectives(inst, [1.0, 1.0]).service_level == pytest.approx(0.8)
    assert abs(est.service_level - 0.8) <= 3 * est.stderr.service_level


def test_erlang_b_agreement():
    inst = Instance(5, 1.0, 0.0, SERVICE, DemandCurve.reciprocal(), 1.0)
    est = simulate(inst, Policy.static(1.0, 5), SimConfig(horizon=1e5, seed=9, replications=20))
    blocking = float(erlang_b(5, 1.0))
    assert abs((1 - est.service_level) - blocking) <= 3 * est.stderr.service_level


def test_stderr_shrinks_with_horizon():
    inst = Instance(3, 0.5, 0.0, Weights(1 / 3, 1 / 3, 1 / 3), DemandCurve.linear(1.0, 2.0))
    pol = [0.6, 0.9, 1.1]
    se_short = np.array(simulate(inst, pol, SimConfig(horizon=1e4, seed=1, replications=40)).stderr)
    se_long = np.array(simulate(inst, pol, SimConfig(horizon=1e5, seed=2, replications=40)).stderr)
    ratio = se_short / se_long
    assert np.all(np.abs(ratio / np.sqrt(10) - 1) <= 0.3), ratio


def test_validate_report_and_weighted():
    inst = Instance(2, 1.0, 0.0, Weights(0.5, 0.3, 0.2), DemandCurve.linear(1.0, 2.0))
    rep = validate_against_analytic(inst, [0.7, 1.0], SimConfig(horizon=2e4, replications=10))
    d = rep.to_dict()
    assert set(d["passed"]) == {"profit", "market_share", "service_level"}
    mean, se = rep.estimate.weighted(inst.weights)
    assert mean == pytest.approx(float(np.dot(rep.estimate.mean, inst.weights.as_tuple())))
    assert se > 0
