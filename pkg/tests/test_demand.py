import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reusable_pricing.demand import (PROFIT, DemandCurve, Family, Weights, check_concavity,
                                     golden_section_max, myopic_rate, price_at_rate, profit_rate,
                                     rate_at_price, solve_logit_condition, stationary_rate)
from reusable_pricing.errors import DomainError, RejectedInstanceError

LIN = DemandCurve.linear(1.0, 2.0)
EXP = DemandCurve.exponential(1.0, 1.0)
LOGI = DemandCurve.logistic(1.0, 1.0, 0.0)
REC = DemandCurve.reciprocal()


@pytest.mark.parametrize("curve, p, expected", [(LIN, 0.0, 2.0), (EXP, 0.0, 1.0), (LOGI, 0.0, 1.0)])
def test_rate_at_zero_price_is_b(curve, p, expected):
    assert rate_at_price(curve, p) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("curve, lam, expected", [
    (LIN, 2.0, 0.0), (REC, 4.0, 0.25), (DemandCurve.exponential(2.0, 10.0), 10.0, 0.0)])
def test_price_at_rate_examples(curve, lam, expected):
    assert price_at_rate(curve, lam) == pytest.approx(expected, abs=1e-15)


def test_family_formulas():
    p = 0.7
    assert rate_at_price(DemandCurve.linear(2, 3), p) == pytest.approx(3 - 2 * p)
    assert rate_at_price(DemandCurve.exponential(2, 3), p) == pytest.approx(3 * math.exp(-2 * p))
    lg = DemandCurve.logistic(2, 3, 1.5)
    expected = 3 * (1 + math.exp(-2 * 1.5)) / (1 + math.exp(2 * (p - 1.5)))
    assert rate_at_price(lg, p) == pytest.approx(expected, rel=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        rate_at_price(LIN, -0.1)
    with pytest.raises(DomainError):
        rate_at_price(REC, 0.0)
    with pytest.raises(DomainError):
        price_at_rate(LIN, 0.0)
    with pytest.raises(DomainError):
        price_at_rate(LIN, 2.5)
    with pytest.raises(DomainError):
        profit_rate(LIN, 0.0, -1.0)


def test_profit_rate_examples():
    assert profit_rate(LIN, 0.0, 1.0) == pytest.approx(1.0)
    assert profit_rate(LIN, 3.0, 1.0) == pytest.approx(-2.0)
    assert profit_rate(REC, 0.0, 0.37) == pytest.approx(1.0)
    assert profit_rate(REC, 0.0, 0.0) == 0.0


@pytest.mark.parametrize("family", ["linear", "exponential", "logistic"])
def test_round_trip_inversion(family, rng):
    for _ in range(10):
        a, b = rng.uniform(0.1, 5), rng.uniform(0.5, 10)
        curve = DemandCurve(family, a, b, rng.uniform(0, 20) if family == "logistic" else 0.0)
        top = b / a if family == "linear" else 30.0 / a
        p = rng.uniform(0, top, 100)
        lam = np.asarray(rate_at_price(curve, p))
        ok = lam > 1e-300
        if family == "logistic":
            # on the flat top of the logistic, lam rounds to K and p is not recoverable
            cond = 1.0 / (a * p * (1.0 - lam / curve.logistic_scale) + 1e-300)
            ok &= cond < 1e5
        back = price_at_rate(curve, lam[ok])
        np.testing.assert_allclose(back, p[ok], rtol=1e-9, atol=1e-9 * top)


@given(st.floats(0.1, 5), st.floats(0.5, 10), st.floats(0, 20), st.floats(0.01, 0.99))
def test_rate_to_price_to_rate(a, b, p0, frac):
    for curve in (DemandCurve.linear(a, b), DemandCurve.exponential(a, b), DemandCurve.logistic(a, b, p0)):
        lam = frac * b
        assert rate_at_price(curve, price_at_rate(curve, lam)) == pytest.approx(lam, rel=1e-9)


def test_weights_validation():
    Weights(0.2, 0.3, 0.5)
    with pytest.raises(ValueError):
        Weights(0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        Weights(-0.1, 0.6, 0.5)
    w = Weights.normalized(1, 2, 3)
    assert sum(w.as_tuple()) == pytest.approx(1.0, abs=1e-15)


def test_curve_json_round_trip():
    for curve in (LIN, EXP, DemandCurve.logistic(1.5, 2.0, 3.0), REC):
        assert DemandCurve.from_dict(curve.to_dict()) == curve


def _grid_argmax(f, hi, n=10**6):
    grid = np.linspace(0, hi, n)
    return grid[np.argmax(f(grid))]


def test_myopic_examples():
    assert myopic_rate(LIN, 0.0, PROFIT) == pytest.approx(1.0, abs=1e-12)
    assert myopic_rate(LIN, 0.0, Weights(0, 1, 0)) == 2.0
    assert myopic_rate(EXP, 0.0, PROFIT) == pytest.approx(math.exp(-1), abs=1e-12)
    oracle = _grid_argmax(lambda x: np.asarray(profit_rate(EXP, 0.0, x)), 1.0)
    assert myopic_rate(EXP, 0.0, PROFIT) == pytest.approx(oracle, abs=2e-6)


def test_myopic_rejects_reciprocal_with_profit_weight():
    with pytest.raises(RejectedInstanceError):
        myopic_rate(REC, 0.0, PROFIT, 1.0)
    assert myopic_rate(REC, 0.0, Weights(0, 0, 1), 1.0) == 0.0


@given(st.sampled_from(["linear", "exponential", "logistic"]), st.floats(0.1, 5), st.floats(0.5, 10),
       st.floats(0, 20), st.floats(0, 1), st.floats(0, 1))
def test_myopic_is_local_max(family, a, b, p0, w1, w2):
    curve = DemandCurve(family, a, b, p0)
    w = Weights.normalized(w1 + 1e-3, w2, 0.2)
    lam = myopic_rate(curve, 0.0, w)

    def obj(x):
        return w.alpha1 * profit_rate(curve, 0.0, x) + w.alpha2 * x

    step = 1e-6 * b
    for nb in (lam - step, lam + step):
        if 0 <= nb <= b:
            assert obj(nb) <= obj(lam) + 1e-12 * max(1.0, abs(obj(lam)))


@given(st.floats(0.1, 5), st.floats(0.5, 10), st.floats(0.05, 1), st.floats(0, 1))
def test_linear_myopic_against_grid(a, b, w1, w2):
    w = Weights.normalized(w1, w2, 0.0)
    lam = myopic_rate(DemandCurve.linear(a, b), 0.0, w)
    oracle = _grid_argmax(lambda x: w.alpha1 * x * (b - x) / a + w.alpha2 * x, b)
    assert lam == pytest.approx(oracle, abs=b / 10**6 + 1e-8)


@pytest.mark.parametrize("family", ["exponential", "logistic"])
def test_closed_form_matches_golden_section(family, rng):
    for _ in range(20):
        curve = DemandCurve(family, rng.uniform(0.1, 5), rng.uniform(0.5, 10), rng.uniform(0, 20))
        theta = rng.uniform(-2, 2)
        lam = stationary_rate(curve, 0.0, theta, curve.b)
        gs, _ = golden_section_max(lambda x: profit_rate(curve, 0.0, x) - theta * x, 0.0, curve.b, 1e-12)
        assert lam == pytest.approx(gs, abs=1e-6 * curve.b)


def test_logit_condition_root():
    for target in (-50.0, -1.0, 0.0, 3.0, 40.0):
        s = solve_logit_condition(target)
        assert s - 1 - math.exp(-s) == pytest.approx(target, abs=1e-10 * max(1, abs(target)))


def test_concavity_checks():
    assert check_concavity(DemandCurve.linear(0.3, 7.0), 0.0)
    assert check_concavity(REC, 0.0, 1.0)
    assert check_concavity(EXP, 0.0)
    # the logistic revenue is concave on (0, b] here; the grid test records that outcome
    assert check_concavity(DemandCurve.logistic(5, 10, 20), 0.0) is True


def test_golden_section_prefers_exact_boundary():
    x, fx = golden_section_max(lambda t: t, 0.0, 3.0)
    assert x == 3.0 and fx == 3.0
    x, _ = golden_section_max(lambda t: 0.0, 0.0, 3.0)
    assert x == 0.0


def test_family_enum_from_string():
    assert DemandCurve("LINEAR".lower(), 1, 2).family is Family.LINEAR
