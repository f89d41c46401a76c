"""Steady state and objectives of the C-unit loss system.

State ``i`` is the number of units on hand.  A policy sets an arrival rate
``lambda_i`` for ``i = 1..C``; arrivals in state 0 are lost.  Units return
at rate ``(C - i) * mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .demand import DemandCurve, Family, Weights, profit_rate


@dataclass(frozen=True)
class Instance:
    """One pricing problem: capacity, service rate, cost, weights, demand, rate cap.

    ``Lambda`` defaults to the demand at price zero and is required for the
    reciprocal curve.
    """

    C: int
    mu: float
    c: float
    weights: Weights
    curve: DemandCurve
    Lambda: float | None = None

    def __post_init__(self):
        if int(self.C) != self.C or self.C < 1:
            raise ValueError(f"C must be a positive integer, got {self.C}")
        object.__setattr__(self, "C", int(self.C))
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"service rate must be positive, got {self.mu}")
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ValueError(f"service cost must be nonnegative, got {self.c}")
        if self.Lambda is None:
            if self.curve.family is Family.RECIPROCAL:
                raise ValueError("reciprocal demand needs an explicit rate cap Lambda")
            object.__setattr__(self, "Lambda", float(self.curve.b))
        cap = float(self.Lambda)
        if not (cap > 0 and math.isfinite(cap)) or cap > self.curve.max_rate:
            raise ValueError(f"rate cap must lie in (0, {self.curve.max_rate}], got {cap}")
        object.__setattr__(self, "Lambda", cap)

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "mu": self.mu,
            "c": self.c,
            "weights": list(self.weights.as_tuple()),
            "curve": self.curve.to_dict(),
            "Lambda": self.Lambda,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Instance:
        w = data.get("weights", [1.0, 0.0, 0.0])
        if isinstance(w, dict):
            w = [w["alpha1"], w["alpha2"], w["alpha3"]]
        lam = data.get("Lambda")
        return cls(
            C=data["C"],
            mu=float(data["mu"]),
            c=float(data.get("c", 0.0)),
            weights=Weights(*map(float, w)),
            curve=DemandCurve.from_dict(data["curve"]),
            Lambda=None if lam is None else float(lam),
        )


@dataclass(frozen=True)
class Policy:
    """State-dependent rates ``lambda_1..lambda_C`` (index 0 is state 1)."""

    rates: np.ndarray

    def __post_init__(self):
        r = np.array(self.rates, dtype=float).reshape(-1)
        r.setflags(write=False)
        object.__setattr__(self, "rates", r)

    @classmethod
    def static(cls, rate: float, C: int) -> Policy:
        return cls(np.full(C, float(rate)))

    @property
    def is_static(self) -> bool:
        return bool(np.all(self.rates == self.rates[0]))

    def validate(self, inst: Instance) -> None:
        r = self.rates
        if r.size != inst.C:
            raise ValueError(f"policy has {r.size} rates, instance has C={inst.C}")
        if not np.all(np.isfinite(r)) or np.any(r < 0) or np.any(r > inst.Lambda * (1 + 1e-12)):
            raise ValueError(f"policy rates must lie in [0, {inst.Lambda}]")


def as_policy(pol: Policy | Sequence[float] | np.ndarray) -> Policy:
    return pol if isinstance(pol, Policy) else Policy(np.asarray(pol, dtype=float))


@dataclass(frozen=True)
class SteadyState:
    probs: np.ndarray

    @property
    def stock_in(self) -> float:
        return 1.0 - float(self.probs[0])


class ObjectiveTriple(NamedTuple):
    profit: float
    market_share: float
    service_level: float

    def weighted(self, w: Weights) -> float:
        return w.alpha1 * self.profit + w.alpha2 * self.market_share + w.alpha3 * self.service_level


def falling_factorials(C: int) -> np.ndarray:
    """``a_i = C!/(C-i)!`` for ``i = 0..C``."""
    return np.concatenate(([1.0], np.cumprod(np.arange(C, 0, -1, dtype=float))))


def log_falling_factorials(C: int) -> np.ndarray:
    i = np.arange(C + 1)
    return gammaln(C + 1.0) - gammaln(C - i + 1.0)


def steady_state(inst: Instance, pol) -> SteadyState:
    """Product-form stationary distribution ``P_0..P_C``.

    ``P_i`` is proportional to ``a_i * prod_{j>i} lambda_j/mu``.  A zero rate
    in state ``j`` makes every state below ``j`` transient.
    """
    pol = as_policy(pol)
    pol.validate(inst)
    C = inst.C
    ratios = pol.rates / inst.mu
    if C > 30 or (ratios.size and ratios.max() > 1e3):
        with np.errstate(divide="ignore"):
            logr = np.log(ratios)
        # suffix[i] = sum_{j=i+1}^{C} log(lambda_j/mu); suffix[C] = 0
        suffix = np.concatenate((np.cumsum(logr[::-1])[::-1], [0.0]))
        logw = log_falling_factorials(C) + suffix
        probs = np.exp(logw - logsumexp(logw))
    else:
        suffix = np.concatenate((np.cumprod(ratios[::-1])[::-1], [1.0]))
        weights = falling_factorials(C) * suffix
        weights = weights / weights.max()
        probs = weights / weights.sum()
    return SteadyState(probs)


def objectives(inst: Instance, pol) -> ObjectiveTriple:
    """Profit rate, market share and service level of a policy."""
    pol = as_policy(pol)
    P = steady_state(inst, pol).probs
    lam = pol.rates
    unit_profit = np.asarray(profit_rate(inst.curve, inst.c, lam))
    return ObjectiveTriple(
        profit=float(np.dot(unit_profit, P[1:])),
        market_share=float(np.dot(lam, P[1:])),
        service_level=float(1.0 - P[0]),
    )


def weighted_value(inst: Instance, pol) -> float:
    return objectives(inst, pol).weighted(inst.weights)


def erlang_b(C: int, load):
    """Erlang-B blocking probability by the stable recursion (array-aware)."""
    load = np.asarray(load, dtype=float)
    B = np.ones_like(load)
    for k in range(1, C + 1):
        B = load * B / (k + load * B)
    return float(B) if B.ndim == 0 else B


def steady_state_batch(C: int, mu: float, rates: np.ndarray) -> np.ndarray:
    """Stationary distributions for many policies at once.

    ``rates`` has shape ``(n, C)``; the result has shape ``(n, C + 1)``.
    Computed in log space, so any load is safe.
    """
    rates = np.asarray(rates, dtype=float)
    with np.errstate(divide="ignore"):
        logr = np.log(rates / mu)
    suffix = np.cumsum(logr[:, ::-1], axis=1)[:, ::-1]
    suffix = np.concatenate((suffix, np.zeros((rates.shape[0], 1))), axis=1)
    logw = log_falling_factorials(C)[None, :] + suffix
    return np.exp(logw - logsumexp(logw, axis=1, keepdims=True))


def objectives_batch(inst: Instance, rates: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`objectives` over the rows of ``rates`` (shape ``(n, C)``)."""
    rates = np.atleast_2d(np.asarray(rates, dtype=float))
    P = steady_state_batch(inst.C, inst.mu, rates)
    unit = np.asarray(profit_rate(inst.curve, inst.c, rates.ravel())).reshape(rates.shape)
    profit = np.einsum("ij,ij->i", unit, P[:, 1:])
    share = np.einsum("ij,ij->i", rates, P[:, 1:])
    return profit, share, 1.0 - P[:, 0]


def static_objectives(inst: Instance, rates) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Objectives of constant-rate policies, one per entry of ``rates``.

    Uses the Erlang-B recursion for the stock-out probability.
    """
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    stock_in = 1.0 - erlang_b(inst.C, rates / inst.mu)
    unit = np.asarray(profit_rate(inst.curve, inst.c, rates))
    return unit * stock_in, rates * stock_in, stock_in


def static_weighted_value(inst: Instance, rates) -> np.ndarray:
    p, m, s = static_objectives(inst, rates)
    w = inst.weights
    return w.alpha1 * p + w.alpha2 * m + w.alpha3 * s
