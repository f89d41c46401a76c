"""Discrete-event simulation of the loss system under a state-dependent policy.

Each replication starts with every unit on hand and runs its own random
stream, spawned from the master seed so that adding replications leaves the
earlier streams untouched.  The next event is drawn from the total rate of the
current state; exponential clocks make re-drawing at every state change exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .demand import Weights, profit_rate
from .loss_chain import Instance, ObjectiveTriple, as_policy, objectives

SIGMA_LIMIT = 3.0


@dataclass(frozen=True)
class SimConfig:
    horizon: float = 1e5
    warmup: float | None = None  # defaults to 5% of the horizon
    seed: int = 0
    replications: int = 20

    def __post_init__(self):
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.05 * self.horizon)
        if not (self.horizon > self.warmup >= 0):
            raise ValueError("need horizon > warmup >= 0")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")


@dataclass(frozen=True)
class SimEstimate:
    """Means over replications and their standard errors.

    ``samples`` holds one (profit, market share, service level) row per
    replication.
    """

    samples: np.ndarray

    @property
    def mean(self) -> ObjectiveTriple:
        return ObjectiveTriple(*map(float, self.samples.mean(axis=0)))

    @property
    def stderr(self) -> ObjectiveTriple:
        n = self.samples.shape[0]
        if n < 2:
            return ObjectiveTriple(math.nan, math.nan, math.nan)
        return ObjectiveTriple(*map(float, self.samples.std(axis=0, ddof=1) / math.sqrt(n)))

    @property
    def profit(self) -> float:
        return self.mean.profit

    @property
    def market_share(self) -> float:
        return self.mean.market_share

    @property
    def service_level(self) -> float:
        return self.mean.service_level

    def weighted(self, w: Weights) -> tuple[float, float]:
        """Mean and standard error of the weighted objective."""
        v = self.samples @ np.array(w.as_tuple())
        n = v.size
        se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        return float(v.mean()), se


@njit(cache=True)
def _replicate(rates, margins, C, mu, horizon, warmup, rng):
    state = C
    t = 0.0
    stocked = 0.0
    sales = 0
    revenue = 0.0
    while True:
        lam = rates[state - 1] if state > 0 else 0.0
        out = (C - state) * mu
        total = lam + out
        t_next = t + rng.standard_exponential() / total if total > 0.0 else np.inf
        if state > 0:
            lo = max(t, warmup)
            hi = min(t_next, horizon)
            if hi > lo:
                stocked += hi - lo
        if t_next >= horizon:
            break
        t = t_next
        if rng.random() * total < lam:
            if t >= warmup:
                sales += 1
                revenue += margins[state - 1]
            state -= 1
        else:
            state += 1
    span = horizon - warmup
    return revenue / span, sales / span, stocked / span


def simulate(inst: Instance, pol, cfg: SimConfig | None = None) -> SimEstimate:
    """Estimate profit rate, market share and service level by simulation."""
    cfg = cfg or SimConfig()
    pol = as_policy(pol)
    pol.validate(inst)
    rates = np.minimum(np.ascontiguousarray(pol.rates, dtype=float), inst.Lambda)
    margins = np.zeros(inst.C)
    pos = rates > 0
    margins[pos] = np.asarray(profit_rate(inst.curve, inst.c, rates[pos])) / rates[pos]
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    out = np.empty((cfg.replications, 3))
    for k, ss in enumerate(streams):
        rng = np.random.Generator(np.random.PCG64(ss))
        out[k] = _replicate(rates, margins, inst.C, float(inst.mu), float(cfg.horizon),
                            float(cfg.warmup), rng)
    return SimEstimate(out)


@dataclass(frozen=True)
class ValidationReport:
    estimate: SimEstimate
    analytic: ObjectiveTriple
    z_scores: ObjectiveTriple
    passed: tuple[bool, bool, bool]
    weighted_passed: bool

    @property
    def all_passed(self) -> bool:
        return all(self.passed) and self.weighted_passed

    def to_dict(self) -> dict:
        return {
            "simulated": self.estimate.mean._asdict(),
            "stderr": self.estimate.stderr._asdict(),
            "analytic": self.analytic._asdict(),
            "z_scores": self.z_scores._asdict(),
            "passed": dict(zip(ObjectiveTriple._fields, self.passed)),
            "weighted_passed": self.weighted_passed,
        }


def _within(diff: float, se: float) -> tuple[bool, float]:
    if se > 0:
        z = diff / se
        return abs(z) <= SIGMA_LIMIT, z
    # deterministic metric, e.g. an all-zero policy
    return abs(diff) <= 1e-12, 0.0


def validate_against_analytic(inst: Instance, pol, cfg: SimConfig | None = None) -> ValidationReport:
    """Compare simulated metrics with the stationary formulas (3 standard errors)."""
    est = simulate(inst, pol, cfg)
    exact = objectives(inst, pol)
    checks = [_within(m - a, s) for m, a, s in zip(est.mean, exact, est.stderr)]
    w_mean, w_se = est.weighted(inst.weights)
    w_ok, _ = _within(w_mean - exact.weighted(inst.weights), w_se)
    return ValidationReport(est, exact, ObjectiveTriple(*(z for _, z in checks)),
                            tuple(ok for ok, _ in checks), w_ok)
