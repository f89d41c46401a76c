"""Static rates derived from the optimal dynamic policy, and their ratios."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .demand import golden_section_max
from .dynamic_opt import DynamicSolution
from .loss_chain import Instance, ObjectiveTriple, Policy, objectives, static_weighted_value, steady_state

STATIC_GRID = 2000


class RatioTuple(NamedTuple):
    profit: float
    market: float
    service: float
    weighted: float

    def worst_objective(self) -> float:
        return min(self.profit, self.market, self.service)


@dataclass(frozen=True)
class StaticReport:
    lambda_tilde: float
    lambda_best: float
    ratios_tilde: RatioTuple
    ratios_best: RatioTuple
    optimal_value: ObjectiveTriple
    value_tilde: ObjectiveTriple
    value_best: ObjectiveTriple

    def to_dict(self) -> dict:
        return {
            "lambda_tilde": self.lambda_tilde,
            "lambda_best": self.lambda_best,
            "ratios_tilde": self.ratios_tilde._asdict(),
            "ratios_best": self.ratios_best._asdict(),
            "optimal_value": self.optimal_value._asdict(),
            "value_tilde": self.value_tilde._asdict(),
            "value_best": self.value_best._asdict(),
        }


def stock_in_average_rate(rates, probs) -> float:
    """``sum_i lambda_i P_i / (1 - P_0)`` for rates ``lambda_1..lambda_C`` and ``P_0..P_C``."""
    rates = np.asarray(rates, dtype=float)
    probs = np.asarray(probs, dtype=float)
    stock_in = probs[1:].sum()
    if stock_in <= 0.0 or not np.any(rates > 0):
        return 0.0
    lam = float(np.dot(rates, probs[1:]) / stock_in)
    # a convex combination of rates stays between them up to rounding
    return min(max(lam, float(rates.min())), float(rates.max()))


def constructed_static_rate(inst: Instance, dyn: DynamicSolution) -> float:
    """Average optimal rate over the stock-in states, weighted by ``P_i*``.

    An all-zero optimal policy keeps every unit on hand, so the average is 0.
    """
    return stock_in_average_rate(dyn.policy.rates, steady_state(inst, dyn.policy).probs)


def best_static_rate(inst: Instance, grid_points: int = STATIC_GRID, tol: float = 1e-10,
                     candidates=()) -> float:
    """Best constant rate: grid scan, then golden-section refinement near the best cell.

    Extra ``candidates`` (e.g. the constructed rate) are compared as well, so
    the result is never worse than any of them.
    """
    grid = np.linspace(0.0, inst.Lambda, grid_points)
    vals = static_weighted_value(inst, grid)
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]

    def f(lam):
        return float(static_weighted_value(inst, lam)[0])

    best, fbest = golden_section_max(f, lo, hi, tol)
    if vals[k] >= fbest:
        best, fbest = float(grid[k]), float(vals[k])
    for lam in candidates:
        v = f(lam)
        if v > fbest:
            best, fbest = float(lam), v
    return best


def objective_ratio(static: float, optimal: float) -> float:
    """``min(static/optimal, 1)``, with a zero optimum counted as fully matched."""
    if optimal == 0.0:
        return 1.0
    return min(static / optimal, 1.0)


def _ratios(inst: Instance, value: ObjectiveTriple, opt: ObjectiveTriple) -> RatioTuple:
    w = inst.weights
    return RatioTuple(
        objective_ratio(value.profit, opt.profit),
        objective_ratio(value.market_share, opt.market_share),
        objective_ratio(value.service_level, opt.service_level),
        objective_ratio(value.weighted(w), opt.weighted(w)),
    )


def ratio_report(inst: Instance, dyn: DynamicSolution) -> StaticReport:
    """Per-objective ratios of the constructed and the best static rates."""
    lam_t = constructed_static_rate(inst, dyn)
    lam_b = best_static_rate(inst, candidates=(lam_t,))
    opt = dyn.value
    v_t = objectives(inst, Policy.static(lam_t, inst.C))
    v_b = objectives(inst, Policy.static(lam_b, inst.C))
    return StaticReport(lam_t, lam_b, _ratios(inst, v_t, opt), _ratios(inst, v_b, opt), opt, v_t, v_b)
