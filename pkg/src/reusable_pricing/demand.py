"""Demand curves, price/rate inversion and single-state rate optimisation.

Rates are the decision variable throughout the package: a curve maps a
price ``p`` to an effective arrival rate ``lambda(p)`` and back.  Three
smooth families are supported (linear, exponential, logistic), plus the
reciprocal curve ``p(lambda) = 1/lambda`` whose profit rate is constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import DomainError, RejectedInstanceError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

CONCAVITY_GRID = 1000
CONCAVITY_TOL = 1e-9


class Family(str, Enum):
    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    LOGISTIC = "logistic"
    RECIPROCAL = "reciprocal"


@dataclass(frozen=True)
class DemandCurve:
    """Invertible price/rate map.

    ``a`` is the price sensitivity, ``b`` the demand rate at price zero and
    ``p0`` the logistic inflection price.  Reciprocal curves ignore all three.
    """

    family: Family
    a: float = 1.0
    b: float = 1.0
    p0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.RECIPROCAL:
            return
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"price sensitivity a must be positive, got {self.a}")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"maximum demand b must be positive, got {self.b}")
        if self.family is Family.LOGISTIC and not (self.p0 >= 0 and math.isfinite(self.p0)):
            raise ValueError(f"inflection price p0 must be nonnegative, got {self.p0}")

    @classmethod
    def linear(cls, a: float, b: float) -> DemandCurve:
        return cls(Family.LINEAR, a, b)

    @classmethod
    def exponential(cls, a: float, b: float) -> DemandCurve:
        return cls(Family.EXPONENTIAL, a, b)

    @classmethod
    def logistic(cls, a: float, b: float, p0: float) -> DemandCurve:
        return cls(Family.LOGISTIC, a, b, p0)

    @classmethod
    def reciprocal(cls) -> DemandCurve:
        return cls(Family.RECIPROCAL)

    @property
    def max_rate(self) -> float:
        """Rate at price zero; infinite for the reciprocal curve."""
        if self.family is Family.RECIPROCAL:
            return math.inf
        return self.b

    @property
    def logistic_scale(self) -> float:
        # K in lambda = K / (1 + exp(a (p - p0)))
        return self.b * (1.0 + math.exp(-self.a * self.p0))

    def to_dict(self) -> dict:
        if self.family is Family.RECIPROCAL:
            return {"family": self.family.value}
        out = {"family": self.family.value, "a": self.a, "b": self.b}
        if self.family is Family.LOGISTIC:
            out["p0"] = self.p0
        return out

    @classmethod
    def from_dict(cls, data: dict) -> DemandCurve:
        if "family" not in data:
            raise ValueError("demand curve needs a 'family' field")
        family = Family(str(data["family"]).lower())
        if family is Family.RECIPROCAL:
            return cls.reciprocal()
        return cls(family, float(data["a"]), float(data["b"]), float(data.get("p0", 0.0)))


@dataclass(frozen=True)
class Weights:
    """Objective weights on (profit, market share, service level)."""

    alpha1: float
    alpha2: float
    alpha3: float

    def __post_init__(self):
        vals = (self.alpha1, self.alpha2, self.alpha3)
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise ValueError(f"weights must be finite and nonnegative, got {vals}")
        if abs(sum(vals) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got sum {sum(vals)!r}")

    @classmethod
    def normalized(cls, alpha1: float, alpha2: float, alpha3: float) -> Weights:
        total = alpha1 + alpha2 + alpha3
        a1, a2 = alpha1 / total, alpha2 / total
        return cls(a1, a2, max(0.0, 1.0 - a1 - a2))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha1, self.alpha2, self.alpha3)


PROFIT = Weights(1.0, 0.0, 0.0)


def _rate(curve: DemandCurve, p):
    fam = curve.family
    if fam is Family.LINEAR:
        return curve.b - curve.a * p
    if fam is Family.EXPONENTIAL:
        return curve.b * np.exp(-curve.a * p)
    if fam is Family.LOGISTIC:
        return curve.logistic_scale * expit(-curve.a * (p - curve.p0))
    return 1.0 / p


def _price(curve: DemandCurve, lam):
    fam = curve.family
    if fam is Family.LINEAR:
        return (curve.b - lam) / curve.a
    if fam is Family.EXPONENTIAL:
        # split logs: b / lam overflows for subnormal lam
        return (math.log(curve.b) - np.log(lam)) / curve.a
    if fam is Family.LOGISTIC:
        # K - lam written without cancellation at lam = b
        gap = (curve.b - lam) + curve.b * math.exp(-curve.a * curve.p0)
        return curve.p0 + (np.log(gap) - np.log(lam)) / curve.a
    return 1.0 / lam


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def rate_at_price(curve: DemandCurve, p):
    """Effective arrival rate at price ``p`` (scalar or array)."""
    arr = np.asarray(p, dtype=float)
    if curve.family is Family.RECIPROCAL:
        if np.any(~(arr > 0)):
            raise DomainError("reciprocal demand needs a strictly positive price")
    elif np.any(~(arr >= 0)) or np.any(~np.isfinite(arr)):
        raise DomainError("price must be finite and nonnegative")
    lam = _rate(curve, arr)
    if curve.family is Family.LINEAR:
        lam = np.maximum(lam, 0.0)
    return _scalar_or_array(lam)


def price_at_rate(curve: DemandCurve, lam):
    """Price that induces rate ``lam``; the inverse of :func:`rate_at_price`."""
    arr = np.asarray(lam, dtype=float)
    if np.any(~(arr > 0)) or np.any(arr > curve.max_rate):
        raise DomainError(f"rate must lie in (0, {curve.max_rate}]")
    return _scalar_or_array(_price(curve, arr))


def profit_rate(curve: DemandCurve, c: float, lam):
    """``lam * (p(lam) - c)``, taken as 0 at ``lam == 0``."""
    arr = np.asarray(lam, dtype=float)
    if np.any(arr < 0) or np.any(arr > curve.max_rate):
        raise DomainError(f"rate must lie in [0, {curve.max_rate}]")
    out = np.zeros_like(arr)
    pos = arr > 0
    out[pos] = arr[pos] * (_price(curve, arr[pos]) - c)
    return _scalar_or_array(out)


def check_concavity(curve: DemandCurve, c: float, Lambda: float | None = None) -> bool:
    """Grid test of concavity of the profit rate on ``(0, Lambda]``.

    Second differences over a 1000-point grid must all be at most ``1e-9``.
    """
    cap = _cap(curve, Lambda)
    grid = np.linspace(cap / CONCAVITY_GRID, cap, CONCAVITY_GRID)
    f = profit_rate(curve, c, grid)
    second = f[:-2] - 2.0 * f[1:-1] + f[2:]
    return bool(np.all(second <= CONCAVITY_TOL))


def _cap(curve: DemandCurve, Lambda: float | None) -> float:
    if Lambda is None:
        if curve.family is Family.RECIPROCAL:
            raise ValueError("reciprocal demand needs an explicit rate cap")
        return curve.b
    if not (Lambda > 0) or Lambda > curve.max_rate:
        raise ValueError(f"rate cap must lie in (0, {curve.max_rate}], got {Lambda}")
    return float(Lambda)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10):
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The endpoints are compared with the interior result so that monotone
    objectives return the exact boundary.
    """
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    best = (x, f(x))
    for end in (lo, hi):
        v = f(end)
        # ties go to the smaller rate
        if v > best[1] or (v == best[1] and end < best[0]):
            best = (float(end), v)
    return best


def myopic_rate(curve: DemandCurve, c: float, w: Weights, Lambda: float | None = None) -> float:
    """Rate maximising the instantaneous reward ``lam*(a1*(p(lam)-c) + a2)``."""
    cap = _cap(curve, Lambda)
    a1, a2, _ = w.as_tuple()
    if a1 == 0.0:
        return cap if a2 > 0 else 0.0
    if curve.family is Family.RECIPROCAL:
        raise RejectedInstanceError(
            "reciprocal demand with a profit weight has no attained maximiser")
    if not check_concavity(curve, c, cap):
        raise RejectedInstanceError("profit rate is not concave on the rate range")
    # lam*(a1*(p - c) + a2) = a1 * lam*(p - c - theta) with theta = -a2/a1
    return stationary_rate(curve, c, -a2 / a1, cap)


def stationary_rate(curve: DemandCurve, c: float, theta: float, Lambda: float) -> float:
    """Maximiser of ``lam * (p(lam) - c - theta)`` over ``[0, Lambda]``.

    Solves the marginal-revenue condition in closed form for linear and
    exponential curves and by Newton iteration on the logit for logistic.
    """
    fam = curve.family
    if fam is Family.LINEAR:
        lam = 0.5 * (curve.b - curve.a * (c + theta))
    elif fam is Family.EXPONENTIAL:
        lam = curve.b * math.exp(min(700.0, -1.0 - curve.a * (c + theta)))
    elif fam is Family.LOGISTIC:
        s = solve_logit_condition(curve.a * (c + theta - curve.p0))
        if s < -curve.a * curve.p0:
            return float(Lambda)
        lam = curve.logistic_scale * expit(-s)
    else:
        raise RejectedInstanceError("reciprocal demand has a constant profit rate")
    return min(float(Lambda), max(0.0, lam))


def solve_logit_condition(target: float, start: float | None = None) -> float:
    """Root of ``s - 1 - exp(-s) = target``.

    The left side is increasing and concave, so Newton iterates approach
    the root monotonically from below after at most one step.
    """
    if start is None:
        start = target + 1.0 if target >= -1.0 else -math.log(-target)
    s = start
    for _ in range(200):
        e = math.exp(-s) if s > -700 else math.inf
        step = (s - 1.0 - e - target) / (1.0 + e)
        s -= step
        if abs(step) <= 1e-14 * max(1.0, abs(s)):
            break
    return s
