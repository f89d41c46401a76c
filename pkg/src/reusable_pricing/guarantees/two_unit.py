"""Two-unit profit analysis in the ``(beta, z2)`` coordinates.

With two units and a linear curve, the optimal ``z1`` is bounded below by
``g(beta, z2)``, where ``beta`` is the normalised margin of the state-1 rate.
The stock-in ratio at that bound is ``1 - G(beta, z2)``, and ``h(beta)`` is
``G`` on the constraint boundary ``z2 = sqrt(2 beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..demand import Family, price_at_rate
from ..errors import DomainError, GuaranteeViolation
from ..loss_chain import Instance
from .zspace import ZVector, ratio_R_batch, ratio_R_two_unit

# z2 below this splits the profit region into the two cases handled separately
TWO_UNIT_SPLIT = (math.sqrt(7.0) - 1.0) / 3.0

# stationarity condition of h in theta = sqrt(beta), highest degree first
ENVELOPE_POLY = np.array([16, 56 * math.sqrt(2), 210, 244 * math.sqrt(2), 316, 96 * math.sqrt(2),
                          -18, -36 * math.sqrt(2), -36, -48 * math.sqrt(2), -66,
                          -12 * math.sqrt(2), 0.0])

IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class C2Params:
    beta: float
    z2: float

    def __post_init__(self):
        if not (self.beta >= 0 and self.z2 >= 0):
            raise ValueError("beta and z2 must be nonnegative")

    def g(self) -> float:
        return float(c2_g(self.beta, self.z2))

    def G(self) -> float:
        return float(c2_G(self.beta, self.z2))


def _root_term(beta, z2):
    return np.sqrt((1.0 + beta) * z2**2 + 2.0 * (1.0 + beta) * z2 + 1.0)


def _unpack(beta, z2):
    if isinstance(beta, C2Params):
        return beta.beta, beta.z2
    if z2 is None:
        raise TypeError("pass a C2Params or both beta and z2")
    return beta, z2


def c2_g(beta, z2=None):
    """Lower bound on the optimal ``z1`` given ``beta`` and ``z2``."""
    beta, z2 = _unpack(beta, z2)
    beta = np.asarray(beta, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    g = _root_term(beta, z2) - (z2 + 1.0)
    if np.any(g < -1e-12 * np.maximum(1.0, z2)):
        raise GuaranteeViolation("g(beta, z2) is negative")
    g = np.maximum(g, 0.0)
    return float(g) if g.ndim == 0 else g


def c2_G(beta, z2=None, check: bool = True):
    """Ratio gap ``1 - R(g, z2)`` in closed form.

    With ``check`` the closed form is compared with the ratio evaluated at
    ``(g, z2)`` through both the two-unit polynomial and the general
    log-space routine; a mismatch above ``1e-9`` raises.
    """
    beta, z2 = _unpack(beta, z2)
    beta = np.asarray(beta, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    A = _root_term(beta, z2)
    G = (z2**2 + z2 + 1.0 - A) / ((3.0 + beta) * z2**2 + (2.0 * beta + 4.0) * z2 + 2.0 * z2 * A + 2.0)
    if check:
        g = np.atleast_1d(c2_g(beta, z2))
        zz = np.atleast_1d(z2 + 0.0 * g)
        direct = ratio_R_two_unit(g, zz)
        general = ratio_R_batch(np.stack([g, zz], axis=1))
        err = max(np.max(np.abs(1.0 - np.atleast_1d(G) - direct)),
                  np.max(np.abs(direct - general)))
        if err > IDENTITY_TOL:
            raise GuaranteeViolation(f"R(g, z2) and 1 - G differ by {err:.3e}")
    return float(G) if G.ndim == 0 else G


def c2_h(beta):
    """``G`` on the boundary ``z2 = sqrt(2 beta)``."""
    beta = np.asarray(beta, dtype=float)
    return c2_G(beta, np.sqrt(2.0 * beta))


def envelope_theta() -> float:
    """Positive real root of the stationarity polynomial of ``h``."""
    roots = np.roots(ENVELOPE_POLY)
    real = roots[np.abs(roots.imag) < 1e-9].real
    return float(real[real > 1e-9].min())


def envelope_peak() -> tuple[float, float]:
    """``(beta*, h(beta*))`` at the maximiser of ``h``."""
    beta = envelope_theta() ** 2
    return beta, float(c2_h(beta))


@dataclass(frozen=True)
class TwoUnitCheck:
    beta: float
    z1: float
    z2: float
    g: float

    @property
    def z1_slack(self) -> float:
        """``z1 - g``; nonnegative when the lower bound holds."""
        return self.z1 - self.g

    @property
    def z2_slack(self) -> float:
        """``sqrt(2 beta) - z2``; nonnegative when the upper bound holds."""
        return math.sqrt(2.0 * self.beta) - self.z2


def two_unit_check(inst: Instance, rates) -> TwoUnitCheck:
    """Coordinates of a two-unit linear profit policy and the bound ``g``."""
    if inst.C != 2 or inst.curve.family is not Family.LINEAR:
        raise DomainError("two-unit checks need C=2 and linear demand")
    rates = np.asarray(rates, dtype=float)
    if rates[0] <= 0:
        raise DomainError("the state-1 rate must be positive")
    zv = ZVector.from_rates(rates, inst.mu)
    # margin in units of the price change per unit of load lambda/mu
    beta = (float(price_at_rate(inst.curve, rates[0])) - inst.c) * inst.curve.a / inst.mu
    z1, z2 = (float(v) for v in zv.z)
    return TwoUnitCheck(beta, z1, z2, float(c2_g(max(beta, 0.0), z2)))
