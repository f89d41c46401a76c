"""Suffix-product coordinates and the stock-in ratio functions.

For a policy with rates ``lambda_1..lambda_C`` let ``z_i = prod_{j>=i} lambda_j/mu``
(``z_{C+1} = 1``).  The stationary weights are ``a_i z_{i+1}`` with
``a_i = C!/(C-i)!``, so the stock-in probability of the policy and of the
constant rate ``lambda~`` (the stock-in average of the policy's rates) are both
rational in ``z``.  Their quotient is :func:`ratio_R`; :func:`ratio_R_tilde`
truncates both polynomial sums at degree four.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import DomainError
from ..loss_chain import Instance, as_policy, falling_factorials, log_falling_factorials


@dataclass(frozen=True)
class ZVector:
    z: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=float).reshape(-1)
        if z.size < 1 or np.any(z < 0) or not np.all(np.isfinite(z)):
            raise ValueError("z must be a nonempty vector of finite nonnegative numbers")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def C(self) -> int:
        return self.z.size

    @property
    def a(self) -> np.ndarray:
        return falling_factorials(self.C)

    @property
    def extended(self) -> np.ndarray:
        """``z_1..z_{C+1}`` with the trailing 1."""
        return np.append(self.z, 1.0)

    @property
    def x(self) -> float:
        return float(np.dot(self.a[1:], self.extended[1:]))

    @property
    def y(self) -> float:
        return float(np.dot(self.a[2:], self.z[1:]))

    def is_ordered(self, rtol: float = 1e-12) -> bool:
        """``z_1 z_{k+1} <= z_2 z_k`` for all k, i.e. lambda_1 is the smallest rate."""
        if self.C < 2:
            return True
        ze = self.extended
        lhs = ze[0] * ze[2:]
        rhs = ze[1] * ze[1:-1]
        return bool(np.all(lhs <= rhs * (1 + rtol)))

    @classmethod
    def from_rates(cls, rates, mu: float) -> ZVector:
        ratios = np.asarray(rates, dtype=float) / mu
        return cls(np.cumprod(ratios[::-1])[::-1])


def z_from_policy(inst: Instance, pol) -> ZVector:
    pol = as_policy(pol)
    pol.validate(inst)
    return ZVector.from_rates(pol.rates, inst.mu)


def _logs(z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(z)


def ratio_R_batch(z: np.ndarray) -> np.ndarray:
    """Stock-in ratio for each row of ``z`` (shape ``(n, C)``)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n, C = z.shape
    la = log_falling_factorials(C)
    lz = _logs(np.concatenate((z, np.ones((n, 1))), axis=1))  # log z_1..z_{C+1}
    all_terms = la[None, :] + lz                                # a_k z_{k+1}, k=0..C
    log_total = logsumexp(all_terms, axis=1)
    log_x = logsumexp(all_terms[:, 1:], axis=1)
    log_s = logsumexp(la[None, 1:] + lz[:, :C], axis=1)         # sum a_k z_k
    log_t = log_s - log_x                                        # log(lambda~/mu)
    power = (C - np.arange(C + 1))[None, :]
    with np.errstate(invalid="ignore"):
        static = np.where(power == 0, 0.0, power * log_t[:, None]) + la[None, :]
    out = np.exp(log_total - log_x + logsumexp(static[:, 1:], axis=1) - logsumexp(static, axis=1))
    degenerate = ~np.any(z > 0, axis=1)
    out[degenerate] = 1.0
    return out


def ratio_R(zv: ZVector) -> float:
    return float(ratio_R_batch(zv.z[None, :])[0])


def _r_tilde_terms(q, s, u, a1, a2, a3, a4):
    num = a1 * s**3 + a2 * s**2 * u + a3 * s * u**2 + a4 * u**3
    den = s**4 + a1 * s**3 * u + a2 * s**2 * u**2 + a3 * s * u**3 + a4 * u**4
    return q * num / den


def r_tilde_from_aggregates(z1, x, y, C: int):
    """Truncated ratio from ``z_1``, ``x`` and ``y``.

    Plain arithmetic only, so it also evaluates on ``mpmath.mpf`` inputs.
    """
    a = falling_factorials(C)
    a1, a2, a3, a4 = (int(round(v)) for v in a[1:5])
    S = a1 * z1 + y
    return _r_tilde_terms(z1 + x, S, x, a1, a2, a3, a4)


def ratio_R_tilde_batch(z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n, C = z.shape
    if C < 4:
        raise DomainError(f"the truncated ratio needs C >= 4, got C={C}")
    la = log_falling_factorials(C)
    lz = _logs(np.concatenate((z, np.ones((n, 1))), axis=1))
    log_x = logsumexp(la[None, 1:] + lz[:, 1:], axis=1)
    log_s = logsumexp(la[None, 1:] + lz[:, :C], axis=1)
    log_m = np.maximum(log_x, log_s)
    s = np.exp(log_s - log_m)
    u = np.exp(log_x - log_m)
    q = np.exp(np.logaddexp(lz[:, 0], log_x) - log_m)
    a1, a2, a3, a4 = np.exp(la[1:5])
    return _r_tilde_terms(q, s, u, a1, a2, a3, a4)


def ratio_R_tilde(zv: ZVector) -> float:
    return float(ratio_R_tilde_batch(zv.z[None, :])[0])


def ratio_R_two_unit(z1, z2):
    """Closed-form stock-in ratio for two units."""
    num = z1**2 + 4 * z1 * z2 + 3 * z1 + 4 * z2**2 + 6 * z2 + 2
    den = z1**2 + 4 * z1 * z2 + 2 * z1 + 5 * z2**2 + 6 * z2 + 2
    return num / den
