"""Numerical audits of the ratio bounds.

Each audit samples the region where a bound is claimed, evaluates the bound
object and counts violations.  Sampled z-vectors are consistent with
nondecreasing optimal rates: rate-to-service ratios are drawn log-uniformly,
sorted ascending and turned into suffix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from ..demand import PROFIT, DemandCurve
from ..dynamic_opt import solve_dynamic
from ..errors import DomainError, GuaranteeViolation
from ..loss_chain import Instance, falling_factorials
from .two_unit import (TWO_UNIT_SPLIT, c2_G, c2_h, envelope_peak, envelope_theta,
                       two_unit_check)
from .zspace import r_tilde_from_aggregates, ratio_R_batch, ratio_R_tilde_batch, ratio_R_two_unit

FLOOR = Fraction(15, 19)
TWO_UNIT_FLOOR = Fraction(4, 5)
H4 = Fraction(27, 104)
UPPER_REGION_BOUND = Fraction(104, 131)
LOWER_REGION_BOUND = Fraction(6, 7)
THREE_UNIT_TERM_RATIO = Fraction(30, 38)
G_CAP = 0.0433

Z_RANGE = (1e-3, 1e6)
BOUND_TOL = 1e-9
FD_STEP = 1e-6
FD_TOL = 1e-7
MP_DPS = 40


@dataclass
class AuditReport:
    lemma: str
    samples: int
    violations: int
    worst_margin: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        out = {"lemma": self.lemma, "samples": self.samples,
               "violations": self.violations, "worst_margin": self.worst_margin}
        out.update(self.details)
        return out


def sample_ordered_z(C: int, n: int, rng: np.random.Generator, lo: float = Z_RANGE[0],
                     hi: float = Z_RANGE[1]) -> np.ndarray:
    """``n`` z-vectors whose implied rates are nondecreasing in the state."""
    log_ratios = np.sort(rng.uniform(math.log(lo), math.log(hi), size=(n, C)), axis=1)
    return np.exp(np.cumsum(log_ratios[:, ::-1], axis=1)[:, ::-1])


def upper_region(z: np.ndarray) -> np.ndarray:
    """Mask of rows with ``y >= a_1 z_1``."""
    a = falling_factorials(z.shape[1])
    y = z[:, 1:] @ a[2:]
    return y >= a[1] * z[:, 0]


def _sample_region(C, n, rng, upper: bool, max_rounds: int = 200):
    chunks, have = [], 0
    for _ in range(max_rounds):
        z = sample_ordered_z(C, max(n, 1000), rng)
        keep = z[upper_region(z) == upper]
        chunks.append(keep)
        have += len(keep)
        if have >= n:
            break
    z = np.concatenate(chunks)[:n] if chunks else np.empty((0, C))
    return z


def _require_c4(C):
    if C < 4:
        raise DomainError(f"the truncated ratio audits need C >= 4, got C={C}")


def _mp_aggregates(zrow, a_int):
    zs = [mpmath.mpf(float(v)) for v in zrow] + [mpmath.mpf(1)]
    C = len(zrow)
    x = mpmath.fsum(a_int[k] * zs[k] for k in range(1, C + 1))        # a_k z_{k+1}
    y = mpmath.fsum(a_int[k] * zs[k - 1] for k in range(2, C + 1))    # a_k z_k
    return zs[0], x, y


def audit_lemma2(C: int, sample_count: int = 10_000, seed: int = 0) -> AuditReport:
    """Central differences of the truncated ratio in ``z_1`` on ``y >= a_1 z_1``."""
    _require_c4(C)
    rng = np.random.default_rng(seed)
    z = _sample_region(C, sample_count, rng, upper=True)
    a_int = [math.perm(C, i) for i in range(C + 1)]
    worst = math.inf
    bad = 0
    with mpmath.workdps(MP_DPS):
        for row in z:
            z1, x, y = _mp_aggregates(row, a_int)
            step = z1 * FD_STEP
            d = (r_tilde_from_aggregates(z1 + step, x, y, C)
                 - r_tilde_from_aggregates(z1 - step, x, y, C)) / (2 * step)
            d = float(d)
            worst = min(worst, d)
            bad += d < -FD_TOL
    return AuditReport("lemma2_monotone_in_z1", len(z), int(bad), worst,
                       {"C": C, "seed": seed, "tolerance": -FD_TOL})


def audit_lemma3(C: int, sample_count: int = 10_000, seed: int = 0) -> AuditReport:
    """Truncated ratio at ``z_1 = 0`` and on the ``y >= a_1 z_1`` region stays above 104/131."""
    _require_c4(C)
    rng = np.random.default_rng(seed)
    z_region = _sample_region(C, sample_count, rng, upper=True)
    z_zero = sample_ordered_z(C, sample_count, rng)
    z_zero[:, 0] = 0.0
    vals = np.concatenate((ratio_R_tilde_batch(z_region), ratio_R_tilde_batch(z_zero)))
    margin = vals - float(UPPER_REGION_BOUND)
    return AuditReport("lemma3_upper_region_bound", len(vals), int(np.sum(margin < -BOUND_TOL)),
                       float(margin.min()), {"C": C, "seed": seed, "bound": str(UPPER_REGION_BOUND)})


def audit_lemma4(C: int, sample_count: int = 10_000, seed: int = 0) -> AuditReport:
    """Truncated ratio on the ``y <= a_1 z_1`` region stays above 6/7."""
    _require_c4(C)
    rng = np.random.default_rng(seed)
    z = _sample_region(C, sample_count, rng, upper=False)
    if len(z) == 0:
        return AuditReport("lemma4_lower_region_bound", 0, 0, math.inf,
                           {"C": C, "seed": seed, "note": "region not reached by sampling"})
    margin = ratio_R_tilde_batch(z) - float(LOWER_REGION_BOUND)
    return AuditReport("lemma4_lower_region_bound", len(z), int(np.sum(margin < -BOUND_TOL)),
                       float(margin.min()), {"C": C, "seed": seed, "bound": str(LOWER_REGION_BOUND)})


def audit_truncation(C: int, sample_count: int = 100_000, seed: int = 0) -> AuditReport:
    """``R >= R~`` pointwise and ``R >= 15/19`` on ordered z-vectors."""
    _require_c4(C)
    rng = np.random.default_rng(seed)
    z = sample_ordered_z(C, sample_count, rng)
    R = ratio_R_batch(z)
    gap = R - ratio_R_tilde_batch(z)
    floor_margin = R - float(FLOOR)
    bad = int(np.sum(gap < -1e-12) + np.sum(floor_margin < -BOUND_TOL))
    return AuditReport("truncation_lower_bound", len(z), bad,
                       float(min(gap.min(), floor_margin.min())),
                       {"C": C, "seed": seed, "min_R": float(R.min())})


def H(C: int) -> Fraction:
    """Coefficient-ratio bound for the ``y^4`` terms of the truncated ratio."""
    den = sum(math.perm(C, i) * (C - 1) ** (4 - i) for i in range(1, 5))
    return Fraction((C - 1) ** 4, den)


def coefficient_identity(C: int) -> tuple[Fraction, Fraction]:
    """Both sides of the collected coefficient in the ``z_1`` derivative numerator."""
    a1, a2, a3, a4 = (math.perm(C, i) for i in range(1, 5))
    lhs = (2 * a1 * a2**2 - 2 * a1**2 * a3 - 4 * a1 * a4 + 2 * a2 * a3
           + Fraction(2 * a2 * a4 + a3**2, 2 * (C - 1)) + Fraction(a3 * a4, 2 * (C - 1) ** 2))
    return lhs, Fraction(C**2 * (6 + C * (6 * C - 13)))


def audit_H(C_max: int = 50) -> AuditReport:
    """Exact rational checks of ``H`` and the combined floor."""
    if C_max < 4:
        raise DomainError("C_max must be at least 4")
    table = {C: H(C) for C in range(4, C_max + 1)}
    checks = {
        "H4": table[4] == H4,
        "reciprocal": 1 / (table[4] + 1) == UPPER_REGION_BOUND,
        "decreasing": all(table[C + 1] <= table[C] for C in range(4, C_max)),
        "combined_floor": min(UPPER_REGION_BOUND, LOWER_REGION_BOUND) >= FLOOR,
        "three_unit_terms": THREE_UNIT_TERM_RATIO == FLOOR,
        "two_unit_floor": TWO_UNIT_FLOOR >= FLOOR,
        "lower_region_C": all(Fraction(2 * C - 2, 2 * C - 1) >= LOWER_REGION_BOUND
                              for C in range(4, C_max + 1)),
        "coefficient_identity": all(coefficient_identity(C)[0] == coefficient_identity(C)[1] > 0
                                    for C in range(4, C_max + 1)),
        "a2_squared": all(math.perm(C, 2) ** 2 >= math.perm(C, 1) * math.perm(C, 3)
                          for C in range(4, C_max + 1)),
    }
    margin = min(float(table[C] - table[C + 1]) for C in range(4, C_max)) if C_max > 4 else 0.0
    return AuditReport("H_table", len(table), sum(not ok for ok in checks.values()), margin,
                       {"checks": checks, "H": {str(C): str(v) for C, v in table.items() if C <= 10}})


def audit_G_grid(n_beta: int = 400, n_z: int = 400, beta_max: float = 50.0,
                 consistency_samples: int = 10_000, seed: int = 0) -> AuditReport:
    """``G <= 0.0433`` for ``z2`` between the split and ``sqrt(2 beta)``.

    Also cross-checks ``R(g, z2) = 1 - G`` at random ``(beta, z2)`` and the
    location of the maximum against the stationarity polynomial.
    """
    beta_min = TWO_UNIT_SPLIT**2 / 2.0
    betas = np.concatenate((np.linspace(beta_min, 3.0, n_beta // 2),
                            np.geomspace(3.0, beta_max, n_beta - n_beta // 2)))
    u = np.linspace(0.0, 1.0, n_z)
    bb, uu = np.meshgrid(betas, u, indexing="ij")
    z_hi = np.sqrt(2.0 * bb)
    zz = TWO_UNIT_SPLIT + uu * (z_hi - TWO_UNIT_SPLIT)
    G = c2_G(bb.ravel(), zz.ravel(), check=False)
    k = int(np.argmax(G))
    rng = np.random.default_rng(seed)
    identity_bad = 0
    try:
        c2_G(rng.uniform(0, 10, consistency_samples), rng.uniform(0, 10, consistency_samples))
    except GuaranteeViolation:
        identity_bad = 1
    beta_star, h_star = envelope_peak()
    return AuditReport("G_grid", G.size, int(np.sum(G > G_CAP)) + identity_bad, float(G_CAP - G.max()),
                       {"G_max": float(G.max()), "argmax_beta": float(bb.ravel()[k]),
                        "argmax_z2": float(zz.ravel()[k]), "beta_star": beta_star,
                        "theta_star": envelope_theta(), "h_at_beta_star": h_star,
                        "h_near_peak": float(np.max(c2_h(np.linspace(0.5, 0.7, 201))))})


def _lemma5_instances(n: int, rng: np.random.Generator):
    for _ in range(n):
        yield Instance(2, 1.0 / rng.uniform(0.05, 50.0), 0.0, PROFIT,
                       DemandCurve.linear(rng.uniform(0.1, 5.0), rng.uniform(0.5, 10.0)))


def audit_theorem2_region(grid: int = 100, n_instances: int = 100, seed: int = 0) -> AuditReport:
    """Two-unit profit region: derivative signs, split value and first-order bounds."""
    z2s = np.geomspace(1e-3, 1e3, grid)
    us = np.linspace(0.0, 1.0, grid)
    sign_bad, sign_worst = 0, math.inf
    with mpmath.workdps(MP_DPS):
        for z2f in z2s:
            z2 = mpmath.mpf(float(z2f))
            for uf in us:
                z1 = mpmath.mpf(float(uf)) * z2**2
                h1 = FD_STEP * max(z1, mpmath.mpf(FD_STEP))
                h2 = FD_STEP * z2
                d1 = (ratio_R_two_unit(z1 + h1, z2) - ratio_R_two_unit(z1 - h1, z2)) / (2 * h1)
                d2 = (ratio_R_two_unit(z1, z2 + h2) - ratio_R_two_unit(z1, z2 - h2)) / (2 * h2)
                # both derivatives scale as 1/z, so compare elasticities
                e1, e2 = float(d1 * max(z1, h1)), float(-d2 * z2)
                sign_worst = min(sign_worst, e1, e2)
                sign_bad += (e1 < -FD_TOL) + (e2 < -FD_TOL)
    split_value = float(ratio_R_two_unit(0.0, TWO_UNIT_SPLIT))
    split_bad = int(abs(split_value - 0.9557) > 5e-4)

    rng = np.random.default_rng(seed)
    z1_slack, z2_slack, lemma5_bad = math.inf, math.inf, 0
    for inst in _lemma5_instances(n_instances, rng):
        chk = two_unit_check(inst, solve_dynamic(inst).policy.rates)
        s1 = chk.z1_slack / max(1.0, chk.z1)
        s2 = chk.z2_slack / max(1.0, chk.z2)
        z1_slack, z2_slack = min(z1_slack, s1), min(z2_slack, s2)
        lemma5_bad += (s1 < -1e-6) + (s2 < -1e-6)
    return AuditReport("theorem2_region", grid * grid + 1 + n_instances,
                       int(sign_bad + split_bad + lemma5_bad), float(min(sign_worst, z1_slack, z2_slack)),
                       {"sign_violations": int(sign_bad), "R_at_split": split_value,
                        "z1_lower_slack": z1_slack, "z2_upper_slack": z2_slack,
                        "lemma5_violations": int(lemma5_bad)})


def run_all_audits(seed: int = 0, sample_count: int = 10_000, capacities=(4, 5, 6)) -> list[AuditReport]:
    reports = []
    for C in capacities:
        reports.append(audit_lemma2(C, sample_count, seed))
        reports.append(audit_lemma3(C, sample_count, seed))
        reports.append(audit_lemma4(C, sample_count, seed))
        reports.append(audit_truncation(C, sample_count, seed))
    reports.append(audit_H())
    reports.append(audit_G_grid(seed=seed))
    reports.append(audit_theorem2_region(seed=seed))
    return reports
