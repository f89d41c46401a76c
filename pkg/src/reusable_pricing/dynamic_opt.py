"""Optimal dynamic pricing by uniformisation and relative value iteration.

The continuous-time problem is turned into a discrete-time MDP with the
uniformisation constant ``gamma = 1/(1 + Lambda + C*mu)``.  Per-step rewards
are the reward *rates*, so the average reward per step equals the long-run
weighted objective of the continuous-time system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .demand import Family, check_concavity, golden_section_max, myopic_rate, profit_rate
from .errors import ConvergenceError, RejectedInstanceError, StructuralViolation
from .loss_chain import Instance, ObjectiveTriple, Policy, objectives, objectives_batch

STRUCTURE_TOL = 1e-8
MAX_BRUTE_FORCE = 10**8
EPS = 2.220446049250313e-16
TIE_ULPS = 8.0

_FAMILY_CODE = {Family.LINEAR: 0, Family.EXPONENTIAL: 1, Family.LOGISTIC: 2, Family.RECIPROCAL: 3}


@dataclass(frozen=True)
class MdpConfig:
    span_tolerance: float = 1e-10
    max_iterations: int = 10**6
    inner_tolerance: float = 1e-12
    anchor: int = 0  # state whose relative value is pinned to zero (0 or C)
    check_structure: bool = True

    def __post_init__(self):
        if not (self.span_tolerance > 0 and self.inner_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class DynamicSolution:
    policy: Policy
    eta: float
    h: np.ndarray | None
    value: ObjectiveTriple
    iterations: int = 0
    span: float = 0.0
    weighted: float = field(default=math.nan)


def uniformization_constant(inst: Instance) -> float:
    return 1.0 / (1.0 + inst.Lambda + inst.C * inst.mu)


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _logit_root(target, s):
    # Newton on s - 1 - exp(-s) = target (increasing, concave)
    if not np.isfinite(s):
        s = target + 1.0 if target >= -1.0 else -math.log(-target)
    for _ in range(200):
        e = math.exp(-s) if s > -700.0 else 1e304
        step = (s - 1.0 - e - target) / (1.0 + e)
        s -= step
        if abs(step) <= 1e-14 * max(1.0, abs(s)):
            break
    return s


@njit(cache=True)
def _price(fam, a, b, p0, lam):
    if fam == 0:
        return (b - lam) / a
    # logs are split so a subnormal lam cannot overflow the quotient
    if fam == 1:
        return (math.log(b) - math.log(lam)) / a
    if fam == 2:
        return p0 + (math.log((b - lam) + b * math.exp(-a * p0)) - math.log(lam)) / a
    return 1.0 / lam


@njit(cache=True)
def _reward(fam, a, b, p0, c, al1, al2, al3, lam):
    r = al2 * lam + al3
    if al1 != 0.0 and lam > 0.0:
        r += al1 * lam * (_price(fam, a, b, p0, lam) - c)
    return r


@njit(cache=True)
def _inner_rate(fam, a, b, p0, c, al1, al2, d, cap, s_prev, slot):
    """argmax over [0, cap] of lam * (al1*(p(lam)-c) + al2 - d); smallest on ties."""
    if al1 == 0.0:
        return cap if al2 - d > 0.0 else 0.0
    theta = (d - al2) / al1
    if fam == 0:
        lam = 0.5 * (b - a * (c + theta))
    elif fam == 1:
        lam = b * math.exp(min(700.0, -1.0 - a * (c + theta)))
    else:
        s = _logit_root(a * (c + theta - p0), s_prev[slot])
        s_prev[slot] = s
        if s < -a * p0:
            return cap
        lam = b * (1.0 + math.exp(-a * p0)) / (1.0 + math.exp(min(s, 700.0)))
    if lam < 0.0:
        return 0.0
    if lam > cap:
        return cap
    return lam


@njit(cache=True)
def _gap(hi, lo):
    # differences within a few ulps are ties; snapping them keeps tie-breaking exact
    diff = hi - lo
    if abs(diff) <= TIE_ULPS * EPS * max(abs(hi), abs(lo)):
        return 0.0
    return diff


@njit(cache=True)
def _sweep(C, mu, cap, c, al1, al2, al3, fam, a, b, p0, g, h, w, rates, s_prev):
    w[0] = g * mu * C * h[1] + (1.0 - g * mu * C) * h[0]
    for i in range(1, C + 1):
        d = g * _gap(h[i], h[i - 1])
        lam = _inner_rate(fam, a, b, p0, c, al1, al2, d, cap, s_prev, i)
        up = h[i + 1] if i < C else 0.0
        out = mu * (C - i)
        w[i] = (_reward(fam, a, b, p0, c, al1, al2, al3, lam) + g * lam * h[i - 1]
                + g * out * up + (1.0 - g * (lam + out)) * h[i])
        rates[i - 1] = lam


@njit(cache=True)
def _rvi(C, mu, cap, c, al1, al2, al3, fam, a, b, p0, tol, max_iter, anchor, h):
    g = 1.0 / (1.0 + cap + C * mu)
    w = np.zeros(C + 1)
    rates = np.zeros(C)
    s_prev = np.full(C + 1, np.nan)
    span = np.inf
    eta = 0.0
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        _sweep(C, mu, cap, c, al1, al2, al3, fam, a, b, p0, g, h, w, rates, s_prev)
        hi = -np.inf
        lo = np.inf
        scale = 0.0
        for i in range(C + 1):
            diff = w[i] - h[i]
            hi = max(hi, diff)
            lo = min(lo, diff)
            scale = max(scale, abs(w[i]))
        span = hi - lo
        eta = 0.5 * (hi + lo)
        ref = w[anchor]
        for i in range(C + 1):
            h[i] = w[i] - ref
        # below ~16 ulps of |h| the span is rounding noise
        if span < max(tol, 16.0 * EPS * scale):
            converged = True
            break
    # greedy rates for the final relative values
    _sweep(C, mu, cap, c, al1, al2, al3, fam, a, b, p0, g, h, w, rates, s_prev)
    return it, eta, span, rates, converged


def _params(inst: Instance):
    w = inst.weights
    cv = inst.curve
    return (inst.C, float(inst.mu), float(inst.Lambda), float(inst.c), w.alpha1, w.alpha2,
            w.alpha3, _FAMILY_CODE[cv.family], float(cv.a), float(cv.b), float(cv.p0))


def _admit(inst: Instance) -> None:
    if inst.weights.alpha1 == 0.0:
        return
    if inst.curve.family is Family.RECIPROCAL:
        raise RejectedInstanceError(
            "reciprocal demand is only supported with zero profit weight")
    if not check_concavity(inst.curve, inst.c, inst.Lambda):
        raise RejectedInstanceError("profit rate is not concave in the arrival rate")


def solve_dynamic(inst: Instance, cfg: MdpConfig | None = None) -> DynamicSolution:
    """Optimal state-dependent rates, average reward and relative values."""
    cfg = cfg or MdpConfig()
    _admit(inst)
    if cfg.anchor not in (0, inst.C):
        raise ValueError("anchor must be state 0 or state C")
    h = np.zeros(inst.C + 1)
    it, eta, span, rates, converged = _rvi(*_params(inst), cfg.span_tolerance,
                                           cfg.max_iterations, cfg.anchor, h)
    if not converged:
        raise ConvergenceError(
            f"relative value iteration stopped after {it} sweeps with span {span:.3e} "
            f"(tolerance {cfg.span_tolerance:.1e})", iterations=it, span=span)
    if cfg.anchor != 0:
        h = h - h[0]
    pol = Policy(rates.copy())
    value = objectives(inst, pol)
    sol = DynamicSolution(pol, float(eta), h, value, int(it), float(span),
                          value.weighted(inst.weights))
    if cfg.check_structure:
        check_structure(inst, sol)
    return sol


def check_structure(inst: Instance, sol: DynamicSolution, tol: float = STRUCTURE_TOL) -> None:
    """Raise if rates are not monotone up to the myopic rate, or ``h`` not concave."""
    r = sol.policy.rates
    cap = myopic_rate(inst.curve, inst.c, inst.weights, inst.Lambda)
    if np.any(np.diff(r) < -tol) or r[-1] > cap + tol:
        raise StructuralViolation(f"rates {r} are not nondecreasing up to myopic rate {cap}")
    if sol.h is not None:
        h = sol.h
        scale = tol * max(1.0, float(np.abs(h).max()))
        if np.any(np.diff(h) < -scale) or np.any(np.diff(h, 2) > scale):
            raise StructuralViolation(f"relative values {h} are not nondecreasing and concave")


def bellman_apply(inst: Instance, gamma: float, eta: float, h, anchor: bool = True):
    """One application of the uniformised Bellman operator.

    Returns ``(h_next, rates)``.  With ``anchor`` the result is shifted so
    ``h_next[0] == 0``.  The inner maximisation uses the vertex formula for
    linear demand and golden-section search otherwise.
    """
    _admit(inst)
    h = np.asarray(h, dtype=float)
    C, mu, cap = inst.C, inst.mu, inst.Lambda
    a1, a2, a3 = inst.weights.as_tuple()
    if h.shape != (C + 1,):
        raise ValueError(f"h must have length {C + 1}")
    out = np.empty(C + 1)
    rates = np.empty(C)
    out[0] = -eta + gamma * mu * C * h[1] + (1.0 - gamma * mu * C) * h[0]
    for i in range(1, C + 1):
        d = gamma * _gap(h[i], h[i - 1])
        flow = mu * (C - i)
        up = h[i + 1] if i < C else 0.0

        def value(lam, i=i, d=d, flow=flow, up=up):
            reward = a2 * lam + a3
            if a1:
                reward += a1 * profit_rate(inst.curve, inst.c, lam)
            return (reward - eta + gamma * lam * h[i - 1] + gamma * flow * up
                    + (1.0 - gamma * (lam + flow)) * h[i])

        if a1 == 0.0:
            lam = cap if a2 - d > 0 else 0.0
        elif inst.curve.family is Family.LINEAR:
            vertex = 0.5 * (inst.curve.b - inst.curve.a * (inst.c + (d - a2) / a1))
            lam = min(cap, max(0.0, vertex))
        else:
            lam = golden_section_max(value, 0.0, cap, 1e-12)[0]
        rates[i - 1] = lam
        out[i] = value(lam)
    if anchor:
        out = out - out[0]
    return out, rates


def solution_from_policy(inst: Instance, pol) -> DynamicSolution:
    """Wrap a known (e.g. analytically optimal) policy as a solution record."""
    pol = pol if isinstance(pol, Policy) else Policy(pol)
    pol.validate(inst)
    value = objectives(inst, pol)
    v = value.weighted(inst.weights)
    return DynamicSolution(pol, v, None, value, 0, 0.0, v)


def brute_force_policy_search(inst: Instance, grid_points: int, chunk: int = 1 << 18) -> DynamicSolution:
    """Best policy on the uniform grid ``[0, Lambda]^C`` (validation oracle)."""
    C = inst.C
    n_eval = grid_points ** C
    if n_eval > MAX_BRUTE_FORCE:
        raise ValueError(f"{grid_points}^{C} = {n_eval} evaluations exceeds {MAX_BRUTE_FORCE}")
    grid = np.linspace(0.0, inst.Lambda, grid_points)
    w = inst.weights
    best_val, best_idx = -np.inf, 0
    for start in range(0, n_eval, chunk):
        idx = np.arange(start, min(start + chunk, n_eval))
        cols = np.unravel_index(idx, (grid_points,) * C)
        rates = np.stack([grid[c] for c in cols], axis=1)
        p, m, s = objectives_batch(inst, rates)
        vals = w.alpha1 * p + w.alpha2 * m + w.alpha3 * s
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_idx = float(vals[k]), int(idx[k])
    cols = np.unravel_index(best_idx, (grid_points,) * C)
    pol = Policy(np.array([grid[c] for c in cols]))
    value = objectives(inst, pol)
    return DynamicSolution(pol, best_val, None, value, n_eval, 0.0, value.weighted(w))
